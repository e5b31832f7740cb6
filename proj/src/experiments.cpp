#include "crtlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "crtlab/error.hpp"
#include "crtlab/hyperbolic.hpp"
#include "crtlab/parallel.hpp"
#include "crtlab/paths.hpp"
#include "crtlab/rtree.hpp"
#include "crtlab/stats.hpp"
#include "crtlab/treewalk.hpp"

namespace crt {
namespace {

class Deadline {
public:
    explicit Deadline(double seconds) : seconds_(seconds), start_(std::chrono::steady_clock::now()) {}

    void check() const {
        if (seconds_ <= 0.0) return;
        const double used = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        if (used > seconds_)
            throw ResourceGuardError("time ceiling of " + std::to_string(seconds_) + " s exceeded");
    }

private:
    double seconds_;
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v) {
    std::ostringstream out;
    out << std::setprecision(6) << v;
    return out.str();
}

class Params {
public:
    template <typename T>
    Params& add(const std::string& key, const T& value) {
        if (!text_.empty()) text_ += ';';
        if constexpr (std::is_floating_point_v<T>)
            text_ += key + '=' + fmt(value);
        else
            text_ += key + '=' + std::to_string(value);
        return *this;
    }
    Params& add(const std::string& key, const std::string& value) {
        if (!text_.empty()) text_ += ';';
        text_ += key + '=' + value;
        return *this;
    }
    const std::string& str() const { return text_; }

private:
    std::string text_;
};

struct Context {
    const ExperimentConfig& config;
    Deadline deadline;
    Report report;

    RngSeed block(std::uint64_t b) const { return derive_seed(RngSeed{config.seed}, b); }

    void value(const Params& p, const std::string& name, double v, std::size_t replicas) {
        report.add({config.experiment, p.str(), name, v, v, v, replicas, config.seed});
    }

    void summary(const Params& p, const std::string& name, const std::vector<double>& values, bool use_median,
                 std::uint64_t stream) {
        const Sample s(values);
        const Statistic stat = use_median ? Statistic([](const Sample& x) { return median(x); })
                                          : Statistic([](const Sample& x) { return mean(x.values()); });
        const auto [lo, hi] =
            bootstrap_ci(s, stat, config.bootstrap, 0.95, derive_seed(block(0xb0075), stream));
        const double v = stat(s);
        report.add({config.experiment, p.str(), name, v, std::min(lo, v), std::max(hi, v), values.size(),
                    config.seed});
    }

    template <typename Fn>
    void replicate(std::size_t count, Fn&& fn) {
        parallel_for(count, config.workers, [&](std::size_t i) {
            deadline.check();
            fn(i);
        });
    }
};

double total_variation_vs_enumeration(const BridgeEnumeration& e, const std::vector<std::uint32_t>& keys) {
    std::map<std::uint32_t, std::size_t> counts;
    for (auto key : keys) ++counts[key];
    const double n = static_cast<double>(keys.size());
    double tv = 0.0;
    for (std::size_t i = 0; i < e.keys.size(); ++i) {
        const auto it = counts.find(e.keys[i]);
        const double freq = it == counts.end() ? 0.0 : static_cast<double>(it->second) / n;
        tv += std::abs(freq - e.probability_double(i));
    }
    for (const auto& [key, count] : counts)
        if (e.find(key) == e.keys.size()) tv += static_cast<double>(count) / n;
    return tv / 2.0;
}

// Exact law of radial[n] / sqrt(2n) from an enumeration.
std::pair<std::vector<double>, std::vector<double>> enumeration_mid_law(const BridgeEnumeration& e) {
    std::map<int, double> mass;
    const auto n = static_cast<int>(e.n);
    for (std::size_t i = 0; i < e.keys.size(); ++i) {
        const int ups = std::popcount(e.keys[i] & ((std::uint32_t{1} << n) - 1));
        mass[2 * ups - n] += e.probability_double(i);
    }
    std::vector<double> support, masses;
    const double scale = std::sqrt(2.0 * n);
    for (const auto& [h, m] : mass) {
        support.push_back(h / scale);
        masses.push_back(m);
    }
    double total = 0.0;
    for (double m : masses) total += m;
    for (double& m : masses) m /= total;
    return {support, masses};
}

void radial_vs_excursion(Context& ctx) {
    const auto& c = ctx.config;
    std::vector<double> reference(c.reference_replicas);
    const RngSeed ref_seed = ctx.block(0);
    const std::size_t mid_index = (c.grid_points - 1) / 2;
    ctx.replicate(reference.size(), [&](std::size_t i) {
        reference[i] = sample_excursion(c.grid_points, derive_seed(ref_seed, i)).values[mid_index];
    });
    const Sample ref(reference);
    for (std::size_t b = 0; b < c.sizes.size(); ++b) {
        const std::size_t n = c.sizes[b] / 2;
        const RadialDP dp(c.k, n, c.memory_limit);
        const RngSeed seed = ctx.block(b + 1);
        const bool exact = n <= kMaxEnumerationN;
        std::vector<double> mid(c.replicas);
        std::vector<std::uint32_t> keys(exact ? c.replicas : 0);
        ctx.replicate(c.replicas, [&](std::size_t i) {
            const WalkBridge w = sample_conditioned_walk(dp, derive_seed(seed, i));
            mid[i] = w.radial[n] / std::sqrt(2.0 * static_cast<double>(n));
            if (exact) keys[i] = radial_key(w.radial);
        });
        Params p;
        p.add("2n", 2 * n).add("k", c.k);
        const Sample m(mid);
        ctx.value(p, "ks_mid_excursion", ks_two_sample(m, ref), c.replicas);
        if (exact) {
            const BridgeEnumeration e = enumerate_bridges(c.k, n);
            const auto [support, masses] = enumeration_mid_law(e);
            ctx.value(p, "ks_mid_enumeration", ks_vs_pmf(m, support, masses), c.replicas);
            ctx.value(p, "tv_enumeration", total_variation_vs_enumeration(e, keys), c.replicas);
        }
    }
}

void gap_distortion(Context& ctx) {
    const auto& c = ctx.config;
    for (std::size_t b = 0; b < c.sizes.size(); ++b) {
        const std::size_t n = c.sizes[b] / 2;
        const RadialDP dp(c.k, n, c.memory_limit);
        const RngSeed seed = ctx.block(b + 1);
        const auto sub = even_subsample(2 * n + 1, c.subsample);
        std::vector<double> gaps(c.replicas);
        ctx.replicate(c.replicas, [&](std::size_t i) {
            gaps[i] = gap_statistic(sample_conditioned_walk(dp, derive_seed(seed, i)), sub);
        });
        Params p;
        p.add("2n", 2 * n).add("k", c.k).add("subsample", sub.size());
        ctx.summary(p, "median_gap", gaps, true, b);
        ctx.summary(p, "mean_gap", gaps, false, 100 + b);
    }
}

double covering_bound(double eta, double N) {
    return 12.0 / eta * std::sqrt(N / std::numbers::pi) * std::exp(-eta * eta * (N - 1.0) / 18.0);
}

void covering_tail(Context& ctx) {
    const auto& c = ctx.config;
    const bool tree = c.model == "tree";
    const std::size_t blocks = tree ? c.sizes.size() : c.horizons.size();
    for (std::size_t b = 0; b < blocks; ++b) {
        const RngSeed seed = ctx.block(b + 1);
        std::vector<double> at_eta(c.replicas), at_half(c.replicas), exceed(c.replicas);
        Params p;
        if (tree) {
            const std::size_t n = c.sizes[b] / 2;
            const RadialDP dp(c.k, n, c.memory_limit);
            const double scale = std::sqrt(2.0 * static_cast<double>(n));
            ctx.replicate(c.replicas, [&](std::size_t i) {
                const WalkBridge w = sample_conditioned_walk(dp, derive_seed(seed, i));
                const RangeTree& t = *w.tree;
                const CoverCount cover = greedy_cover(t.size(), 0, c.eta, [&](std::size_t u, std::size_t v) {
                    return t.distance(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)) / scale;
                });
                at_eta[i] = static_cast<double>(cover.at_eta);
                at_half[i] = static_cast<double>(cover.at_half_eta);
            });
            p.add("2n", 2 * n).add("k", c.k);
        } else {
            require_heat_kernel_gate();
            const double T = c.horizons[b];
            const double scale = std::sqrt(T);
            ctx.replicate(c.replicas, [&](std::size_t i) {
                const BridgePath path = sample_bridge_h3(T, c.levels, derive_seed(seed, i));
                const CoverCount cover = greedy_cover(path.size() - 1, 0, c.eta, [&](std::size_t u, std::size_t v) {
                    return hdist(path.points[u], path.points[v]) / scale;
                });
                at_eta[i] = static_cast<double>(cover.at_eta);
                at_half[i] = static_cast<double>(cover.at_half_eta);
            });
            p.add("T", T).add("levels", c.levels);
        }
        for (std::size_t i = 0; i < c.replicas; ++i)
            exceed[i] = at_eta[i] > static_cast<double>(c.cover_threshold) ? 1.0 : 0.0;
        p.add("eta", c.eta).add("N", c.cover_threshold);
        ctx.summary(p, "freq_exceed", exceed, false, b);
        ctx.value(p, "bound", covering_bound(c.eta, static_cast<double>(c.cover_threshold)), c.replicas);
        ctx.summary(p, "mean_cover_eta", at_eta, false, 100 + b);
        ctx.summary(p, "mean_cover_half_eta", at_half, false, 200 + b);
    }
}

void reroot_law(Context& ctx) {
    const auto& c = ctx.config;
    if (c.model == "tree") {
        for (std::size_t b = 0; b < c.sizes.size(); ++b) {
            const std::size_t n = c.sizes[b] / 2;
            if (n > kMaxEnumerationN) throw InvalidParameter("reroot-law tree model needs 2n <= 16");
            const RadialDP dp(c.k, n, c.memory_limit);
            const RngSeed seed = ctx.block(b + 1);
            std::vector<std::uint32_t> plain(c.replicas), shifted(c.replicas);
            ctx.replicate(c.replicas, [&](std::size_t i) {
                const WalkBridge w = sample_conditioned_walk(dp, derive_seed(seed, i));
                Rng rng(derive_seed(seed, c.replicas + i));
                const auto t = static_cast<std::size_t>(rng.below(2 * n));
                plain[i] = radial_key(w.radial);
                shifted[i] = radial_key(reroot_radial(w, t));
            });
            const BridgeEnumeration e = enumerate_bridges(c.k, n);
            Params p;
            p.add("2n", 2 * n).add("k", c.k);
            ctx.value(p, "tv_enumeration", total_variation_vs_enumeration(e, plain), c.replicas);
            ctx.value(p, "tv_rerooted_enumeration", total_variation_vs_enumeration(e, shifted), c.replicas);
        }
        return;
    }
    if (c.model == "excursion") {
        const RngSeed seed = ctx.block(1);
        std::vector<double> original(c.replicas), rerooted(c.replicas);
        ctx.replicate(c.replicas, [&](std::size_t i) {
            const Path e1 = sample_excursion(c.grid_points, derive_seed(seed, 2 * i));
            original[i] = *std::max_element(e1.values.begin(), e1.values.end());
            const CodedTree t = CodedTree::from_excursion(sample_excursion(c.grid_points, derive_seed(seed, 2 * i + 1)));
            Rng rng(derive_seed(seed, 2 * c.replicas + i));
            const CodedTree r = reroot_excursion(t, static_cast<std::size_t>(rng.below(c.grid_points - 1)));
            rerooted[i] = *std::max_element(r.values().begin(), r.values().end());
        });
        Params p;
        p.add("grid", c.grid_points);
        ctx.value(p, "ks_max_height", ks_two_sample(Sample(original), Sample(rerooted)), c.replicas);
        ctx.summary(p, "median_max_original", original, true, 1);
        ctx.summary(p, "median_max_rerooted", rerooted, true, 2);
        return;
    }
    require_heat_kernel_gate();
    for (std::size_t b = 0; b < c.horizons.size(); ++b) {
        const double T = c.horizons[b];
        const RngSeed seed = ctx.block(b + 1);
        std::vector<double> original(c.replicas), rerooted(c.replicas);
        ctx.replicate(c.replicas, [&](std::size_t i) {
            const auto r1 = sample_bridge_h3(T, c.levels, derive_seed(seed, 2 * i)).radial_values();
            original[i] = *std::max_element(r1.begin(), r1.end());
            const BridgePath other = sample_bridge_h3(T, c.levels, derive_seed(seed, 2 * i + 1));
            Rng rng(derive_seed(seed, 2 * c.replicas + i));
            const auto r2 =
                reroot_bridge_at_index(other, static_cast<std::size_t>(rng.below(other.size() - 1))).radial_values();
            rerooted[i] = *std::max_element(r2.begin(), r2.end());
        });
        Params p;
        p.add("T", T).add("levels", c.levels);
        ctx.value(p, "ks_max_radial", ks_two_sample(Sample(original), Sample(rerooted)), c.replicas);
        ctx.summary(p, "median_max_original", original, true, 10 * b + 1);
        ctx.summary(p, "median_max_rerooted", rerooted, true, 10 * b + 2);
    }
}

void geodesic_avoidance(Context& ctx) {
    const auto& c = ctx.config;
    require_heat_kernel_gate();
    for (std::size_t b = 0; b < c.horizons.size(); ++b) {
        const double T = c.horizons[b];
        const RngSeed seed = ctx.block(b + 1);
        std::vector<double> stat(c.replicas);
        ctx.replicate(c.replicas, [&](std::size_t i) {
            const BridgePath path = sample_bridge_h3(T, c.levels, derive_seed(seed, i));
            Rng rng(derive_seed(seed, c.replicas + i));
            std::vector<std::pair<std::size_t, std::size_t>> pairs(c.pairs);
            for (auto& pr : pairs) {
                const auto s = static_cast<std::size_t>(rng.below(path.size()));
                const auto t = static_cast<std::size_t>(rng.below(path.size()));
                pr = {std::min(s, t), std::max(s, t)};
            }
            stat[i] = geodesic_avoidance_stat(path, pairs, c.probes) / std::sqrt(T);
        });
        Params p;
        p.add("T", T).add("levels", c.levels).add("pairs", c.pairs).add("probes", c.probes);
        ctx.summary(p, "median_avoidance", stat, true, b);
        ctx.summary(p, "mean_avoidance", stat, false, 100 + b);
    }
}

double maxwell_cdf(double x) {
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return std::erf(x / std::numbers::sqrt2) - std::sqrt(2.0 / std::numbers::pi) * x * std::exp(-x * x / 2.0);
}

void loop_radial(Context& ctx) {
    const auto& c = ctx.config;
    require_loop_gate();
    const std::size_t steps = c.grid_points;
    const auto last = static_cast<std::ptrdiff_t>(steps);
    std::vector<double> reference_sup(c.replicas);
    const RngSeed ref_seed = ctx.block(0);
    ctx.replicate(c.replicas, [&](std::size_t i) {
        const TwoSidedPath x = sample_two_sided_X(steps, 1.0, derive_seed(ref_seed, i));
        reference_sup[i] = std::max(*std::max_element(x.forward.values.begin(), x.forward.values.end()),
                                    *std::max_element(x.backward.values.begin(), x.backward.values.end()));
    });
    const Sample ref_sup(reference_sup);
    for (std::size_t b = 0; b < c.scales.size(); ++b) {
        const double a = c.scales[b];
        const RngSeed seed = ctx.block(b + 1);
        std::vector<double> plus(c.replicas), minus(c.replicas), sup(c.replicas);
        ctx.replicate(c.replicas, [&](std::size_t i) {
            const LoopPath loop = sample_infinite_loop_h3(steps, 1.0 / (a * a), derive_seed(seed, i));
            plus[i] = a * loop.rho(last);
            minus[i] = a * loop.rho(-last);
            double m = 0.0;
            for (std::ptrdiff_t j = -last; j <= last; ++j) m = std::max(m, loop.rho(j));
            sup[i] = a * m;
        });
        Params p;
        p.add("a", a).add("steps", steps);
        ctx.value(p, "ks_plus_maxwell", ks_vs_cdf(Sample(plus), maxwell_cdf), c.replicas);
        ctx.value(p, "ks_minus_maxwell", ks_vs_cdf(Sample(minus), maxwell_cdf), c.replicas);
        ctx.value(p, "ks_sup_vs_X", ks_two_sample(Sample(sup), ref_sup), c.replicas);
    }
}

void loop_dx(Context& ctx) {
    const auto& c = ctx.config;
    require_loop_gate();
    const std::size_t steps = c.grid_points;
    const auto per_side = std::min<std::size_t>(c.subsample / 2, steps);
    std::vector<std::ptrdiff_t> sub;
    for (std::size_t j = 0; j <= per_side; ++j) {
        const auto idx = static_cast<std::ptrdiff_t>(std::llround(static_cast<double>(j) * static_cast<double>(steps) /
                                                                  static_cast<double>(per_side)));
        sub.push_back(idx);
        if (idx != 0) sub.push_back(-idx);
    }
    std::sort(sub.begin(), sub.end());
    sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
    for (std::size_t b = 0; b < c.scales.size(); ++b) {
        const double a = c.scales[b];
        const RngSeed seed = ctx.block(b + 1);
        std::vector<double> distortion(c.replicas), truncated(c.replicas);
        ctx.replicate(c.replicas, [&](std::size_t i) {
            const LoopPath loop = sample_infinite_loop_h3(steps, c.window / (a * a), derive_seed(seed, i));
            TwoSidedPath scaled = loop.radial;
            for (Path* half : {&scaled.forward, &scaled.backward}) {
                for (double& v : half->values) v *= a;
                for (double& t : half->times) t *= a * a;
            }
            const CodedTree tree = CodedTree::from_two_sided(scaled);
            double worst = 0.0;
            std::size_t flagged = 0, total = 0;
            for (std::size_t u = 0; u < sub.size(); ++u)
                for (std::size_t v = u + 1; v < sub.size(); ++v) {
                    ++total;
                    const TwoSidedDistance dx = two_sided_distance(tree, sub[u], sub[v]);
                    if (dx.truncated) {
                        ++flagged;
                        continue;
                    }
                    worst = std::max(worst, std::abs(a * loop.distance(sub[u], sub[v]) - dx.value));
                }
            distortion[i] = worst;
            truncated[i] = static_cast<double>(flagged) / static_cast<double>(std::max<std::size_t>(total, 1));
        });
        Params p;
        p.add("a", a).add("window", c.window).add("steps", steps).add("points", sub.size());
        ctx.summary(p, "median_distortion", distortion, true, b);
        ctx.summary(p, "truncated_fraction", truncated, false, 100 + b);
    }
}

void bessel_coupling(Context& ctx) {
    const auto& c = ctx.config;
    const DriftFunction g = h3_loop_drift;
    for (std::size_t b = 0; b < c.steps.size(); ++b) {
        const double step = c.steps[b];
        const SdeGrid grid{c.sde_horizon, step};
        const RngSeed seed = ctx.block(b + 1);
        std::vector<double> below(c.replicas), min_diff(c.replicas), end_diff(c.replicas);
        std::size_t points = 0;
        ctx.replicate(c.replicas, [&](std::size_t i) {
            const auto [y, z] = coupled_Y_vs_squared_bessel(g, 1.0, 0.0, 0.0, grid, derive_seed(seed, i));
            const double margin = 10.0 * std::sqrt(step);
            std::size_t count = 0;
            double low = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j) {
                if (y.values[j] < z.values[j] - margin) ++count;
                low = std::min(low, y.values[j] - z.values[j]);
            }
            below[i] = static_cast<double>(count);
            min_diff[i] = low;
            end_diff[i] = y.values.back() - z.values.back();
        });
        points = grid.steps() + 1;
        double total_below = 0.0, lowest = 0.0;
        for (std::size_t i = 0; i < c.replicas; ++i) {
            total_below += below[i];
            lowest = std::min(lowest, min_diff[i]);
        }
        Params p;
        p.add("step", step).add("horizon", c.sde_horizon).add("g", std::string("1")).add("dim", std::string("1"));
        ctx.value(p, "fraction_below", total_below / static_cast<double>(points * c.replicas), c.replicas);
        ctx.value(p, "min_difference", lowest, c.replicas);
        ctx.summary(p, "mean_end_difference", end_diff, false, b);
    }
}

void ball_containment(Context& ctx) {
    const auto& c = ctx.config;
    const double a_max = *std::max_element(c.windows.begin(), c.windows.end());
    for (std::size_t b = 0; b < c.scales.size(); ++b) {
        const double a = c.scales[b];
        const double horizon = a_max / (a * a);
        const RngSeed seed = ctx.block(b + 1);
        // hit[w][i]: whether inf over |t| > A_w of a rho(t / a^2) is <= r.
        std::vector<std::vector<double>> hit(c.windows.size(), std::vector<double>(c.replicas));
        ctx.replicate(c.replicas, [&](std::size_t i) {
            const TwoSidedPath x = sample_two_sided_X(c.grid_points, horizon, derive_seed(seed, i));
            Rng tail(derive_seed(seed, c.replicas + i));
            for (const Path* half : {&x.forward, &x.backward}) {
                // Beyond the window the future infimum of a Bessel-3 process
                // started at x is uniform on [0, x].
                double running = tail.uniform() * half->values.back();
                std::vector<double> suffix_min(half->size());
                for (std::size_t j = half->size(); j-- > 0;) {
                    running = std::min(running, half->values[j]);
                    suffix_min[j] = running;
                }
                for (std::size_t w = 0; w < c.windows.size(); ++w) {
                    const double t = c.windows[w] / (a * a);
                    const auto first = static_cast<std::size_t>(
                        std::ceil(t / horizon * static_cast<double>(c.grid_points) - 1e-9));
                    const double inf = a * suffix_min[std::min(first, half->size() - 1)];
                    if (inf <= c.radius) hit[w][i] = 1.0;
                }
            }
        });
        for (std::size_t w = 0; w < c.windows.size(); ++w) {
            Params p;
            p.add("A", c.windows[w]).add("a", a).add("r", c.radius).add("steps", c.grid_points);
            ctx.summary(p, "probability", hit[w], false, 10 * b + w);
        }
    }
}

using Runner = void (*)(Context&);

const std::vector<std::pair<std::string, Runner>>& registry() {
    static const std::vector<std::pair<std::string, Runner>> entries{
        {"radial-vs-excursion", radial_vs_excursion},
        {"gap-distortion", gap_distortion},
        {"covering-tail", covering_tail},
        {"reroot-law", reroot_law},
        {"geodesic-avoidance", geodesic_avoidance},
        {"loop-radial", loop_radial},
        {"loop-dx", loop_dx},
        {"bessel-coupling", bessel_coupling},
        {"ball-containment", ball_containment},
    };
    return entries;
}

template <typename T>
void default_list(std::vector<T>& list, std::initializer_list<T> values) {
    if (list.empty()) list = values;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw InvalidParameter(message);
}

void require_model(const ExperimentConfig& c, std::initializer_list<const char*> allowed) {
    for (const char* m : allowed)
        if (c.model == m) return;
    std::string list;
    for (const char* m : allowed) list += std::string(list.empty() ? "" : ", ") + m;
    throw InvalidParameter("experiment " + c.experiment + " supports models: " + list);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, fn] : registry()) out.push_back(name);
        return out;
    }();
    return names;
}

ExperimentConfig resolve(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end())
        throw UnknownExperiment("unknown experiment '" + c.experiment + "'");
    if (c.model == "tree-walk") c.model = "tree";
    if (c.model == "hyperbolic-3") c.model = "hyperbolic";
    const std::string& e = c.experiment;
    if (e == "radial-vs-excursion") {
        if (c.model.empty()) c.model = "tree";
        require_model(c, {"tree"});
        default_list<std::size_t>(c.sizes, {64, 256, 1024, 4096});
        if (c.grid_points == 0) c.grid_points = 16385;
        if (c.reference_replicas == 0) c.reference_replicas = 10 * c.replicas;
        require(c.grid_points >= 3 && c.grid_points % 2 == 1, "grid_points must be odd and >= 3");
    } else if (e == "gap-distortion") {
        if (c.model.empty()) c.model = "tree";
        require_model(c, {"tree"});
        default_list<std::size_t>(c.sizes, {256, 1024, 4096, 16384});
    } else if (e == "covering-tail") {
        if (c.model.empty()) c.model = "tree";
        require_model(c, {"tree", "hyperbolic"});
        default_list<std::size_t>(c.sizes, {4096});
        default_list<double>(c.horizons, {16.0});
        if (c.levels == 0) c.levels = 8;
    } else if (e == "reroot-law") {
        if (c.model.empty()) c.model = "hyperbolic";
        require_model(c, {"hyperbolic", "tree", "excursion"});
        default_list<double>(c.horizons, {16.0});
        default_list<std::size_t>(c.sizes, {8});
        if (c.levels == 0) c.levels = 8;
        if (c.grid_points == 0) c.grid_points = 2049;
    } else if (e == "geodesic-avoidance") {
        if (c.model.empty()) c.model = "hyperbolic";
        require_model(c, {"hyperbolic"});
        default_list<double>(c.horizons, {16.0, 32.0, 64.0, 128.0});
        if (c.levels == 0) c.levels = 10;
    } else if (e == "loop-radial") {
        if (c.model.empty()) c.model = "loop";
        require_model(c, {"loop"});
        default_list<double>(c.scales, {1.0, 0.5, 0.25, 0.1});
        if (c.grid_points == 0) c.grid_points = 1024;
    } else if (e == "loop-dx") {
        if (c.model.empty()) c.model = "loop";
        require_model(c, {"loop"});
        default_list<double>(c.scales, {0.5, 0.25, 0.125});
        if (c.grid_points == 0) c.grid_points = 2048;
        require(c.window > 0.0, "window must be positive");
    } else if (e == "bessel-coupling") {
        if (c.model.empty()) c.model = "loop";
        require_model(c, {"loop"});
        default_list<double>(c.steps, {1e-2, 1e-3, 1e-4});
        require(c.sde_horizon > 0.0, "sde_horizon must be positive");
        for (double s : c.steps) require(s > 0.0, "SDE steps must be positive");
    } else if (e == "ball-containment") {
        if (c.model.empty()) c.model = "loop";
        require_model(c, {"loop"});
        default_list<double>(c.scales, {0.1});
        default_list<double>(c.windows, {1.0, 2.0, 4.0, 8.0});
        if (c.grid_points == 0) c.grid_points = 8192;
        for (double w : c.windows) require(w > 0.0, "windows must be positive");
    }
    require(c.k >= 3, "k must be at least 3");
    for (std::size_t s : c.sizes) require(s >= 2 && s % 2 == 0, "walk sizes 2n must be even and >= 2");
    for (double t : c.horizons) require(t > 0.0 && std::isfinite(t), "horizons must be positive");
    for (double a : c.scales) require(a > 0.0 && std::isfinite(a), "scales must be positive");
    require(c.subsample >= 1, "subsample must be positive");
    require(c.eta > 0.0, "eta must be positive");
    require(c.bootstrap >= 100, "bootstrap replicas must be at least 100");
    require(c.time_limit >= 0.0, "time limit must be non-negative");
    return c;
}

Report run_experiment(const ExperimentConfig& config) {
    const ExperimentConfig c = resolve(config);
    Context ctx{c, Deadline(c.time_limit), {}};
    if (c.replicas == 0) return ctx.report;
    for (const auto& [name, fn] : registry())
        if (name == c.experiment) fn(ctx);
    return ctx.report;
}

Report run(const ExperimentConfig& config) {
    const Report report = run_experiment(config);
    std::string dir = config.out_dir;
    if (const char* env = std::getenv("CRTLAB_OUT"); env && *env) dir = env;
    save_report(report, dir, config.experiment);
    return report;
}

}  // namespace crt
