#include "crtlab/rng.hpp"

namespace crt {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngSeed derive_seed(RngSeed base, std::uint64_t stream) noexcept {
    return RngSeed{mix64(base.value ^ mix64(stream + 0x632be59bd9b4e019ULL))};
}

}  // namespace crt
