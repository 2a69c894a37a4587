#include "opo/random.hpp"

#include <cmath>

namespace opo {

namespace {

// splitmix64 finalizer; decorrelates consecutive tags.
std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream_tag) {
    return mix(mix(seed) ^ mix(stream_tag * 0xda942042e4dd58b5ULL + 1));
}

GaussianStream::GaussianStream(std::uint64_t seed, std::uint64_t stream_tag)
    : engine_(derive_stream_seed(seed, stream_tag)) {}

double GaussianStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; the open interval keeps log() finite.
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double inv = 1.0 / 18446744073709551616.0;  // 2^-64
    double u1 = (static_cast<double>(engine_()) + 0.5) * inv;
    double u2 = (static_cast<double>(engine_()) + 0.5) * inv;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(two_pi * u2);
    has_spare_ = true;
    return radius * std::cos(two_pi * u2);
}

Eigen::ArrayXd GaussianStream::samples(Eigen::Index n) {
    Eigen::ArrayXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = next();
    return out;
}

}  // namespace opo
