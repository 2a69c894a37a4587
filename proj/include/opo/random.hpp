#ifndef OPO_RANDOM_HPP
#define OPO_RANDOM_HPP

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace opo {

/// Mixes a base seed with a stream tag so that every logical noise stream
/// (difference mode, sum mode, detector electronics, vacuum ports, ...)
/// draws from its own deterministic substream.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream_tag);

/// Standard-normal sampler over a named substream. Box-Muller on top of
/// mt19937_64 keeps the byte stream identical across standard libraries,
/// which std::normal_distribution does not guarantee.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream_tag);

    double next();

    /// Fills an array with iid N(0, 1) samples.
    Eigen::ArrayXd samples(Eigen::Index n);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace opo

#endif  // OPO_RANDOM_HPP
