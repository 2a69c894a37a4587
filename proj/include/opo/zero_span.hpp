#ifndef OPO_ZERO_SPAN_HPP
#define OPO_ZERO_SPAN_HPP

#include <Eigen/Dense>

#include "opo/detection.hpp"

namespace opo {

/// SNL power for a given DC monitor level. The proportionality constant is a
/// calibration input; with the default the reference equals the DC level.
double shot_noise_reference(double dc_level, double calibration = 1.0);

/// Zero-span processing of one photocurrent trace: complex heterodyne at
/// nu_center, one-pole band filter of noise-equivalent bandwidth rbw, power
/// detection, one-pole video filter at vbw, then a causal running average of
/// avg_count points. The output is normalized so that a measured shot-noise
/// reference trace (optical shot noise plus the chain's electronic floor)
/// reads 1 SNU.
Eigen::ArrayXd zero_span_analyze(const Eigen::ArrayXd& trace, double sample_rate,
                                 const DetectionChain& chain);

/// Samples to discard before the band and video filters have settled.
Eigen::Index zero_span_warmup_samples(const DetectionChain& chain,
                                      double sample_rate);

/// Mean of the steady-state part of a zero-span series.
double zero_span_mean(const Eigen::ArrayXd& snu_series, Eigen::Index warmup);

/// Standard error of a zero-span variance estimate; the effective number of
/// independent power samples is 2 * duration * rbw.
double zero_span_standard_error(double value_snu, double duration, double rbw);

}  // namespace opo

#endif  // OPO_ZERO_SPAN_HPP
