#pragma once

#include "freqlab/noise.hpp"

namespace freqlab {

/// Ornstein-Uhlenbeck load process dη = (μ − αη)dt + b dW.
struct OuParams {
  double mu = 0.0;     ///< drift offset (pu/s)
  double alpha = 0.5;  ///< mean-reversion rate (1/s)
  double b = 1.0;      ///< noise intensity (pu/√s)
  double eta0 = 0.0;   ///< initial value (pu)

  /// Throws InvalidArgument unless alpha > 0, b ≥ 0 and all fields finite.
  void validate() const;
  double equilibrium() const noexcept { return mu / alpha; }
  bool operator==(const OuParams&) const = default;
};

struct OuMoments {
  double mean;
  double var;
};

/// Exact transition: μ/α + (η − μ/α)e^{−αdt} + b·sqrt((1 − e^{−2αdt})/(2α))·ξ.
double ou_exact_step(double eta, const OuParams& p, double dt, NoiseStream& stream);

OuMoments ou_moments(double t, const OuParams& p);

/// Precomputed exact-step coefficients for a fixed dt; the hot loop of the
/// grid model uses this instead of re-evaluating exponentials every step.
class OuStepper {
 public:
  OuStepper(const OuParams& p, double dt);
  double step(double eta, NoiseStream& stream) const noexcept {
    const auto draw = gaussian(stream);
    stream = draw.next;
    return mean_ + (eta - mean_) * decay_ + scale_ * draw.value;
  }

 private:
  double mean_;
  double decay_;
  double scale_;
};

}  // namespace freqlab
