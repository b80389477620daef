#include "freqlab/ou.hpp"

#include <cmath>
#include <string>

#include "freqlab/errors.hpp"

namespace freqlab {

void OuParams::validate() const {
  if (!std::isfinite(mu) || !std::isfinite(alpha) || !std::isfinite(b) || !std::isfinite(eta0))
    throw InvalidArgument("OU parameters must be finite");
  if (!(alpha > 0.0)) throw InvalidArgument("OU alpha must be > 0, got " + std::to_string(alpha));
  if (b < 0.0) throw InvalidArgument("OU noise intensity b must be >= 0, got " + std::to_string(b));
}

namespace {

// (1 − e^{−2αdt})/(2α) without cancellation for small αdt.
double transition_variance_factor(double alpha, double dt) {
  return -std::expm1(-2.0 * alpha * dt) / (2.0 * alpha);
}

}  // namespace

double ou_exact_step(double eta, const OuParams& p, double dt, NoiseStream& stream) {
  if (!(dt > 0.0)) throw InvalidArgument("ou_exact_step: dt must be > 0");
  p.validate();
  const double m = p.equilibrium();
  const auto draw = gaussian(stream);
  stream = draw.next;
  return m + (eta - m) * std::exp(-p.alpha * dt) +
         p.b * std::sqrt(transition_variance_factor(p.alpha, dt)) * draw.value;
}

OuMoments ou_moments(double t, const OuParams& p) {
  if (t < 0.0) throw InvalidArgument("ou_moments: t must be >= 0");
  p.validate();
  const double m = p.equilibrium();
  return {m + (p.eta0 - m) * std::exp(-p.alpha * t),
          p.b * p.b * transition_variance_factor(p.alpha, t)};
}

OuStepper::OuStepper(const OuParams& p, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("OuStepper: dt must be > 0");
  p.validate();
  mean_ = p.equilibrium();
  decay_ = std::exp(-p.alpha * dt);
  scale_ = p.b * std::sqrt(transition_variance_factor(p.alpha, dt));
}

}  // namespace freqlab
