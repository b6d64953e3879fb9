#include "coinfer/rate_distortion.hpp"

#include <cmath>
#include <stdexcept>

namespace coinfer {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) {
    throw std::invalid_argument(std::string(name) + " must be positive");
  }
}

}  // namespace

double d_lower(double rate, double lambda) {
  require_positive(lambda, "lambda");
  if (rate < 0.0) throw std::invalid_argument("rate must be non-negative");
  return 1.0 / (lambda * std::exp2(rate + 1.0));
}

double r_lower(double distortion, double lambda) {
  require_positive(distortion, "distortion");
  require_positive(lambda, "lambda");
  const double r = -std::log2(2.0 * lambda * distortion);
  return r > 0.0 ? r : 0.0;
}

double r_upper(double distortion, double lambda) {
  require_positive(distortion, "distortion");
  require_positive(lambda, "lambda");
  const double u = lambda * distortion;
  return std::log2(1.0 / u + u / (u + 1.0));
}

double d_upper(double rate, double lambda) {
  require_positive(lambda, "lambda");
  if (!(rate > 0.0)) {
    throw std::domain_error("d_upper has a pole at rate 0; rate must be positive");
  }
  constexpr double ln2 = 0.69314718055994530941723212145818;
  const double x = 4.0 / std::expm1(rate * ln2);
  // sqrt(1+x) - 1 written cancellation-free so the high-rate tail keeps full
  // relative precision.
  return x / ((std::sqrt(1.0 + x) + 1.0) * 2.0 * lambda);
}

double expected_abs_sum(double lambda, double d) {
  require_positive(lambda, "lambda");
  require_positive(d, "d");
  const double u = lambda * d;
  return 1.0 / lambda + d * u / (u + 1.0);
}

double laplacian_entropy(double d) {
  require_positive(d, "d");
  constexpr double e = 2.718281828459045235360287471353;
  return std::log2(2.0 * e * d);
}

std::string to_string(RdProvenance p) {
  switch (p) {
    case RdProvenance::LowerBound: return "lower_bound";
    case RdProvenance::UpperBound: return "upper_bound";
    case RdProvenance::BlahutArimoto: return "blahut_arimoto";
  }
  return "unknown";
}

}  // namespace coinfer
