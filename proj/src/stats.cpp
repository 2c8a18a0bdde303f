#include "mlpsel/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mlpsel {

double median(Vector v) {
  if (v.size() == 0) throw std::invalid_argument("median of an empty vector");
  const auto n = static_cast<std::size_t>(v.size());
  double* data = v.data();
  std::nth_element(data, data + n / 2, data + n);
  const double upper = data[n / 2];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(data, data + n / 2);
  return 0.5 * (lower + upper);
}

double mad_scale(const Vector& r) {
  const double m = median(r);
  return 1.4826 * median((r.array() - m).abs().matrix());
}

double robust_scale(const Vector& r) {
  const double m = median(r);
  const Vector dev = (r.array() - m).abs().matrix();
  const double mad = 1.4826 * median(dev);
  if (mad > 0.0) return mad;
  return std::sqrt(std::numbers::pi / 2.0) * dev.mean();
}

double chi_squared_quantile(double probability, double dof) {
  if (!(probability > 0.0 && probability < 1.0)) {
    throw std::invalid_argument("chi-squared quantile needs a probability in (0, 1)");
  }
  if (!(dof > 0.0)) throw std::invalid_argument("chi-squared quantile needs positive degrees of freedom");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), probability);
}

double sample_variance(const Eigen::Ref<const Vector>& v) {
  const Index n = v.size();
  if (n < 2) throw std::invalid_argument("sample variance needs at least two values");
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(n - 1);
}

MeanStd mean_std(const Eigen::Ref<const Vector>& v) {
  if (v.size() == 0) throw std::invalid_argument("mean_std of an empty vector");
  const double mean = v.mean();
  const double var = (v.array() - mean).square().sum() / static_cast<double>(v.size());
  return {mean, std::sqrt(var)};
}

}  // namespace mlpsel
