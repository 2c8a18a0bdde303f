#pragma once

#include "mlpsel/mlp.hpp"

namespace mlpsel {

/// Median of the values (average of the two middle ones for even sizes).
double median(Vector values);

/// 1.4826 * median(|r - median(r)|): consistent estimate of a Gaussian sigma.
double mad_scale(const Vector& residuals);

/// MAD scale, or, when more than half the residuals coincide (MAD = 0),
/// sqrt(pi/2) * mean(|r - median(r)|), also consistent for a Gaussian sigma.
/// Zero only when all residuals are equal.
double robust_scale(const Vector& residuals);

/// Lower-tail quantile of the chi-squared distribution:
/// P(X <= q) = probability for X ~ chi2(degrees_of_freedom).
double chi_squared_quantile(double probability, double degrees_of_freedom);

/// Sample variance with divisor n - 1 (two-pass).
double sample_variance(const Eigen::Ref<const Vector>& values);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd mean_std(const Eigen::Ref<const Vector>& values);

}  // namespace mlpsel
