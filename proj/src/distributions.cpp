#include "volcast/distributions.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "volcast/error.hpp"

namespace volcast::dist {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidConfig, "quantile level outside (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double chi2_sf(double x, double dof) {
  if (!(dof > 0.0)) throw Error(ErrorCode::InvalidConfig, "chi-square dof must be > 0");
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

double chi2_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidConfig, "quantile level outside (0,1)");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
}

double student_t_sf(double x, double dof) {
  if (!(dof > 0.0)) throw Error(ErrorCode::InvalidConfig, "t dof must be > 0");
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<double>(dof), x));
}

}  // namespace volcast::dist
