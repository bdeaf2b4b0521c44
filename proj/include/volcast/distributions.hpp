#pragma once

namespace volcast::dist {

double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate far into the tail.
double normal_sf(double x);
double normal_quantile(double p);
/// Upper tail of the chi-square law with `dof` degrees of freedom.
double chi2_sf(double x, double dof);
double chi2_quantile(double p, double dof);
/// Upper tail of Student's t.
double student_t_sf(double x, double dof);

}  // namespace volcast::dist
