#pragma once

#include <cstdint>
#include <vector>

namespace alseg::eval {

double mean(const std::vector<double>& v);
// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
double stddev(const std::vector<double>& v);

// Two-sided paired permutation test on the mean difference via random sign
// flips: p = (1 + #{|T_perm| >= |T_obs|}) / (n_perm + 1).
double paired_permutation_test(const std::vector<double>& a,
                               const std::vector<double>& b, int n_perm,
                               std::uint64_t seed);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// Chi-square CDF and quantile (quantile via bisection on the CDF).
double chi_square_cdf(double x, double dof);
double chi_square_quantile(double p, double dof);

// Half-width of the normal-approximation 95% confidence interval of the
// mean: 1.96 * sd / sqrt(n). Zero for n < 2.
double ci95_half_width(const std::vector<double>& v);

}  // namespace alseg::eval
