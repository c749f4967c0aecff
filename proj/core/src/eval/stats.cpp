#include "alseg/eval/stats.hpp"

#include <cmath>
#include <stdexcept>

#include "alseg/rng.hpp"

namespace alseg::eval {

double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean of empty set");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double paired_permutation_test(const std::vector<double>& a,
                               const std::vector<double>& b, int n_perm,
                               std::uint64_t seed) {
  if (a.size() != b.size())
    throw std::invalid_argument("paired test: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("paired test: need >= 2 pairs");
  if (n_perm < 1) throw std::invalid_argument("paired test: n_perm < 1");

  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];

  double t_obs = 0.0;
  for (double x : d) t_obs += x;
  t_obs = std::abs(t_obs / static_cast<double>(n));

  Rng rng(seed);
  int count = 0;
  for (int p = 0; p < n_perm; ++p) {
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      t += (rng.next_u64() & 1ull) ? d[i] : -d[i];
    if (std::abs(t / static_cast<double>(n)) >= t_obs) ++count;
  }
  return (1.0 + count) / (static_cast<double>(n_perm) + 1.0);
}

namespace {

// Regularized lower incomplete gamma, series for x < a+1, continued
// fraction otherwise.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_p domain");
  if (x == 0.0) return 0.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double chi_square_cdf(double x, double dof) {
  if (x <= 0.0) return 0.0;
  return gamma_p(dof / 2.0, x / 2.0);
}

double chi_square_quantile(double p, double dof) {
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("quantile p in (0,1)");
  double lo = 0.0, hi = dof + 10.0;
  while (chi_square_cdf(hi, dof) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi_square_cdf(mid, dof) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double ci95_half_width(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  return 1.96 * stddev(v) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace alseg::eval
