#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcs/error.hpp"
#include "dcs/evalstats.hpp"

namespace dcs {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("correlation inputs differ in length");
  if (x.size() < 3) throw ValidationError("correlation needs at least 3 observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("correlation undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("correlation inputs differ in length");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

std::vector<double> standardize(std::span<const double> x) {
  if (x.size() < 2) throw ValidationError("standardize needs at least 2 values");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  // sample standard deviation (ddof = 1)
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) throw ValidationError("cannot standardize a constant series");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
  return out;
}

int default_newey_west_lag(std::size_t n) {
  return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

RegressionReport ols_newey_west(std::span<const double> y, std::span<const double> x,
                                std::optional<int> lag) {
  if (x.size() != y.size()) throw ValidationError("regression inputs differ in length");
  if (x.size() < 3) throw ValidationError("regression needs at least 3 observations");
  const std::size_t n = x.size();
  const int L = lag.value_or(default_newey_west_lag(n));
  if (L < 0) throw ValidationError("Newey-West lag must be non-negative");
  if (static_cast<std::size_t>(L) >= n) throw ValidationError("Newey-West lag must be below n");
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }))
    throw ValidationError("singular design: regressor is constant");

  const double nd = static_cast<double>(n);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nd;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nd;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  RegressionReport r;
  r.n = n;
  r.nw_lag = L;
  r.beta = sxy / sxx;
  r.intercept = my - r.beta * mx;

  std::vector<double> e(n);
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = y[i] - r.intercept - r.beta * x[i];
    ssr += e[i] * e[i];
  }
  r.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 0.0;

  // meat S = sum_j w_j sum_t e_t e_{t-j} (x_t x_{t-j}' + x_{t-j} x_t'), regressor rows (1, x)
  double s00 = 0.0, s01 = 0.0, s11 = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double ee = e[t] * e[t];
    s00 += ee;
    s01 += ee * x[t];
    s11 += ee * x[t] * x[t];
  }
  for (int j = 1; j <= L; ++j) {
    const double w = 1.0 - static_cast<double>(j) / static_cast<double>(L + 1);
    double g00 = 0.0, g01 = 0.0, g10 = 0.0, g11 = 0.0;
    for (std::size_t t = static_cast<std::size_t>(j); t < n; ++t) {
      const double ee = e[t] * e[t - static_cast<std::size_t>(j)];
      const double xl = x[t - static_cast<std::size_t>(j)];
      g00 += ee;
      g01 += ee * xl;    // x_t[0] * x_{t-j}[1]
      g10 += ee * x[t];  // x_t[1] * x_{t-j}[0]
      g11 += ee * x[t] * xl;
    }
    s00 += w * 2.0 * g00;
    s01 += w * (g01 + g10);
    s11 += w * 2.0 * g11;
  }

  // bread (X'X)^{-1}
  double a00 = nd, a01 = 0.0, a11 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a01 += x[i];
    a11 += x[i] * x[i];
  }
  const double det = a00 * a11 - a01 * a01;
  if (!(det > 0.0)) throw ValidationError("singular design matrix");
  const double b00 = a11 / det, b01 = -a01 / det, b11 = a00 / det;
  // V = B S B
  const double bs00 = b00 * s00 + b01 * s01, bs01 = b00 * s01 + b01 * s11;
  const double bs10 = b01 * s00 + b11 * s01, bs11 = b01 * s01 + b11 * s11;
  const double v00 = bs00 * b00 + bs01 * b01;
  const double v11 = bs10 * b01 + bs11 * b11;

  r.se_intercept_nw = std::sqrt(std::max(v00, 0.0));
  r.se_beta_nw = std::sqrt(std::max(v11, 0.0));
  auto two_sided = [](double est, double se) {
    if (!(se > 0.0)) return est == 0.0 ? 1.0 : 0.0;
    return std::erfc(std::abs(est / se) / std::sqrt(2.0));
  };
  r.p_value = two_sided(r.beta, r.se_beta_nw);
  r.p_value_intercept = two_sided(r.intercept, r.se_intercept_nw);
  return r;
}

}  // namespace dcs
