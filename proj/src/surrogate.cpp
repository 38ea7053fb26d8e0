// SPDX-License-Identifier: Apache-2.0
#include "vempc/surrogate.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace vempc {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr int kGridPoints = 1000000;

double relu(double x) { return x > 0.0 ? x : 0.0; }
}  // namespace

Surrogate chebyshev_fit(int ell, double B) {
  if (ell < 1) throw ConfigError("surrogate.degree must be >= 1");
  if (!(B > 0.0)) throw ConfigError("surrogate.domain_bound must be > 0");

  // Interpolate [gamma]_+ at the ell+1 first-kind Chebyshev nodes on [-1, 1].
  const int npts = ell + 1;
  Vec nodes(npts), values(npts);
  for (int i = 0; i < npts; ++i) {
    nodes(i) = std::cos(kPi * (2 * i + 1) / (2.0 * npts));
    values(i) = relu(nodes(i));
  }
  Mat V(npts, npts);
  for (int i = 0; i < npts; ++i) {
    double t = 1.0;
    for (int k = 0; k < npts; ++k) {
      V(i, k) = t;
      t *= nodes(i);
    }
  }
  Vec c = V.fullPivLu().solve(values);

  // Center the error band: shift c_0 by the midpoint of the grid-measured
  // error range, halving the uniform error of the raw interpolant.
  auto error_range = [&](const Vec& coef) {
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i <= kGridPoints; ++i) {
      const double x = -1.0 + 2.0 * double(i) / kGridPoints;
      double h = coef(npts - 1);
      for (int k = npts - 2; k >= 0; --k) h = h * x + coef(k);
      const double e = h - relu(x);
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    return std::make_pair(lo, hi);
  };
  const auto [lo, hi] = error_range(c);
  c(0) -= 0.5 * (lo + hi);
  const auto [lo2, hi2] = error_range(c);
  const double delta_unit = std::max(std::abs(lo2), std::abs(hi2));

  Surrogate sur;
  sur.ell = ell;
  sur.B = B;
  sur.coeffs.resize(size_t(npts));
  double scale = B;  // B^(1-k)
  for (int k = 0; k < npts; ++k) {
    sur.coeffs[size_t(k)] = c(k) * scale;
    scale /= B;
  }
  sur.delta = B * delta_unit;
  return sur;
}

double surrogate_score(const Surrogate& sur, const Vec& g) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) s += sur.eval(g(j));
  return s;
}

std::pair<double, double> threshold_weight(const WeightRule& rule, double s_ell) {
  const double s_bar = std::max(s_ell - rule.tau_s, 0.0);
  return {s_bar, std::exp(-rule.eta * s_bar)};
}

double auto_domain_bound(const TiltedGaussian& tg, const Vec& operating_box,
                         double z) {
  const int n = int(operating_box.size());
  const int p = int(tg.Gamma.rows());
  double bound = 0.0;
  // All corners of the operating box; n is small (plant state dimension).
  for (int mask = 0; mask < (1 << n); ++mask) {
    Vec x0(n);
    for (int i = 0; i < n; ++i) x0(i) = (mask & (1 << i)) ? operating_box(i) : -operating_box(i);
    const Vec b = tg.offset(x0);
    for (int j = 0; j < p; ++j)
      bound = std::max(bound, std::abs(b(j)) + z * tg.Gamma.row(j).norm());
  }
  return bound;
}

}  // namespace vempc
