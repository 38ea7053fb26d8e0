// SPDX-License-Identifier: Apache-2.0
#include "vempc/qp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <string>

namespace vempc {

QpResult reference_qp_solve(const CondensedQp& qp, const LinearConstraints& lc,
                            const Vec& x0, double tol, int max_iter) {
  const int d = int(qp.H.rows());
  const int p = lc.p();
  const Vec q = qp.S.transpose() * x0;
  const Vec h = lc.h(x0);

  const double sigma = 1e-6;
  double rho = 0.1;

  Eigen::LDLT<Mat> kkt;
  auto refactor = [&]() {
    Mat M = qp.H + sigma * Mat::Identity(d, d) + rho * lc.G.transpose() * lc.G;
    kkt.compute(M);
    if (kkt.info() != Eigen::Success) throw NumericalError("reference QP: KKT factorization failed");
  };
  refactor();

  Vec x = Vec::Zero(d);
  Vec z = (lc.G * x).cwiseMin(h);
  Vec y = Vec::Zero(p);

  double r_prim = 0.0, r_dual = 0.0;
  const double diverge_limit = 1e10 * (1.0 + h.cwiseAbs().maxCoeff() + q.cwiseAbs().maxCoeff());

  for (int it = 1; it <= max_iter; ++it) {
    const Vec rhs = sigma * x - q + lc.G.transpose() * (rho * z - y);
    x = kkt.solve(rhs);
    const Vec Gx = lc.G * x;
    z = (Gx + y / rho).cwiseMin(h);  // projection onto {z <= h}
    y += rho * (Gx - z);

    r_prim = (Gx - z).cwiseAbs().maxCoeff();
    r_dual = (qp.H * x + q + lc.G.transpose() * y).cwiseAbs().maxCoeff();

    const double eps_prim = tol * (1.0 + std::max(Gx.cwiseAbs().maxCoeff(), z.cwiseAbs().maxCoeff()));
    const double eps_dual = tol * (1.0 + std::max({(qp.H * x).cwiseAbs().maxCoeff(),
                                                   q.cwiseAbs().maxCoeff(),
                                                   (lc.G.transpose() * y).cwiseAbs().maxCoeff()}));
    if (r_prim <= eps_prim && r_dual <= eps_dual) {
      return {x, it, r_prim, r_dual};
    }

    if (x.cwiseAbs().maxCoeff() > diverge_limit || y.cwiseAbs().maxCoeff() > diverge_limit)
      throw NumericalError("reference QP: diverging iterates, problem likely infeasible");

    if (it % 50 == 0 && r_dual > 0.0) {
      const double ratio = std::sqrt(r_prim / std::max(r_dual, 1e-300));
      const double rho_new = std::clamp(rho * ratio, 1e-6, 1e6);
      if (rho_new > 2.0 * rho || rho_new < 0.5 * rho) {
        rho = rho_new;
        refactor();
      }
    }
  }
  throw NumericalError("reference QP: not converged after " + std::to_string(max_iter) +
                       " iterations (primal " + std::to_string(r_prim) + ", dual " +
                       std::to_string(r_dual) + ")");
}

}  // namespace vempc
