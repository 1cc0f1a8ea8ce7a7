#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "ndscope/error.hpp"
#include "ndscope/model.hpp"

namespace ndscope {

inline void require_square(const Eigen::MatrixXd& a, const char* what) {
  if (a.rows() != a.cols())
    throw ShapeError(std::string(what) + ": matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

inline Eigen::VectorXcd eig(const Eigen::MatrixXd& a) {
  require_square(a, "eig");
  if (a.size() == 0) return {};
  if (!a.allFinite()) throw NoConvergence("eig: matrix has non-finite entries");
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  if (es.info() != Eigen::Success) throw NoConvergence("eig: QR iteration did not converge");
  return es.eigenvalues();
}

struct Svd {
  Eigen::MatrixXd U;
  Eigen::VectorXd sigma;  // descending
  Eigen::MatrixXd V;

  double max() const { return sigma.size() ? sigma(0) : 0.0; }
};

inline Svd svd(const Eigen::MatrixXd& a) {
  if (!a.allFinite()) throw NoConvergence("svd: matrix has non-finite entries");
  Eigen::JacobiSVD<Eigen::MatrixXd> s(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {s.matrixU(), s.singularValues(), s.matrixV()};
}

/// Largest singular value of a complex matrix.
inline double sigma_max(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  if (!a.allFinite()) throw NoConvergence("sigma_max: matrix has non-finite entries");
  Eigen::JacobiSVD<Eigen::MatrixXcd> s(a);
  return s.singularValues()(0);
}

/// Padé scaling and squaring.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  require_square(a, "expm");
  if (a.size() == 0) return a;
  return a.exp();
}

struct StabilityMargins {
  bool stable = false;
  bool discrete = false;
  std::optional<double> s_mr;  // over real eigenvalues
  std::optional<double> s_md;  // over complex eigenvalues
  double rho_max = 0.0, rho_min = 0.0;
};

/// Strict-stability threshold on Re λ for continuous time.
inline constexpr double kStabilityEps = 1e-10;

inline bool is_real_eigenvalue(std::complex<double> l) {
  return std::abs(l.imag()) <= 1e-12 * (1.0 + std::abs(l));
}

/// Discrete margins are 1 − |λ| over the respective eigenvalue classes.
inline StabilityMargins stability_margins(const Eigen::MatrixXd& a, TimeDomain domain = TimeDomain::Continuous) {
  const Eigen::VectorXcd ev = eig(a);
  StabilityMargins m;
  m.discrete = domain == TimeDomain::Discrete;
  m.stable = true;
  if (ev.size() == 0) return m;
  m.rho_min = std::abs(ev(0));
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    const std::complex<double> l = ev(k);
    const double r = std::abs(l);
    m.rho_max = std::max(m.rho_max, r);
    m.rho_min = std::min(m.rho_min, r);
    double margin;
    if (m.discrete) {
      m.stable = m.stable && r < 1.0;
      margin = 1.0 - r;
    } else {
      m.stable = m.stable && l.real() < -kStabilityEps;
      margin = is_real_eigenvalue(l) ? r : -l.real() / r;
    }
    auto& slot = is_real_eigenvalue(l) ? m.s_mr : m.s_md;
    slot = slot ? std::min(*slot, margin) : margin;
  }
  return m;
}

}  // namespace ndscope
