#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ndscope/model.hpp"

namespace ndscope {

/// E δx = A x + B u,  y = C x + D u.
struct LumpedModel {
  RatMat E, A, B, C, D;

  std::size_t states() const { return A.rows(); }
};

struct SubsystemRecon {
  bool K_fcr = false, L_frr = false;
  std::size_t K_rank = 0, L_rank = 0;
};

struct ReconReport {
  std::vector<SubsystemRecon> per_subsystem;
  bool reconstructible = false;
};

struct ConsistencyReport {
  bool cond_left = false, cond_right = false, cond_hm = false;
  RatMat H_m;       // m_v × m_z
  RatMat residual;  // E_d − K·H_m·L
  bool consistent = false;
};

/// K = col{B_xv, D_yv} and L = [C_zx D_zu] for the whole network.
inline RatMat stacked_k(const NdsDefinition& nds) {
  return vstack(nds.block(&SubsystemRealization::B_xv), nds.block(&SubsystemRealization::D_yv));
}

inline RatMat stacked_l(const NdsDefinition& nds) {
  return hstack(nds.block(&SubsystemRealization::C_zx), nds.block(&SubsystemRealization::D_zu));
}

/// [A_xx B_xu; C_yx D_yu] of the disconnected subsystems.
inline RatMat open_loop_system_matrix(const NdsDefinition& nds) {
  return vstack(hstack(nds.block(&SubsystemRealization::A_xx), nds.block(&SubsystemRealization::B_xu)),
                hstack(nds.block(&SubsystemRealization::C_yx), nds.block(&SubsystemRealization::D_yu)));
}

inline RatMat system_matrix(const LumpedModel& m) { return vstack(hstack(m.A, m.B), hstack(m.C, m.D)); }

inline LumpedModel lump(const NdsDefinition& nds, const SCMatrix& phi) {
  nds.check_scm_shape(phi);
  const RatMat w = RatMat::identity(nds.m_v()) - phi * nds.block(&SubsystemRealization::D_zv);
  if (determinant(w) == 0) throw NotWellPosed("I − Φ D_zv is singular");
  const RatMat full = open_loop_system_matrix(nds) + stacked_k(nds) * inverse(w) * phi * stacked_l(nds);
  const std::size_t nx = nds.m_x(), nu = nds.m_u(), ny = nds.m_y();
  return {nds.block(&SubsystemRealization::E), full.block(0, 0, nx, nx), full.block(0, nx, nx, nu),
          full.block(nx, 0, ny, nx), full.block(nx, nx, ny, nu)};
}

/// Closed loop in the augmented state col{x, z}; valid without well-posedness.
inline LumpedModel lump_descriptor(const NdsDefinition& nds, const SCMatrix& phi) {
  nds.check_scm_shape(phi);
  if (!check_nds_regular(nds, phi)) throw NotRegular("the NDS is not regular at the given SCM");
  const std::size_t nx = nds.m_x(), nz = nds.m_z();
  LumpedModel m;
  m.E = RatMat(nx + nz, nx + nz);
  m.E.set_block(0, 0, nds.block(&SubsystemRealization::E));
  m.A = RatMat(nx + nz, nx + nz);
  m.A.set_block(0, 0, nds.block(&SubsystemRealization::A_xx));
  m.A.set_block(0, nx, nds.block(&SubsystemRealization::B_xv) * phi);
  m.A.set_block(nx, 0, nds.block(&SubsystemRealization::C_zx));
  m.A.set_block(nx, nx, nds.block(&SubsystemRealization::D_zv) * phi - RatMat::identity(nz));
  m.B = vstack(nds.block(&SubsystemRealization::B_xu), nds.block(&SubsystemRealization::D_zu));
  m.C = hstack(nds.block(&SubsystemRealization::C_yx), nds.block(&SubsystemRealization::D_yv) * phi);
  m.D = nds.block(&SubsystemRealization::D_yu);
  return m;
}

inline RatFunMat lumped_tfm(const LumpedModel& m) { return descriptor_tfm(m.E, m.A, m.B, m.C, m.D); }

inline ReconReport check_reconstructible(const NdsDefinition& nds) {
  ReconReport rep;
  rep.reconstructible = true;
  for (const auto& s : nds.subsystems) {
    SubsystemRecon r;
    r.K_rank = rank(vstack(s.B_xv, s.D_yv));
    r.L_rank = rank(hstack(s.C_zx, s.D_zu));
    r.K_fcr = r.K_rank == s.m_v();
    r.L_frr = r.L_rank == s.m_z();
    rep.reconstructible = rep.reconstructible && r.K_fcr && r.L_frr;
    rep.per_subsystem.push_back(r);
  }
  return rep;
}

namespace detail {

inline void check_lumped_shape(const NdsDefinition& nds, const LumpedModel& m) {
  const std::size_t nx = nds.m_x(), nu = nds.m_u(), ny = nds.m_y();
  auto need = [](const RatMat& a, std::size_t r, std::size_t c, const char* name) {
    if (a.rows() != r || a.cols() != c)
      throw ShapeError(std::string("lumped ") + name + " is " + std::to_string(a.rows()) + "x" +
                       std::to_string(a.cols()) + ", expected " + std::to_string(r) + "x" + std::to_string(c));
  };
  need(m.E, nx, nx, "E");
  need(m.A, nx, nx, "A");
  need(m.B, nx, nu, "B");
  need(m.C, ny, nx, "C");
  need(m.D, ny, nu, "D");
  if (m.E != nds.block(&SubsystemRealization::E)) throw ShapeError("lumped E differs from the network's E");
}

}  // namespace detail

inline ConsistencyReport check_consistency(const NdsDefinition& nds, const LumpedModel& model) {
  if (!check_reconstructible(nds).reconstructible)
    throw NotReconstructible("K is not of full column rank or L is not of full row rank");
  detail::check_lumped_shape(nds, model);
  const RatMat k = stacked_k(nds), l = stacked_l(nds);
  const RatMat ed = system_matrix(model) - open_loop_system_matrix(nds);
  ConsistencyReport rep;
  const RatMat k_perp = left_null_space(k);
  const RatMat l_perp = right_null_space(l);
  rep.cond_left = k_perp.rows() == 0 || (k_perp * ed).is_zero();
  rep.cond_right = l_perp.cols() == 0 || (ed * l_perp).is_zero();
  const RatMat kt = k.transpose(), lt = l.transpose();
  rep.H_m = inverse(kt * k) * kt * ed * lt * inverse(l * lt);
  rep.residual = ed - k * rep.H_m * l;
  const RatMat w = RatMat::identity(nds.m_v()) + rep.H_m * nds.block(&SubsystemRealization::D_zv);
  const RatMat w_perp = left_null_space(w);
  rep.cond_hm = w_perp.rows() == 0 || (w_perp * rep.H_m).is_zero();
  rep.consistent = rep.cond_left && rep.cond_right && rep.cond_hm;
  return rep;
}

/// Φ = (I + H_m D_zv)⁻¹ H_m.
inline SCMatrix recover_scm(const NdsDefinition& nds, const LumpedModel& model) {
  const ConsistencyReport rep = check_consistency(nds, model);
  if (!rep.consistent) {
    std::string why;
    if (!rep.cond_left) why += " left-annihilator condition fails;";
    if (!rep.cond_right) why += " right-annihilator condition fails;";
    if (!rep.cond_hm) why += " H_m condition fails;";
    why.pop_back();
    throw Inconsistent("lumped model is inconsistent with the network:" + why);
  }
  const RatMat w = RatMat::identity(nds.m_v()) + rep.H_m * nds.block(&SubsystemRealization::D_zv);
  if (determinant(w) == 0)
    throw SingularRecovery("I + H_m D_zv is singular; the SCM has free parameters and is not unique");
  return inverse(w) * rep.H_m;
}

inline Eigen::MatrixXd to_eigen(const RatMat& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j).get_d();
  return out;
}

/// Floating-point recovery through the SVDs of K and L (H₀ = Λ_K⁻¹ U_K₁ᵀ E_d V_L₁ Λ_L⁻¹).
inline Eigen::MatrixXd recover_scm_svd(const NdsDefinition& nds, const LumpedModel& model) {
  detail::check_lumped_shape(nds, model);
  const Eigen::MatrixXd k = to_eigen(stacked_k(nds)), l = to_eigen(stacked_l(nds));
  const Eigen::MatrixXd ed = to_eigen(system_matrix(model) - open_loop_system_matrix(nds));
  const Eigen::JacobiSVD<Eigen::MatrixXd> sk(k, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::JacobiSVD<Eigen::MatrixXd> sl(l, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto rk = sk.rank(), rl = sl.rank();
  if (rk < k.cols() || rl < l.rows()) throw NotReconstructible("K or L is rank deficient");
  const Eigen::MatrixXd u_k = sk.matrixU().leftCols(rk), v_k = sk.matrixV().leftCols(rk);
  const Eigen::MatrixXd u_l = sl.matrixU().leftCols(rl), v_l = sl.matrixV().leftCols(rl);
  const Eigen::MatrixXd h0 = sk.singularValues().head(rk).cwiseInverse().asDiagonal() * u_k.transpose() * ed *
                             v_l * sl.singularValues().head(rl).cwiseInverse().asDiagonal();
  const Eigen::MatrixXd pi = v_k * h0 * u_l.transpose();
  const Eigen::MatrixXd dzv = to_eigen(nds.block(&SubsystemRealization::D_zv));
  const Eigen::MatrixXd w = Eigen::MatrixXd::Identity(dzv.rows(), dzv.rows()) + dzv * pi;
  // Φ (I + D_zv Π) = Π
  return w.transpose().fullPivLu().solve(pi.transpose()).transpose();
}

}  // namespace ndscope
