#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ndscope/linalg.hpp"

namespace ndscope {

enum class TimeDomain { Continuous, Discrete };

/// E δx = A_xx x + B_xv v + B_xu u,  z = C_zx x + D_zv v + D_zu u,  y = C_yx x + D_yv v + D_yu u.
struct SubsystemRealization {
  RatMat E, A_xx, B_xv, B_xu, C_zx, C_yx, D_zv, D_zu, D_yv, D_yu;

  std::size_t m_x() const { return A_xx.rows(); }
  std::size_t m_v() const { return B_xv.cols(); }
  std::size_t m_u() const { return B_xu.cols(); }
  std::size_t m_z() const { return C_zx.rows(); }
  std::size_t m_y() const { return C_yx.rows(); }

  /// Throws DimensionError on inconsistent shapes.
  void validate(const std::string& where = "subsystem") const {
    auto need = [&](const RatMat& m, std::size_t r, std::size_t c, const char* name) {
      if (m.rows() != r || m.cols() != c) {
        throw DimensionError(where + ": " + name + " is " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected " + std::to_string(r) + "x" +
                             std::to_string(c));
      }
    };
    const std::size_t nx = A_xx.rows();
    if (nx == 0) throw DimensionError(where + ": A_xx must be nonempty");
    if (m_v() == 0 || m_z() == 0) throw DimensionError(where + ": m_v and m_z must be positive");
    need(A_xx, nx, nx, "A_xx");
    need(E, nx, nx, "E");
    need(B_xv, nx, m_v(), "B_xv");
    need(B_xu, nx, m_u(), "B_xu");
    need(C_zx, m_z(), nx, "C_zx");
    need(C_yx, m_y(), nx, "C_yx");
    need(D_zv, m_z(), m_v(), "D_zv");
    need(D_zu, m_z(), m_u(), "D_zu");
    need(D_yv, m_y(), m_v(), "D_yv");
    need(D_yu, m_y(), m_u(), "D_yu");
  }
};

using SCMatrix = RatMat;

struct NdsDefinition {
  std::vector<SubsystemRealization> subsystems;
  TimeDomain time_domain = TimeDomain::Continuous;

  std::size_t N() const { return subsystems.size(); }
  std::size_t m_x() const { return sum(&SubsystemRealization::m_x); }
  std::size_t m_v() const { return sum(&SubsystemRealization::m_v); }
  std::size_t m_u() const { return sum(&SubsystemRealization::m_u); }
  std::size_t m_z() const { return sum(&SubsystemRealization::m_z); }
  std::size_t m_y() const { return sum(&SubsystemRealization::m_y); }

  void validate() const {
    if (subsystems.empty()) throw DimensionError("an NDS needs at least one subsystem");
    for (std::size_t i = 0; i < subsystems.size(); ++i)
      subsystems[i].validate("subsystem " + std::to_string(i + 1));
  }

  void check_scm_shape(const SCMatrix& phi, const std::string& what = "SCM") const {
    if (phi.rows() != m_v() || phi.cols() != m_z()) {
      throw DimensionError(what + " is " + std::to_string(phi.rows()) + "x" + std::to_string(phi.cols()) +
                           ", expected " + std::to_string(m_v()) + "x" + std::to_string(m_z()));
    }
  }

  /// Block-diagonal assembly of one realization matrix across subsystems.
  RatMat block(RatMat SubsystemRealization::*field) const {
    std::vector<RatMat> blocks;
    blocks.reserve(subsystems.size());
    for (const auto& s : subsystems) blocks.push_back(s.*field);
    return block_diag(blocks);
  }

 private:
  std::size_t sum(std::size_t (SubsystemRealization::*f)() const) const {
    std::size_t t = 0;
    for (const auto& s : subsystems) t += (s.*f)();
    return t;
  }
};

struct KnownEntries {
  std::vector<std::size_t> J;                           // 0-based column indices
  std::map<std::size_t, std::vector<std::size_t>> I;   // column -> 0-based known rows
};

struct AffineParam {
  SCMatrix phi0;
  std::vector<SCMatrix> directions;
  std::vector<Rat> theta;

  SCMatrix at(const std::vector<Rat>& th) const {
    if (th.size() != directions.size()) throw IndexError("theta length differs from direction count");
    SCMatrix phi = phi0;
    for (std::size_t k = 0; k < directions.size(); ++k) phi = phi + th[k] * directions[k];
    return phi;
  }
};

using ConstraintSpec = std::variant<KnownEntries, AffineParam>;

struct SubsystemTfms {
  RatFunMat G_yu, G_yv, G_zu, G_zv;
};

/// det(λE − A_xx)
inline Poly char_poly(const SubsystemRealization& sub) {
  return determinant(pencil(sub.E, sub.A_xx));
}

inline bool check_subsystem_regular(const SubsystemRealization& sub) { return !char_poly(sub).is_zero(); }

/// C·(λE − A)⁻¹·B + D through the adjugate; shared helper for descriptor realizations.
inline RatFunMat descriptor_tfm(const RatMat& e, const RatMat& a, const RatMat& b, const RatMat& c,
                                const RatMat& d) {
  const PolyMat pen = pencil(e, a);
  const Poly det = determinant(pen);
  if (det.is_zero()) throw NotRegular("det(λE − A) vanishes identically");
  const PolyMat num = lift<Poly>(c) * adjugate(pen) * lift<Poly>(b);
  RatFunMat g(c.rows(), b.cols());
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = RatFun(num(i, j), det) + RatFun(d(i, j));
  return g;
}

inline SubsystemTfms subsystem_tfms(const SubsystemRealization& sub) {
  const PolyMat pen = pencil(sub.E, sub.A_xx);
  const Poly det = determinant(pen);
  if (det.is_zero()) throw NotRegular("subsystem is not regular");
  const PolyMat adj = adjugate(pen);
  const PolyMat cy_adj = lift<Poly>(sub.C_yx) * adj;
  const PolyMat cz_adj = lift<Poly>(sub.C_zx) * adj;
  auto make = [&](const PolyMat& left, const RatMat& b, const RatMat& d) {
    const PolyMat num = left * lift<Poly>(b);
    RatFunMat g(num.rows(), num.cols());
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = RatFun(num(i, j) + Poly(d(i, j)) * det, det);
    return g;
  };
  return {make(cy_adj, sub.B_xu, sub.D_yu), make(cy_adj, sub.B_xv, sub.D_yv),
          make(cz_adj, sub.B_xu, sub.D_zu), make(cz_adj, sub.B_xv, sub.D_zv)};
}

inline std::vector<SubsystemTfms> all_subsystem_tfms(const NdsDefinition& nds) {
  std::vector<SubsystemTfms> out;
  for (std::size_t i = 0; i < nds.subsystems.size(); ++i) {
    if (!check_subsystem_regular(nds.subsystems[i]))
      throw NotRegular("subsystem " + std::to_string(i + 1) + " is not regular");
    out.push_back(subsystem_tfms(nds.subsystems[i]));
  }
  return out;
}

inline SubsystemTfms assemble_block_tfms(const NdsDefinition& nds) {
  const auto parts = all_subsystem_tfms(nds);
  std::vector<RatFunMat> yu, yv, zu, zv;
  for (const auto& p : parts) {
    yu.push_back(p.G_yu);
    yv.push_back(p.G_yv);
    zu.push_back(p.G_zu);
    zv.push_back(p.G_zv);
  }
  return {block_diag(yu), block_diag(yv), block_diag(zu), block_diag(zv)};
}

inline RatFun det_i_minus_gzv_phi(const SubsystemTfms& g, const SCMatrix& phi) {
  const RatFunMat m = RatFunMat::identity(g.G_zv.rows()) - g.G_zv * lift<RatFun>(phi);
  return determinant(m);
}

inline bool check_nds_regular(const NdsDefinition& nds, const SCMatrix& phi) {
  nds.check_scm_shape(phi);
  return !det_i_minus_gzv_phi(assemble_block_tfms(nds), phi).is_zero();
}

inline bool check_well_posed(const NdsDefinition& nds, const SCMatrix& phi) {
  nds.check_scm_shape(phi);
  const RatMat m = RatMat::identity(nds.m_v()) - phi * nds.block(&SubsystemRealization::D_zv);
  return determinant(m) != 0;
}

/// H = G_yu + G_yv (I − Φ G_zv)⁻¹ Φ G_zu
inline RatFunMat nds_tfm(const SubsystemTfms& g, const SCMatrix& phi) {
  const RatFunMat ph = lift<RatFun>(phi);
  const RatFunMat m = RatFunMat::identity(ph.rows()) - ph * g.G_zv;
  RatFunMat inv;
  try {
    inv = inverse_adjugate(m);
  } catch (const SingularMatrix&) {
    throw NotRegular("det(I − Φ G_zv) vanishes identically");
  }
  return g.G_yu + g.G_yv * (inv * (ph * g.G_zu));
}

inline RatFunMat nds_tfm(const NdsDefinition& nds, const SCMatrix& phi) {
  nds.check_scm_shape(phi);
  return nds_tfm(assemble_block_tfms(nds), phi);
}

inline bool tfm_equal(const RatFunMat& h1, const RatFunMat& h2) {
  if (h1.rows() != h2.rows() || h1.cols() != h2.cols()) throw ShapeError("TFM shapes differ");
  return h1 == h2;
}

/// Dual realization whose subsystem TFMs are the transposes with u↔y and v↔z swapped.
inline SubsystemRealization transpose_subsystem(const SubsystemRealization& s) {
  SubsystemRealization t;
  t.E = s.E.transpose();
  t.A_xx = s.A_xx.transpose();
  t.B_xv = s.C_zx.transpose();
  t.B_xu = s.C_yx.transpose();
  t.C_zx = s.B_xv.transpose();
  t.C_yx = s.B_xu.transpose();
  t.D_zv = s.D_zv.transpose();
  t.D_zu = s.D_yv.transpose();
  t.D_yv = s.D_zu.transpose();
  t.D_yu = s.D_yu.transpose();
  return t;
}

inline NdsDefinition transpose_nds(const NdsDefinition& nds) {
  NdsDefinition t;
  t.time_domain = nds.time_domain;
  for (const auto& s : nds.subsystems) t.subsystems.push_back(transpose_subsystem(s));
  return t;
}

}  // namespace ndscope
