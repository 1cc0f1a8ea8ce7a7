#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ndscope/model.hpp"
#include "ndscope/smith.hpp"

namespace ndscope {

enum class Case { BothFull, A2, A3, DualA3 };

inline const char* to_string(Case c) {
  switch (c) {
    case Case::BothFull: return "both_full";
    case Case::A2: return "A2";
    case Case::A3: return "A3";
    case Case::DualA3: return "dual_A3";
  }
  return "?";
}

struct CaseTag {
  Case kind = Case::A2;
  std::vector<std::size_t> rank_zu;  // normal rank of G_zu(λ,i)
  std::vector<std::size_t> rank_yv;  // normal rank of G_yv(λ,i)
};

struct IdentPencil {
  PolyMat X, Y;
  CaseTag tag;
  bool hatted = false;
};

struct StackedCoeffMatrix {
  RatMat matrix;  // (p+1)(m − r) × m
  int p = 0;
  std::size_t r = 0;
};

enum class Verdict { Identifiable, NotIdentifiable, IdentifiableByBothFull };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Identifiable: return "identifiable";
    case Verdict::NotIdentifiable: return "not_identifiable";
    case Verdict::IdentifiableByBothFull: return "identifiable_by_both_full";
  }
  return "?";
}

/// Outcome of one column-deleted test in the known-entries variant.
struct ColumnResult {
  std::size_t index = 0;  // column of Φ (row of Φ for the dual case)
  bool fcr = true;
  RatMat null_basis;      // expanded to full length, zeros at known positions
};

struct IdentReport {
  CaseTag tag;
  Verdict verdict = Verdict::Identifiable;
  std::optional<StackedCoeffMatrix> stacked;
  /// Columns span the solution space; for the dual case they constrain rows of ΔΦ.
  RatMat null_basis;
  bool row_oriented = false;
  bool well_posed = true;
  std::vector<ColumnResult> columns;
  RatMat theta_basis;  // affine variant: null space in parameter space
  std::vector<std::string> warnings;

  bool identifiable() const { return verdict != Verdict::NotIdentifiable; }
};

/// Affine set {Φ₀ + B·Γ} (columns of ΔΦ in span B), or {Φ₀ + (B·Γ)ᵀ} when row oriented.
struct UndiffRegion {
  SCMatrix phi0;
  RatMat basis;
  bool row_oriented = false;

  std::size_t dimension() const { return basis.cols(); }

  SCMatrix member(const RatMat& gamma) const {
    const RatMat step = basis * gamma;
    return phi0 + (row_oriented ? step.transpose() : step);
  }

  /// Exact membership test.
  bool contains(const SCMatrix& phi) const {
    if (phi.rows() != phi0.rows() || phi.cols() != phi0.cols()) throw ShapeError("SCM shape differs from region");
    RatMat delta = phi - phi0;
    if (row_oriented) delta = delta.transpose();
    if (delta.is_zero()) return true;
    if (basis.cols() == 0) return false;
    RatMat x;
    return solve(basis, delta, x);
  }
};

/// Optional unimodular right factors applied to each subsystem's MFD (W1) and split (W2).
struct PencilPerturbation {
  std::vector<PolyMat> w1, w2;
};

namespace detail {

inline bool full_normal_row_rank(const RatFunMat& g, std::size_t rank) { return rank == g.rows(); }
inline bool full_normal_col_rank(const RatFunMat& g, std::size_t rank) { return rank == g.cols(); }

inline CaseTag classify(const std::vector<SubsystemTfms>& parts) {
  CaseTag tag;
  bool all_zu = true, all_yv = true;
  for (const auto& p : parts) {
    const std::size_t rz = normal_rank(p.G_zu), ry = normal_rank(p.G_yv);
    tag.rank_zu.push_back(rz);
    tag.rank_yv.push_back(ry);
    all_zu = all_zu && full_normal_row_rank(p.G_zu, rz);
    all_yv = all_yv && full_normal_col_rank(p.G_yv, ry);
  }
  if (all_zu && all_yv) tag.kind = Case::BothFull;
  else if (all_zu) tag.kind = Case::A3;
  else if (all_yv) tag.kind = Case::DualA3;
  else tag.kind = Case::A2;
  return tag;
}

// One subsystem block of X (or X̂) and Y (or Ŷ).
inline std::pair<PolyMat, PolyMat> pencil_block(const SubsystemTfms& g, bool hatted, const PolyMat* w1,
                                                const PolyMat* w2) {
  const std::size_t mv = g.G_zv.cols(), mz = g.G_zv.rows();
  const SmithMcMillanForm smm = smith_mcmillan(g.G_yv);
  const std::size_t first = hatted ? smm.normal_rank : 0;
  const std::size_t c = mv - first;
  if (c == 0) return {PolyMat(mv, 0), PolyMat(mz, 0)};
  const PolyMat t = smm.V_inv.rows_range(first, c).transpose();

  RightMfd mfd = right_coprime_mfd(g.G_zv);
  if (w1) {
    mfd.N = mfd.N * *w1;
    mfd.Den = mfd.Den * *w1;
  }
  const RatFunMat f = inverse_adjugate(lift<RatFun>(mfd.Den)) * lift<RatFun>(t);
  ProperSplit ps = proper_split(f);
  if (w2) {
    ps.Q = ps.Q * *w2;
    ps.Omega = ps.Omega * *w2;
  }
  const PolyMat w = ps.R * ps.Omega + ps.Q;
  return {mfd.Den * w, mfd.N * w};
}

inline IdentPencil assemble_pencil(const std::vector<SubsystemTfms>& parts, const CaseTag& tag, bool hatted,
                                   const PencilPerturbation* pert) {
  std::vector<PolyMat> xs, ys;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const PolyMat* w1 = pert && i < pert->w1.size() && !pert->w1[i].empty() ? &pert->w1[i] : nullptr;
    const PolyMat* w2 = pert && i < pert->w2.size() && !pert->w2[i].empty() ? &pert->w2[i] : nullptr;
    auto [x, y] = pencil_block(parts[i], hatted, w1, w2);
    xs.push_back(std::move(x));
    ys.push_back(std::move(y));
  }
  return {block_diag(xs), block_diag(ys), tag, hatted};
}

/// The stacked test treats a matrix without rows as of full column rank.
inline bool fcr_for_test(const RatMat& m) { return m.rows() == 0 || rank(m) == m.cols(); }

inline RatMat null_basis_for_test(const RatMat& m) {
  if (m.rows() == 0) return RatMat(m.cols(), 0);
  return canonical_column_basis(right_null_space(m));
}

}  // namespace detail

inline CaseTag classify_case(const NdsDefinition& nds) { return detail::classify(all_subsystem_tfms(nds)); }

/// X, Y from the full V_yv inverse (A2 path).
inline IdentPencil build_xy_pencil(const NdsDefinition& nds, const PencilPerturbation* pert = nullptr) {
  const auto parts = all_subsystem_tfms(nds);
  const CaseTag tag = detail::classify(parts);
  if (tag.kind != Case::A2) throw WrongCase(std::string("pencil X/Y needs case A2, got ") + to_string(tag.kind));
  return detail::assemble_pencil(parts, tag, false, pert);
}

/// X̂, Ŷ from the null-space rows of the V_yv inverse (A3 path).
inline IdentPencil build_xy_pencil_hat(const NdsDefinition& nds, const PencilPerturbation* pert = nullptr) {
  const auto parts = all_subsystem_tfms(nds);
  const CaseTag tag = detail::classify(parts);
  if (tag.kind != Case::A3) throw WrongCase(std::string("pencil X̂/Ŷ needs case A3, got ") + to_string(tag.kind));
  return detail::assemble_pencil(parts, tag, true, pert);
}

/// Smith form of X − Φ₀Y, lower rows of U⁻¹, coefficients stacked by power of λ.
inline StackedCoeffMatrix stacked_u2(const IdentPencil& pencil, const SCMatrix& phi0) {
  const PolyMat m = pencil.X - lift<Poly>(phi0) * pencil.Y;
  const SmithForm sf = smith_form(m);
  const std::size_t mv = m.rows();
  const PolyMat u2 = sf.U_inv.rows_range(sf.normal_rank, mv - sf.normal_rank);
  StackedCoeffMatrix out;
  out.r = sf.normal_rank;
  out.p = u2.rows() == 0 || u2.is_zero() ? 0 : max_degree(u2);
  out.matrix = RatMat((static_cast<std::size_t>(out.p) + 1) * u2.rows(), mv);
  for (int k = 0; k <= out.p; ++k) out.matrix.set_block(static_cast<std::size_t>(k) * u2.rows(), 0, coefficient(u2, k));
  return out;
}

namespace detail {

// Pencil in the orientation the test runs in, with the SCM mapped accordingly.
struct Prepared {
  CaseTag tag;
  IdentPencil pencil;
  bool dual = false;
};

inline Prepared prepare(const NdsDefinition& nds, const PencilPerturbation* pert = nullptr) {
  const auto parts = all_subsystem_tfms(nds);
  Prepared p;
  p.tag = classify(parts);
  switch (p.tag.kind) {
    case Case::BothFull:
      break;
    case Case::A2:
      p.pencil = assemble_pencil(parts, p.tag, false, pert);
      break;
    case Case::A3:
      p.pencil = assemble_pencil(parts, p.tag, true, pert);
      break;
    case Case::DualA3: {
      const NdsDefinition dual = transpose_nds(nds);
      const auto dparts = all_subsystem_tfms(dual);
      CaseTag dtag = classify(dparts);
      p.pencil = assemble_pencil(dparts, dtag, true, pert);
      p.dual = true;
      break;
    }
  }
  return p;
}

inline void check_preconditions(const NdsDefinition& nds, const SCMatrix& phi0, IdentReport& rep) {
  nds.check_scm_shape(phi0);
  if (!check_nds_regular(nds, phi0)) throw NotRegular("the NDS is not regular at the given SCM");
  rep.well_posed = check_well_posed(nds, phi0);
  if (!rep.well_posed) rep.warnings.push_back("I - Phi*D_zv is singular (not well-posed)");
}

}  // namespace detail

inline IdentReport check_identifiable_at(const NdsDefinition& nds, const SCMatrix& phi0,
                                         const PencilPerturbation* pert = nullptr) {
  IdentReport rep;
  detail::check_preconditions(nds, phi0, rep);
  const auto prep = detail::prepare(nds, pert);
  rep.tag = prep.tag;
  if (prep.tag.kind == Case::BothFull) {
    rep.verdict = Verdict::IdentifiableByBothFull;
    rep.null_basis = RatMat(nds.m_v(), 0);
    return rep;
  }
  rep.row_oriented = prep.dual;
  const StackedCoeffMatrix st = stacked_u2(prep.pencil, prep.dual ? phi0.transpose() : phi0);
  rep.verdict = detail::fcr_for_test(st.matrix) ? Verdict::Identifiable : Verdict::NotIdentifiable;
  rep.null_basis = rep.verdict == Verdict::Identifiable ? RatMat(st.matrix.cols(), 0)
                                                        : detail::null_basis_for_test(st.matrix);
  rep.stacked = st;
  return rep;
}

inline UndiffRegion undiff_region(const IdentReport& report, const SCMatrix& phi0) {
  if (report.verdict != Verdict::NotIdentifiable) throw RegionIsTrivial("region is trivial: the SCM is identifiable");
  return {phi0, report.null_basis, report.row_oriented};
}

struct RegionCheck {
  bool ok = true;
  std::vector<SCMatrix> inside, outside;
  std::vector<bool> inside_equal;    // expected true; irregular draws are skipped
  std::vector<bool> outside_differ;  // expected true; irregular draws are skipped
};

namespace detail {

inline Rat small_rat(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> num(-9, 9), den(1, 4);
  Rat r(mpz_class(num(rng)), mpz_class(den(rng)));
  r.canonicalize();
  return r;
}

}  // namespace detail

/// Brute-force TFM comparison on random members and random non-members of the region.
inline RegionCheck verify_region_by_tfm(const NdsDefinition& nds, const SCMatrix& phi0,
                                        const std::optional<UndiffRegion>& region, std::size_t n_in,
                                        std::size_t n_out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RegionCheck out;
  const SubsystemTfms g = assemble_block_tfms(nds);
  const RatFunMat h0 = nds_tfm(g, phi0);
  const UndiffRegion reg = region ? *region : UndiffRegion{phi0, RatMat(nds.m_v(), 0), false};
  const std::size_t gamma_cols = reg.row_oriented ? phi0.rows() : phi0.cols();
  std::size_t kept = 0;
  for (std::size_t attempt = 0; kept < n_in && attempt < 20 * (n_in + 1); ++attempt) {
    RatMat gamma(reg.dimension(), gamma_cols);
    for (std::size_t i = 0; i < gamma.rows(); ++i)
      for (std::size_t j = 0; j < gamma.cols(); ++j) gamma(i, j) = detail::small_rat(rng);
    const SCMatrix phi = reg.member(gamma);
    RatFunMat h;
    try {
      h = nds_tfm(g, phi);
    } catch (const NotRegular&) {
      continue;
    }
    const bool eq = tfm_equal(h, h0);
    out.inside.push_back(phi);
    out.inside_equal.push_back(eq);
    out.ok = out.ok && eq;
    ++kept;
  }
  std::size_t drawn = 0;
  for (std::size_t attempt = 0; drawn < n_out && attempt < 20 * (n_out + 1); ++attempt) {
    SCMatrix phi = phi0;
    for (std::size_t i = 0; i < phi.rows(); ++i)
      for (std::size_t j = 0; j < phi.cols(); ++j) phi(i, j) += detail::small_rat(rng);
    if (reg.contains(phi)) continue;
    RatFunMat h;
    try {
      h = nds_tfm(g, phi);
    } catch (const NotRegular&) {
      continue;
    }
    const bool differ = !tfm_equal(h, h0);
    out.outside.push_back(phi);
    out.outside_differ.push_back(differ);
    out.ok = out.ok && differ;
    ++drawn;
  }
  return out;
}

/// Column-deleted stacked tests; every column of Φ is tested, with nothing deleted where nothing is known.
inline IdentReport check_identifiable_known_entries(const NdsDefinition& nds, const SCMatrix& phi0,
                                                    const KnownEntries& spec) {
  IdentReport rep;
  detail::check_preconditions(nds, phi0, rep);
  const std::size_t mv = nds.m_v(), mz = nds.m_z();
  std::vector<std::vector<bool>> known(mv, std::vector<bool>(mz, false));
  for (std::size_t j : spec.J)
    if (j >= mz) throw IndexError("known_entries: column " + std::to_string(j + 1) + " out of range");
  for (const auto& [j, rows] : spec.I) {
    if (j >= mz) throw IndexError("known_entries: column " + std::to_string(j + 1) + " out of range");
    for (std::size_t i : rows) {
      if (i >= mv) throw IndexError("known_entries: row " + std::to_string(i + 1) + " out of range");
      known[i][j] = true;
    }
  }
  const auto prep = detail::prepare(nds);
  rep.tag = prep.tag;
  if (prep.tag.kind == Case::BothFull) {
    rep.verdict = Verdict::IdentifiableByBothFull;
    return rep;
  }
  rep.row_oriented = prep.dual;
  const StackedCoeffMatrix st = stacked_u2(prep.pencil, prep.dual ? phi0.transpose() : phi0);
  rep.stacked = st;
  // In the dual orientation the tested vectors are rows of ΔΦ.
  const std::size_t n_vec = prep.dual ? mv : mz, len = prep.dual ? mz : mv;
  bool all = true;
  for (std::size_t j = 0; j < n_vec; ++j) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < len; ++i) {
      const bool k = prep.dual ? known[j][i] : known[i][j];
      if (!k) keep.push_back(i);
    }
    const RatMat sub = st.matrix.select_cols(keep);
    ColumnResult cr;
    cr.index = j;
    cr.fcr = detail::fcr_for_test(sub);
    cr.null_basis = RatMat(len, 0);
    if (!cr.fcr) {
      const RatMat nb = detail::null_basis_for_test(sub);
      cr.null_basis = RatMat(len, nb.cols());
      for (std::size_t s = 0; s < keep.size(); ++s)
        for (std::size_t c = 0; c < nb.cols(); ++c) cr.null_basis(keep[s], c) = nb(s, c);
    }
    all = all && cr.fcr;
    rep.columns.push_back(std::move(cr));
  }
  rep.verdict = all ? Verdict::Identifiable : Verdict::NotIdentifiable;
  rep.null_basis = RatMat(len, 0);
  return rep;
}

/// Affine parameterization Φ(θ) = Φ⁽⁰⁾ + Σ θ_k Φ⁽ᵏ⁾; FCR of [vec(U·Φ⁽¹⁾) … vec(U·Φ⁽q⁾)].
inline IdentReport check_identifiable_parameterized(const NdsDefinition& nds, const AffineParam& spec,
                                                    const std::vector<Rat>& theta0) {
  const SCMatrix phi = spec.at(theta0);
  IdentReport rep;
  detail::check_preconditions(nds, phi, rep);
  for (const auto& d : spec.directions) nds.check_scm_shape(d, "affine direction");
  const auto prep = detail::prepare(nds);
  rep.tag = prep.tag;
  const std::size_t q = spec.directions.size();
  if (prep.tag.kind == Case::BothFull) {
    rep.verdict = Verdict::IdentifiableByBothFull;
    rep.theta_basis = RatMat(q, 0);
    return rep;
  }
  rep.row_oriented = prep.dual;
  const StackedCoeffMatrix st = stacked_u2(prep.pencil, prep.dual ? phi.transpose() : phi);
  rep.stacked = st;
  const std::size_t s = st.matrix.rows();
  const std::size_t ncols = prep.dual ? nds.m_v() : nds.m_z();
  RatMat big(s * ncols, q);
  for (std::size_t k = 0; k < q; ++k) {
    const RatMat prod = st.matrix * (prep.dual ? spec.directions[k].transpose() : spec.directions[k]);
    for (std::size_t c = 0; c < prod.cols(); ++c)
      for (std::size_t r = 0; r < prod.rows(); ++r) big(c * s + r, k) = prod(r, c);
  }
  const bool fcr = detail::fcr_for_test(big);
  rep.verdict = fcr ? Verdict::Identifiable : Verdict::NotIdentifiable;
  rep.theta_basis = fcr ? RatMat(q, 0) : detail::null_basis_for_test(big);
  rep.null_basis = RatMat(st.matrix.cols(), 0);
  return rep;
}

/// Random diagonal entries with magnitude in [1, 10].
inline std::vector<Rat> random_p_diag(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> num(10, 100), sign(0, 1);
  std::vector<Rat> d;
  for (std::size_t i = 0; i < n; ++i) {
    Rat r(mpz_class(num(rng)), mpz_class(10));
    r.canonicalize();
    d.push_back(sign(rng) ? r : Rat(-r));
  }
  return d;
}

/// Solvability test on the augmented pencil [[X, −Φ₀P], [Y, −P]] with right-hand side col{δ, 0}.
inline IdentReport check_identifiable_augmented(const NdsDefinition& nds, const SCMatrix& phi0,
                                                std::optional<std::vector<Rat>> p_diag, std::uint64_t seed) {
  IdentReport rep;
  detail::check_preconditions(nds, phi0, rep);
  const auto prep = detail::prepare(nds);
  rep.tag = prep.tag;
  if (prep.tag.kind == Case::BothFull) {
    rep.verdict = Verdict::IdentifiableByBothFull;
    return rep;
  }
  rep.row_oriented = prep.dual;
  const SCMatrix phi = prep.dual ? phi0.transpose() : phi0;
  const std::size_t m = phi.rows(), n = phi.cols();
  const std::vector<Rat> d = p_diag ? *p_diag : random_p_diag(n, seed);
  if (d.size() != n) throw ShapeError("P needs " + std::to_string(n) + " diagonal entries");
  RatMat p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] == 0) throw ZeroDiagonal("P has a zero diagonal entry at " + std::to_string(i + 1));
    p(i, i) = d[i];
  }
  const IdentPencil& pen = prep.pencil;
  const std::size_t c = pen.X.cols();
  PolyMat aug(m + n, c + n);
  aug.set_block(0, 0, pen.X);
  aug.set_block(0, c, lift<Poly>(-(phi * p)));
  aug.set_block(m, 0, pen.Y);
  aug.set_block(m, c, lift<Poly>(-p));
  const SmithForm sf = smith_form(aug);
  const std::size_t lower = m + n - sf.normal_rank;
  const PolyMat u2 = sf.U_inv.block(sf.normal_rank, 0, lower, m);
  StackedCoeffMatrix st;
  st.r = sf.normal_rank;
  st.p = lower == 0 || u2.is_zero() ? 0 : max_degree(u2);
  st.matrix = RatMat((static_cast<std::size_t>(st.p) + 1) * lower, m);
  for (int k = 0; k <= st.p; ++k) st.matrix.set_block(static_cast<std::size_t>(k) * lower, 0, coefficient(u2, k));
  rep.verdict = detail::fcr_for_test(st.matrix) ? Verdict::Identifiable : Verdict::NotIdentifiable;
  rep.null_basis = rep.verdict == Verdict::Identifiable ? RatMat(m, 0) : detail::null_basis_for_test(st.matrix);
  rep.stacked = st;
  return rep;
}

}  // namespace ndscope
