#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndscope/artifacts.hpp"
#include "ndscope/reference.hpp"
#include "ndscope/sim.hpp"

/// End-to-end checks on the built-in example network.
namespace ndscope::study {

using json = nlohmann::ordered_json;

struct Check {
  Check() = default;
  Check(int i, std::string n) : id(i), name(std::move(n)) {}

  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline RatMat expected_null_vector() { return reference::mat({{"0"}, {"0"}, {"1"}, {"-2"}}); }

/// Same column span as the expected vector (canonical bases are unique).
inline bool spans_expected_null_space(const RatMat& basis) {
  return basis.cols() == 1 && basis == canonical_column_basis(expected_null_vector());
}

inline Check identifiability_at_phi0() {
  Stopwatch sw;
  const IdentReport rep = check_identifiable_at(reference::nds(), reference::phi_0());
  Check c{1, "not identifiable at Phi_0, null space (0,0,1,-2)"};
  c.seconds = sw.seconds();
  c.pass = rep.verdict == Verdict::NotIdentifiable && spans_expected_null_space(rep.null_basis) && c.seconds < 10;
  c.detail = std::string("case ") + to_string(rep.tag.kind) + ", verdict " + to_string(rep.verdict) +
             ", null dim " + std::to_string(rep.null_basis.cols());
  return c;
}

inline Check region_membership() {
  Stopwatch sw;
  const auto nds = reference::nds();
  const UndiffRegion reg = undiff_region(check_identifiable_at(nds, reference::phi_0()), reference::phi_0());
  const bool u_in = reg.contains(reference::phi_u()), i_in = reg.contains(reference::phi_i());
  Check c{2, "Phi_u in region, Phi_i not in region"};
  c.pass = u_in && !i_in;
  c.detail = std::string("Phi_u ") + (u_in ? "inside" : "outside") + ", Phi_i " + (i_in ? "inside" : "outside");
  c.seconds = sw.seconds();
  return c;
}

inline Check tfm_oracle() {
  Stopwatch sw;
  const auto nds = reference::nds();
  const RatFunMat h0 = nds_tfm(nds, reference::phi_0());
  const bool eq_u = tfm_equal(h0, nds_tfm(nds, reference::phi_u()));
  const bool eq_i = tfm_equal(h0, nds_tfm(nds, reference::phi_i()));
  Check c{3, "H(Phi_0) = H(Phi_u) and H(Phi_0) != H(Phi_i)"};
  c.seconds = sw.seconds();
  c.pass = eq_u && !eq_i && c.seconds < 10;
  c.detail = std::string("H(Phi_u) ") + (eq_u ? "equal" : "differs") + ", H(Phi_i) " + (eq_i ? "equal" : "differs");
  return c;
}

inline Check reconstructibility() {
  Stopwatch sw;
  const ReconReport rep = check_reconstructible(reference::nds());
  Check c{4, "per-subsystem K FCR and L FRR"};
  c.pass = rep.reconstructible;
  for (std::size_t i = 0; i < rep.per_subsystem.size(); ++i) {
    const auto& r = rep.per_subsystem[i];
    c.detail += "subsystem " + std::to_string(i + 1) + ": rank K " + std::to_string(r.K_rank) + ", rank L " +
                std::to_string(r.L_rank) + "; ";
  }
  if (!c.detail.empty()) c.detail.resize(c.detail.size() - 2);
  c.seconds = sw.seconds();
  return c;
}

inline bool fixture_round_trips() {
  const auto nds = reference::nds();
  for (const auto& phi : {reference::phi_0(), reference::phi_u(), reference::phi_i()})
    if (recover_scm(nds, lump(nds, phi)) != phi) return false;
  return true;
}

/// Paired simulation of Φ₀ against another SCM under one shared PRBS.
struct PairedRun {
  Sampling sampling;
  Trajectory a, b;
  Eigen::MatrixXd rel;
  Eigen::VectorXd max_rel;
  double d_T = 0.0;
  std::optional<FreqPeak> d_F;
  StabilityMargins margins_a, margins_b;
};

inline PairedRun paired_run(const NdsDefinition& nds, const SCMatrix& phi_a, const SCMatrix& phi_b,
                            std::uint64_t seed, double amplitude = 10.0,
                            std::optional<std::size_t> samples = std::nullopt) {
  const StateSpace sa = state_space(nds, phi_a), sb = state_space(nds, phi_b);
  PairedRun r;
  r.margins_a = stability_margins(sa.A, nds.time_domain);
  r.margins_b = stability_margins(sb.A, nds.time_domain);
  r.sampling = nds.time_domain == TimeDomain::Continuous ? choose_sampling(sa.A, sb.A) : Sampling{1.0, kMinSamples};
  if (samples) r.sampling.M = *samples;
  SimConfig cfg;
  cfg.T = r.sampling.T;
  cfg.M = r.sampling.M;
  cfg.seed = seed;
  cfg.amplitude = amplitude;
  const Eigen::MatrixXd u = prbs(seed, cfg.M, nds.m_u(), amplitude);
  r.a = simulate(sa, u, cfg);
  r.b = simulate(sb, u, cfg);
  r.rel = relative_error(r.a, r.b);
  r.max_rel = max_relative_error(r.rel);
  r.d_T = distance_time(r.a, r.b);
  if (r.margins_a.stable && r.margins_b.stable) r.d_F = distance_freq(nds, phi_a, phi_b);
  return r;
}

inline Check simulation_discrimination(const PairedRun& run_u, const PairedRun& run_i, double seconds) {
  Check c{6, "max rel. error: Phi_u <= 1e-6, Phi_i >= 10"};
  const double eu = run_u.max_rel.maxCoeff(), ei = run_i.max_rel.maxCoeff();
  c.pass = eu <= 1e-6 && ei >= 10 && seconds < 120;
  c.detail = "Phi_u " + format_double(eu) + ", Phi_i " + format_double(ei) + ", M " +
             std::to_string(run_u.sampling.M) + "/" + std::to_string(run_i.sampling.M);
  c.seconds = seconds;
  return c;
}

struct DirectionSweep {
  SCMatrix phi_tilde;
  std::vector<SweepPoint> points;
};

/// d_S(τ) = τ·d_S(1) over the retained samples.
inline bool ds_is_linear(const DirectionSweep& s, const UndiffRegion& region, double tol = 1e-9) {
  const double d1 = distance_scm(s.phi_tilde, region);
  for (const auto& p : s.points) {
    if (p.skipped) continue;
    const double want = p.tau.get_d() * d1;
    if (std::abs(p.d_S - want) > tol * std::max(want, 1e-300) && !(want == 0 && p.d_S == 0)) return false;
  }
  return true;
}

/// Retained samples ordered by d_F: d_T rises to one peak, then falls, each step within `tol` relative.
inline bool dt_unimodal_in_df(const DirectionSweep& s, double tol = 0.05) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : s.points)
    if (!p.skipped) pts.emplace_back(p.d_F, p.d_T);
  std::sort(pts.begin(), pts.end());
  if (pts.size() < 2) return true;
  std::size_t peak = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i].second > pts[peak].second) peak = i;
  double high = 0.0;
  for (std::size_t i = 0; i <= peak; ++i) {
    if (pts[i].second < (1 - tol) * high) return false;
    high = std::max(high, pts[i].second);
  }
  double low = pts[peak].second;
  for (std::size_t i = peak; i < pts.size(); ++i) {
    if (pts[i].second > (1 + tol) * low) return false;
    low = std::min(low, pts[i].second);
  }
  return true;
}

/// Recomputes stability and regularity independently of the sweep.
inline bool skips_match(const NdsDefinition& nds, const SCMatrix& phi0, const DirectionSweep& s) {
  for (const auto& p : s.points) {
    const SCMatrix phi = sweep_scm(phi0, s.phi_tilde, p.tau);
    bool bad = !check_nds_regular(nds, phi);
    if (!bad) {
      const Eigen::VectorXcd ev = eig(stm(nds, phi));
      for (Eigen::Index k = 0; k < ev.size(); ++k) bad = bad || !(ev(k).real() < -kStabilityEps);
    }
    if (bad != p.skipped) return false;
  }
  return true;
}

inline const SweepPoint* max_df_point(const DirectionSweep& s) {
  const SweepPoint* best = nullptr;
  for (const auto& p : s.points)
    if (!p.skipped && (!best || p.d_F > best->d_F)) best = &p;
  return best;
}

inline std::vector<DirectionSweep> sweep_directions(const NdsDefinition& nds, const SCMatrix& phi0,
                                                    const std::vector<SCMatrix>& directions,
                                                    const std::vector<Rat>& taus, const SweepConfig& cfg,
                                                    const UndiffRegion& region) {
  std::vector<DirectionSweep> out;
  for (const auto& d : directions) out.push_back({d, tau_sweep(nds, phi0, d, taus, cfg, region)});
  return out;
}

inline Check sweep_properties(const NdsDefinition& nds, const SCMatrix& phi0, const std::vector<DirectionSweep>& sw,
                              const UndiffRegion& region, double seconds, double budget) {
  Check c{7, "sweep: d_S linear, d_T unimodal in d_F, skips exact"};
  bool lin = true, uni = true, skip = true;
  for (std::size_t k = 0; k < sw.size(); ++k) {
    const bool l = ds_is_linear(sw[k], region), u = dt_unimodal_in_df(sw[k]), s = skips_match(nds, phi0, sw[k]);
    std::size_t kept = 0;
    for (const auto& p : sw[k].points) kept += !p.skipped;
    c.detail += "k=" + std::to_string(k + 1) + ": " + std::to_string(kept) + "/" +
                std::to_string(sw[k].points.size()) + " kept" + (l ? "" : ", d_S nonlinear") +
                (u ? "" : ", d_T not unimodal") + (s ? "" : ", skip mismatch") + "; ";
    lin = lin && l;
    uni = uni && u;
    skip = skip && s;
  }
  if (!c.detail.empty()) c.detail.resize(c.detail.size() - 2);
  c.seconds = seconds;
  c.pass = lin && uni && skip && seconds < budget;
  return c;
}

inline Check peak_frequency_distance(const DirectionSweep& first) {
  Check c{8, "max d_F for the first direction = 179.20 within 1%"};
  const SweepPoint* p = max_df_point(first);
  if (!p) {
    c.detail = "no retained samples";
    return c;
  }
  c.pass = std::abs(p->d_F - reference::kPeakFreqDistance) <= 0.01 * reference::kPeakFreqDistance;
  c.detail = "d_F " + format_double(p->d_F) + " at tau " + to_string(p->tau) + " (omega " +
             format_double(p->omega_peak) + ")";
  for (const auto& q : first.points)
    if (q.skipped && std::abs(q.tau.get_d() - p->tau.get_d()) < 0.15)
      c.detail += "; tau " + to_string(q.tau) + " skipped (" + q.reason + ")";
  return c;
}

inline json check_json(const Check& c) {
  return {{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}, {"seconds", c.seconds}};
}

inline std::string check_line(const Check& c) {
  return std::string(c.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(c.id) + ": " + c.name + " [" +
         c.detail + "]";
}

}  // namespace ndscope::study
