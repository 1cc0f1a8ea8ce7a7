#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "ndscope/identifiability.hpp"
#include "ndscope/numeric.hpp"
#include "ndscope/reconstruction.hpp"

namespace ndscope {

/// Lumped closed loop with E folded in: δx = A x + B u, y = C x + D u.
struct StateSpace {
  Eigen::MatrixXd A, B, C, D;
  TimeDomain domain = TimeDomain::Continuous;
};

inline StateSpace state_space(const LumpedModel& m, TimeDomain domain) {
  if (determinant(m.E) == 0) throw SingularE("lumped E is singular; only index-0 models can be simulated");
  const RatMat e_inv = inverse(m.E);
  return {to_eigen(e_inv * m.A), to_eigen(e_inv * m.B), to_eigen(m.C), to_eigen(m.D), domain};
}

inline StateSpace state_space(const NdsDefinition& nds, const SCMatrix& phi) {
  return state_space(lump(nds, phi), nds.time_domain);
}

/// A(Φ) = Ê⁻¹Â.
inline Eigen::MatrixXd stm(const NdsDefinition& nds, const SCMatrix& phi) { return state_space(nds, phi).A; }

struct Sampling {
  double T = 0.0;
  std::size_t M = 0;
};

inline constexpr std::size_t kMinSamples = 10000;

/// T = 0.1 / max ρ_max,  M = max(10⁴, ⌊100 · max ρ_max / min ρ_min⌋).
inline Sampling choose_sampling(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2) {
  const auto m1 = stability_margins(a1), m2 = stability_margins(a2);
  const double rho_max = std::max(m1.rho_max, m2.rho_max);
  const double rho_min = std::min(m1.rho_min, m2.rho_min);
  if (a1.size() == 0 || a2.size() == 0 || rho_max == 0.0 || rho_min <= 1e-14 * rho_max)
    throw ZeroSpectrum("an STM has a zero eigenvalue; sampling rules are undefined");
  Sampling s;
  s.T = 0.1 / rho_max;
  const double ratio = std::floor(100.0 * rho_max / rho_min);
  if (!(ratio < 1e12)) throw ZeroSpectrum("eigenvalue spread too large for the sampling rule");
  s.M = std::max(kMinSamples, static_cast<std::size_t>(ratio));
  return s;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct XorShift64Star {
  std::uint64_t state;

  std::uint64_t next() {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545F4914F6CDD1DULL;
  }
};

}  // namespace detail

/// ±amplitude binary signal, one independent xorshift64* substream per channel.
inline Eigen::MatrixXd prbs(std::uint64_t seed, std::size_t m, std::size_t channels, double amplitude) {
  Eigen::MatrixXd u(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(channels));
  for (std::size_t c = 0; c < channels; ++c) {
    std::uint64_t s = seed ^ (0xD1B54A32D192ED03ULL * (c + 1));
    detail::XorShift64Star gen{detail::splitmix64(s)};
    if (gen.state == 0) gen.state = 1;
    for (std::size_t k = 0; k < m; ++k)
      u(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = (gen.next() >> 63) ? amplitude : -amplitude;
  }
  return u;
}

struct SimConfig {
  double T = 1.0;
  std::size_t M = 1;
  std::uint64_t seed = 0;
  double amplitude = 10.0;
  Eigen::VectorXd x0;  // empty means zero
};

/// Row k holds the sample at t = kT; x is the state before u(k) is applied.
struct Trajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXd u, y, x;
};

/// ZOH for continuous time; discrete models iterate their own difference equation.
inline Trajectory simulate(const StateSpace& ss, const Eigen::MatrixXd& u, const SimConfig& cfg) {
  const Eigen::Index n = ss.A.rows(), nu = ss.B.cols();
  if (cfg.M < 1 || !(cfg.T > 0)) throw ShapeError("simulate: need T > 0 and M ≥ 1");
  if (u.rows() != static_cast<Eigen::Index>(cfg.M) || u.cols() != nu)
    throw ShapeError("simulate: input is " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) +
                     ", expected " + std::to_string(cfg.M) + "x" + std::to_string(nu));
  if (cfg.x0.size() != 0 && cfg.x0.size() != n) throw ShapeError("simulate: x0 has the wrong length");
  Eigen::MatrixXd ad, bd;
  if (ss.domain == TimeDomain::Continuous) {
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + nu, n + nu);
    aug.topLeftCorner(n, n) = ss.A * cfg.T;
    aug.topRightCorner(n, nu) = ss.B * cfg.T;
    const Eigen::MatrixXd e = expm(aug);
    ad = e.topLeftCorner(n, n);
    bd = e.topRightCorner(n, nu);
  } else {
    ad = ss.A;
    bd = ss.B;
  }
  Trajectory tr;
  const auto rows = static_cast<Eigen::Index>(cfg.M);
  tr.times.resize(rows);
  tr.u = u;
  tr.x.resize(rows, n);
  tr.y.resize(rows, ss.C.rows());
  Eigen::VectorXd x = cfg.x0.size() ? cfg.x0 : Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const Eigen::VectorXd uk = u.row(k).transpose();
    tr.times(k) = static_cast<double>(k) * cfg.T;
    tr.x.row(k) = x.transpose();
    tr.y.row(k) = (ss.C * x + ss.D * uk).transpose();
    x = ad * x + bd * uk;
  }
  return tr;
}

inline Trajectory simulate(const NdsDefinition& nds, const SCMatrix& phi, const Eigen::MatrixXd& u,
                           const SimConfig& cfg) {
  return simulate(state_space(nds, phi), u, cfg);
}

namespace detail {

inline void same_outputs(const Trajectory& a, const Trajectory& b, const char* what) {
  if (a.y.rows() != b.y.rows() || a.y.cols() != b.y.cols())
    throw ShapeError(std::string(what) + ": trajectories have different shapes");
}

}  // namespace detail

inline constexpr double kRelErrFloor = 1e-12;

/// |y₂ − y₁| / |y₁| per sample and channel; NaN where |y₁| < 1e−12.
inline Eigen::MatrixXd relative_error(const Trajectory& y1, const Trajectory& y2) {
  detail::same_outputs(y1, y2, "relative_error");
  Eigen::MatrixXd e(y1.y.rows(), y1.y.cols());
  for (Eigen::Index k = 0; k < e.rows(); ++k)
    for (Eigen::Index j = 0; j < e.cols(); ++j) {
      const double ref = std::abs(y1.y(k, j));
      e(k, j) = ref < kRelErrFloor ? std::numeric_limits<double>::quiet_NaN()
                                   : std::abs(y2.y(k, j) - y1.y(k, j)) / ref;
    }
  return e;
}

/// Per-channel maximum over the defined samples (0 if none).
inline Eigen::VectorXd max_relative_error(const Eigen::MatrixXd& e) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(e.cols());
  for (Eigen::Index j = 0; j < e.cols(); ++j)
    for (Eigen::Index k = 0; k < e.rows(); ++k)
      if (!std::isnan(e(k, j))) out(j) = std::max(out(j), e(k, j));
  return out;
}

/// (1/M) Σ_t ‖y₂(t) − y₁(t)‖.
inline double distance_time(const Trajectory& y1, const Trajectory& y2) {
  detail::same_outputs(y1, y2, "distance_time");
  if (y1.y.rows() == 0) return 0.0;
  return (y2.y - y1.y).rowwise().norm().mean();
}

struct FreqGrid {
  std::size_t points = 2000;
  double lo = 1e-3, hi = 1e3;
  double rel_tol = 1e-6;
};

/// Continuous: [1e−3, 1e3] rad per time unit; discrete: [1e−3, π] on the unit circle.
inline FreqGrid default_grid(TimeDomain domain) {
  FreqGrid g;
  if (domain == TimeDomain::Discrete) g.hi = std::numbers::pi;
  return g;
}

/// Double-precision evaluator of an exact rational TFM.
class FrequencyResponse {
 public:
  FrequencyResponse(const RatFunMat& h, TimeDomain domain) : rows_(h.rows()), cols_(h.cols()), domain_(domain) {
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) {
        num_.push_back(coeffs(h(i, j).num()));
        den_.push_back(coeffs(h(i, j).den()));
      }
  }

  Eigen::MatrixXcd at_point(std::complex<double> s) const {
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) {
        const std::size_t k = i * cols_ + j;
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = horner(num_[k], s) / horner(den_[k], s);
      }
    return out;
  }

  /// s = iω, or z = e^{iω} in discrete time.
  Eigen::MatrixXcd at(double omega) const {
    return at_point(domain_ == TimeDomain::Continuous ? std::complex<double>(0.0, omega)
                                                      : std::polar(1.0, omega));
  }

  double sigma_max(double omega) const { return ndscope::sigma_max(at(omega)); }

  Eigen::VectorXd singular_values(double omega) const {
    const Eigen::MatrixXcd m = at(omega);
    if (m.size() == 0) return {};
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues();
  }

 private:
  static std::vector<double> coeffs(const Poly& p) {
    std::vector<double> c;
    for (int k = 0; k <= p.degree(); ++k) c.push_back(p.coeff(k).get_d());
    return c;
  }

  static std::complex<double> horner(const std::vector<double>& c, std::complex<double> s) {
    std::complex<double> acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
    return acc;
  }

  std::size_t rows_, cols_;
  TimeDomain domain_;
  std::vector<std::vector<double>> num_, den_;
};

inline std::vector<double> log_grid(const FreqGrid& g) {
  std::vector<double> w;
  const double a = std::log10(g.lo), b = std::log10(g.hi);
  for (std::size_t k = 0; k < g.points; ++k)
    w.push_back(std::pow(10.0, g.points == 1 ? a : a + (b - a) * static_cast<double>(k) / (g.points - 1)));
  return w;
}

struct FreqPeak {
  double value = 0.0;
  double omega = 0.0;
};

/// sup_ω σ̄(H(ω)) over ω = 0 and a log grid, refined by golden section around the grid maximum.
inline FreqPeak peak_gain(const RatFunMat& h, TimeDomain domain, const FreqGrid& grid) {
  if (h.is_zero()) return {};
  const FrequencyResponse fr(h, domain);
  std::vector<double> w{0.0};
  for (double x : log_grid(grid)) w.push_back(x);
  std::size_t best = 0;
  std::vector<double> vals;
  for (std::size_t k = 0; k < w.size(); ++k) {
    vals.push_back(fr.sigma_max(w[k]));
    if (vals[k] > vals[best]) best = k;
  }
  FreqPeak peak{vals[best], w[best]};
  double a = w[best > 0 ? best - 1 : 0], b = w[std::min(best + 1, w.size() - 1)];
  const double tol = grid.rel_tol * std::max(w[best], grid.lo);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = fr.sigma_max(c), fd = fr.sigma_max(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fr.sigma_max(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fr.sigma_max(d);
    }
  }
  for (auto [x, f] : {std::pair{c, fc}, std::pair{d, fd}})
    if (f > peak.value) peak = {f, x};
  return peak;
}

inline bool is_stable(const NdsDefinition& nds, const SCMatrix& phi) {
  return stability_margins(stm(nds, phi), nds.time_domain).stable;
}

/// H∞ norm of H(Φ₂) − H(Φ₁).
inline FreqPeak distance_freq(const NdsDefinition& nds, const SCMatrix& phi1, const SCMatrix& phi2,
                              const FreqGrid& grid) {
  const SubsystemTfms g = assemble_block_tfms(nds);
  for (const SCMatrix* phi : {&phi1, &phi2}) {
    nds.check_scm_shape(*phi);
    if (det_i_minus_gzv_phi(g, *phi).is_zero()) throw NotRegular("the NDS is not regular at the given SCM");
    if (!is_stable(nds, *phi)) throw Unstable("H∞ distance is undefined for an unstable NDS");
  }
  return peak_gain(nds_tfm(g, phi2) - nds_tfm(g, phi1), nds.time_domain, grid);
}

inline FreqPeak distance_freq(const NdsDefinition& nds, const SCMatrix& phi1, const SCMatrix& phi2) {
  return distance_freq(nds, phi1, phi2, default_grid(nds.time_domain));
}

/// Region {Φ₀}: used when the SCM is identifiable.
inline UndiffRegion trivial_region(const SCMatrix& phi0) { return {phi0, RatMat(phi0.rows(), 0), false}; }

/// σ̄ of the residual of Φ̃ − Φ₀ after orthogonal projection onto the region's direction span.
inline double distance_scm(const SCMatrix& phi_t, const UndiffRegion& region) {
  if (phi_t.rows() != region.phi0.rows() || phi_t.cols() != region.phi0.cols())
    throw ShapeError("SCM shape differs from region");
  RatMat delta = phi_t - region.phi0;
  if (region.row_oriented) delta = delta.transpose();
  RatMat residual = delta;
  if (region.basis.cols() > 0) {
    const RatMat& b = region.basis;
    const RatMat bt = b.transpose();
    residual = delta - b * (inverse(bt * b) * (bt * delta));
  }
  if (residual.is_zero()) return 0.0;
  return svd(to_eigen(residual)).max();
}

/// Region at Φ₀, or the trivial region when Φ₀ is identifiable.
inline UndiffRegion region_or_trivial(const NdsDefinition& nds, const SCMatrix& phi0) {
  const IdentReport rep = check_identifiable_at(nds, phi0);
  return rep.verdict == Verdict::NotIdentifiable ? undiff_region(rep, phi0) : trivial_region(phi0);
}

/// "lo:step:hi" with exact rational endpoints.
inline std::vector<Rat> tau_grid(const std::string& spec) {
  const auto a = spec.find(':'), b = spec.rfind(':');
  if (a == std::string::npos || a == b) throw ParseError("tau grid must be lo:step:hi, got '" + spec + "'");
  const Rat lo = parse_rational(spec.substr(0, a));
  const Rat step = parse_rational(spec.substr(a + 1, b - a - 1));
  const Rat hi = parse_rational(spec.substr(b + 1));
  if (step <= 0 || hi < lo) throw ParseError("tau grid needs step > 0 and hi ≥ lo");
  std::vector<Rat> out;
  for (Rat t = lo; t <= hi; t += step) out.push_back(t);
  return out;
}

struct SweepConfig {
  std::uint64_t seed = 0;
  double amplitude = 10.0;
  unsigned jobs = 1;
  std::optional<FreqGrid> grid;  // default_grid(domain) when empty
};

struct SweepPoint {
  std::size_t k = 0;
  Rat tau;
  bool skipped = false;
  std::string reason;  // "unstable", "not_regular", "not_well_posed"
  double d_T = 0.0, d_F = 0.0, d_S = 0.0;
  double omega_peak = 0.0;
  StabilityMargins margins;
  Sampling sampling;
};

/// Φ̃(τ) = Φ₀ + τ (Φ̃ − Φ₀).
inline SCMatrix sweep_scm(const SCMatrix& phi0, const SCMatrix& phi_tilde, const Rat& tau) {
  return phi0 + tau * (phi_tilde - phi0);
}

/// Every τ reuses the same PRBS seed; results do not depend on `jobs`.
inline std::vector<SweepPoint> tau_sweep(const NdsDefinition& nds, const SCMatrix& phi0, const SCMatrix& phi_tilde,
                                         const std::vector<Rat>& taus, const SweepConfig& cfg,
                                         const UndiffRegion& region) {
  nds.check_scm_shape(phi0);
  nds.check_scm_shape(phi_tilde);
  const SubsystemTfms g = assemble_block_tfms(nds);
  const RatFunMat h0 = nds_tfm(g, phi0);
  const StateSpace ss0 = state_space(nds, phi0);
  const FreqGrid grid = cfg.grid ? *cfg.grid : default_grid(nds.time_domain);

  std::vector<SweepPoint> out(taus.size());
  auto run = [&](std::size_t idx) {
    SweepPoint& p = out[idx];
    p.k = idx;
    p.tau = taus[idx];
    const SCMatrix phi = sweep_scm(phi0, phi_tilde, p.tau);
    if (det_i_minus_gzv_phi(g, phi).is_zero()) {
      p.skipped = true;
      p.reason = "not_regular";
      return;
    }
    if (!check_well_posed(nds, phi)) {
      p.skipped = true;
      p.reason = "not_well_posed";
      return;
    }
    const StateSpace ss = state_space(nds, phi);
    p.margins = stability_margins(ss.A, nds.time_domain);
    if (!p.margins.stable) {
      p.skipped = true;
      p.reason = "unstable";
      return;
    }
    p.d_S = distance_scm(phi, region);
    const FreqPeak f = peak_gain(nds_tfm(g, phi) - h0, nds.time_domain, grid);
    p.d_F = f.value;
    p.omega_peak = f.omega;
    if (nds.time_domain == TimeDomain::Continuous) {
      p.sampling = choose_sampling(ss0.A, ss.A);
    } else {
      p.sampling = {1.0, kMinSamples};
    }
    SimConfig sc;
    sc.T = p.sampling.T;
    sc.M = p.sampling.M;
    sc.seed = cfg.seed;
    sc.amplitude = cfg.amplitude;
    const Eigen::MatrixXd u = prbs(cfg.seed, sc.M, nds.m_u(), cfg.amplitude);
    p.d_T = distance_time(simulate(ss0, u, sc), simulate(ss, u, sc));
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(taus.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < taus.size(); ++i) run(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < taus.size();) run(i);
      } catch (...) {
        errors[t] = std::current_exception();
        next = taus.size();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline std::vector<SweepPoint> tau_sweep(const NdsDefinition& nds, const SCMatrix& phi0, const SCMatrix& phi_tilde,
                                         const std::vector<Rat>& taus, const SweepConfig& cfg = {}) {
  return tau_sweep(nds, phi0, phi_tilde, taus, cfg, region_or_trivial(nds, phi0));
}

}  // namespace ndscope
