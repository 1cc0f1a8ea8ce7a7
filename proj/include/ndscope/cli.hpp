#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ndscope/artifacts.hpp"
#include "ndscope/model_io.hpp"
#include "ndscope/study.hpp"

/// Command implementations behind the `ndscope` executable.
namespace ndscope::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kNegative = 1, kInputError = 2, kNumericalError = 3 };

struct CommandOutcome {
  int exit_code = kOk;
  json report;
  std::vector<std::string> artifacts;
};

/// NDSCOPE_SEED when set, else 0.
inline std::uint64_t default_seed() {
  const char* env = std::getenv("NDSCOPE_SEED");
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("NDSCOPE_SEED is not an unsigned integer: '") + env + "'");
  }
}

inline json num_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json margins_json(const StabilityMargins& m) {
  return {{"stable", m.stable}, {"discrete", m.discrete}, {"s_mr", num_or_null(m.s_mr)},
          {"s_md", num_or_null(m.s_md)}, {"rho_max", m.rho_max}, {"rho_min", m.rho_min}};
}

inline json sizes_json(const std::vector<std::size_t>& v) {
  json a = json::array();
  for (auto x : v) a.push_back(x);
  return a;
}

inline json lumped_json(const LumpedModel& m) {
  return {{"E", io::from_mat(m.E)}, {"A", io::from_mat(m.A)}, {"B", io::from_mat(m.B)},
          {"C", io::from_mat(m.C)}, {"D", io::from_mat(m.D)}};
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Runs a command, mapping library errors to exit codes and an error report.
inline CommandOutcome guarded(const std::string& command, const std::function<CommandOutcome()>& body) {
  auto fail = [&](int code, const std::string& type, const std::string& what) {
    CommandOutcome out;
    out.exit_code = code;
    out.report = {{"command", command}, {"status", "error"}, {"error", {{"type", type}, {"message", what}}}};
    return out;
  };
  try {
    CommandOutcome out = body();
    out.report["artifacts"] = out.artifacts;
    return out;
  }
#define NDSCOPE_MAP(Type, code) \
  catch (const Type& e) {       \
    return fail(code, #Type, e.what()); \
  }
  NDSCOPE_MAP(NoConvergence, kNumericalError)
  NDSCOPE_MAP(SingularMatrix, kNumericalError)
  NDSCOPE_MAP(ParseError, kInputError)
  NDSCOPE_MAP(SchemaError, kInputError)
  NDSCOPE_MAP(DimensionError, kInputError)
  NDSCOPE_MAP(ShapeError, kInputError)
  NDSCOPE_MAP(IndexError, kInputError)
  NDSCOPE_MAP(NotRegular, kInputError)
  NDSCOPE_MAP(NotWellPosed, kInputError)
  NDSCOPE_MAP(WrongCase, kInputError)
  NDSCOPE_MAP(ZeroDiagonal, kInputError)
  NDSCOPE_MAP(NotReconstructible, kInputError)
  NDSCOPE_MAP(SingularE, kInputError)
  NDSCOPE_MAP(Unstable, kInputError)
  NDSCOPE_MAP(ZeroSpectrum, kInputError)
  NDSCOPE_MAP(Error, kInputError)
  NDSCOPE_MAP(fs::filesystem_error, kInputError)
  NDSCOPE_MAP(std::exception, kNumericalError)
#undef NDSCOPE_MAP
}

namespace detail {

inline SCMatrix scm_or_model(const ModelFile& mf, const std::optional<std::string>& arg, const char* flag) {
  SCMatrix phi;
  if (arg) phi = parse_scm_arg(*arg);
  else if (mf.scm) phi = *mf.scm;
  else throw SchemaError(std::string("no SCM given: pass ") + flag + " or add \"scm\" to the model");
  mf.nds.check_scm_shape(phi);
  return phi;
}

inline json report_body(const IdentReport& rep) {
  json j;
  j["case"] = to_string(rep.tag.kind);
  j["normal_ranks"] = {{"G_zu", sizes_json(rep.tag.rank_zu)}, {"G_yv", sizes_json(rep.tag.rank_yv)}};
  j["verdict"] = to_string(rep.verdict);
  j["identifiable"] = rep.identifiable();
  j["well_posed"] = rep.well_posed;
  j["row_oriented"] = rep.row_oriented;
  if (rep.stacked)
    j["stacked"] = {{"rows", rep.stacked->matrix.rows()}, {"cols", rep.stacked->matrix.cols()},
                    {"p", rep.stacked->p}, {"r", rep.stacked->r}};
  else
    j["stacked"] = nullptr;
  j["null_basis"] = io::from_mat(rep.null_basis);
  j["warnings"] = rep.warnings;
  return j;
}

inline fs::path out_path(const std::string& dir, const std::string& name) { return fs::path(dir) / name; }

}  // namespace detail

struct IdentOptions {
  std::string model;
  std::optional<std::string> scm, constraints;
  bool augmented = false;
  bool strict = false;
  std::uint64_t seed = 0;
};

inline CommandOutcome check_identifiability(const IdentOptions& o) {
  const ModelFile mf = load_model(o.model);
  std::optional<ConstraintSpec> cons = mf.constraints;
  if (o.constraints) cons = io::to_constraints(io::parse_json_text(io::read_file(*o.constraints), *o.constraints), mf.nds);
  CommandOutcome out;
  json& r = out.report;
  r["command"] = "check-identifiability";
  IdentReport rep;
  std::string mode = "plain";
  SCMatrix phi0;
  if (cons && std::holds_alternative<AffineParam>(*cons)) {
    mode = "affine";
    const auto& ap = std::get<AffineParam>(*cons);
    rep = check_identifiable_parameterized(mf.nds, ap, ap.theta);
    phi0 = ap.at(ap.theta);
  } else {
    phi0 = detail::scm_or_model(mf, o.scm, "--scm");
    if (cons) {
      mode = "known_entries";
      rep = check_identifiable_known_entries(mf.nds, phi0, std::get<KnownEntries>(*cons));
    } else if (o.augmented) {
      mode = "augmented";
      rep = check_identifiable_augmented(mf.nds, phi0, std::nullopt, o.seed);
    } else {
      rep = check_identifiable_at(mf.nds, phi0);
    }
  }
  r["mode"] = mode;
  r["scm"] = io::from_mat(phi0);
  const json body = detail::report_body(rep);
  for (const auto& [k, v] : body.items()) r[k] = v;
  r["region_basis"] = mode == "plain" ? io::from_mat(rep.null_basis) : json(nullptr);
  if (mode == "known_entries") {
    json cols = json::array();
    for (const auto& c : rep.columns)
      cols.push_back({{"index", c.index + 1}, {"fcr", c.fcr}, {"null_basis", io::from_mat(c.null_basis)}});
    r["columns"] = cols;
  }
  if (mode == "affine") r["theta_basis"] = io::from_mat(rep.theta_basis);
  if (mode == "augmented") r["p_diag"] = io::from_rats(random_p_diag(rep.row_oriented ? phi0.rows() : phi0.cols(), o.seed));
  const bool negative = !rep.identifiable();
  r["status"] = negative ? "negative" : "ok";
  out.exit_code = negative && o.strict ? kNegative : kOk;
  return out;
}

struct RegionOptions {
  std::string model;
  std::optional<std::string> scm;
  std::size_t samples = 5;
  std::uint64_t seed = 0;
  bool strict = false;
};

inline CommandOutcome region(const RegionOptions& o) {
  const ModelFile mf = load_model(o.model);
  const SCMatrix phi0 = detail::scm_or_model(mf, o.scm, "--scm");
  const IdentReport rep = check_identifiable_at(mf.nds, phi0);
  CommandOutcome out;
  json& r = out.report;
  r["command"] = "region";
  r["verdict"] = to_string(rep.verdict);
  r["phi0"] = io::from_mat(phi0);
  if (rep.verdict != Verdict::NotIdentifiable) {
    r["status"] = "negative";
    r["trivial"] = true;
    r["message"] = "region is trivial";
    r["dimension"] = 0;
    r["basis"] = json::array();
    r["samples"] = json::array();
    out.exit_code = o.strict ? kNegative : kOk;
    return out;
  }
  const UndiffRegion reg = undiff_region(rep, phi0);
  r["status"] = "ok";
  r["trivial"] = false;
  r["row_oriented"] = reg.row_oriented;
  r["dimension"] = reg.dimension();
  r["basis"] = io::from_mat(reg.basis);
  const SubsystemTfms g = assemble_block_tfms(mf.nds);
  const RatFunMat h0 = nds_tfm(g, phi0);
  std::mt19937_64 rng(o.seed);
  const std::size_t gc = reg.row_oriented ? phi0.rows() : phi0.cols();
  json samples = json::array();
  bool all_equal = true;
  for (std::size_t s = 0; s < o.samples; ++s) {
    RatMat gamma(reg.dimension(), gc);
    for (std::size_t i = 0; i < gamma.rows(); ++i)
      for (std::size_t j = 0; j < gamma.cols(); ++j) gamma(i, j) = ndscope::detail::small_rat(rng);
    const SCMatrix phi = reg.member(gamma);
    json e = {{"index", s + 1}, {"gamma", io::from_mat(gamma)}, {"scm", io::from_mat(phi)}};
    try {
      const bool eq = tfm_equal(nds_tfm(g, phi), h0);
      e["regular"] = true;
      e["tfm_equal"] = eq;
      all_equal = all_equal && eq;
    } catch (const NotRegular&) {
      e["regular"] = false;
      e["tfm_equal"] = nullptr;
    }
    samples.push_back(std::move(e));
  }
  r["samples"] = samples;
  r["all_equal"] = all_equal;
  return out;
}

struct ReconstructOptions {
  std::string model, lumped;
  bool strict = false;
};

inline CommandOutcome reconstruct(const ReconstructOptions& o) {
  const ModelFile mf = load_model(o.model);
  const LumpedFile lf = parse_lumped(io::read_file(o.lumped));
  const LumpedModel m{lf.E ? *lf.E : mf.nds.block(&SubsystemRealization::E), lf.A, lf.B, lf.C, lf.D};
  CommandOutcome out;
  json& r = out.report;
  r["command"] = "reconstruct";
  const ReconReport rr = check_reconstructible(mf.nds);
  json subs = json::array();
  for (std::size_t i = 0; i < rr.per_subsystem.size(); ++i) {
    const auto& s = rr.per_subsystem[i];
    subs.push_back({{"index", i + 1}, {"K_rank", s.K_rank}, {"L_rank", s.L_rank}, {"K_fcr", s.K_fcr},
                    {"L_frr", s.L_frr}});
  }
  r["reconstructible"] = rr.reconstructible;
  r["subsystems"] = subs;
  r["consistency"] = nullptr;
  r["recovered_scm"] = nullptr;
  bool negative = !rr.reconstructible;
  if (rr.reconstructible) {
    const ConsistencyReport c = check_consistency(mf.nds, m);
    r["consistency"] = {{"cond_left", c.cond_left}, {"cond_right", c.cond_right}, {"cond_hm", c.cond_hm},
                        {"consistent", c.consistent}, {"H_m", io::from_mat(c.H_m)}};
    negative = !c.consistent;
    if (c.consistent) {
      try {
        r["recovered_scm"] = io::from_mat(recover_scm(mf.nds, m));
      } catch (const SingularRecovery& e) {
        r["message"] = e.what();
        negative = true;
      }
    }
  }
  r["status"] = negative ? "negative" : "ok";
  out.exit_code = negative && o.strict ? kNegative : kOk;
  return out;
}

struct LumpOptions {
  std::string model;
  std::optional<std::string> scm, out;
  bool descriptor = false;
};

inline CommandOutcome lump_cmd(const LumpOptions& o) {
  const ModelFile mf = load_model(o.model);
  const SCMatrix phi = detail::scm_or_model(mf, o.scm, "--scm");
  const LumpedModel m = o.descriptor ? lump_descriptor(mf.nds, phi) : lump(mf.nds, phi);
  CommandOutcome out;
  out.report = {{"command", "lump"}, {"status", "ok"}, {"descriptor", o.descriptor}, {"lumped", lumped_json(m)}};
  if (o.out) {
    write_file_atomic(*o.out, dump(lumped_json(m)));
    out.artifacts.push_back(*o.out);
  }
  return out;
}

struct SimulateOptions {
  std::string model, scm_a, scm_b;
  std::uint64_t seed = 0;
  double amplitude = 10.0;
  std::optional<std::size_t> samples;
  std::string out_dir = "out";
};

namespace detail {

inline std::vector<std::string> write_simulation(const study::PairedRun& run, const std::string& dir,
                                                 const std::string& label_a, const std::string& label_b) {
  const auto& a = run.a;
  const auto& b = run.b;
  const auto nu = a.u.cols(), ny = a.y.cols();
  std::vector<std::string> header{"t"};
  for (Eigen::Index j = 0; j < nu; ++j) header.push_back("u" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < ny; ++j) header.push_back("y_a" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < ny; ++j) header.push_back("y_b" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < ny; ++j) header.push_back("e_" + std::to_string(j + 1));
  CsvTable csv(header);
  for (Eigen::Index k = 0; k < a.y.rows(); ++k) {
    std::vector<std::string> row{format_double(a.times(k))};
    for (Eigen::Index j = 0; j < nu; ++j) row.push_back(format_double(a.u(k, j)));
    for (Eigen::Index j = 0; j < ny; ++j) row.push_back(format_double(a.y(k, j)));
    for (Eigen::Index j = 0; j < ny; ++j) row.push_back(format_double(b.y(k, j)));
    for (Eigen::Index j = 0; j < ny; ++j) row.push_back(std::isnan(run.rel(k, j)) ? "" : format_double(run.rel(k, j)));
    csv.add_row(std::move(row));
  }
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& content) {
    const fs::path p = out_path(dir, name);
    write_file_atomic(p, content);
    files.push_back(p.string());
  };
  put("traces.csv", csv.str());

  const std::vector<double> t(a.times.data(), a.times.data() + a.times.size());
  SvgPlot outputs;
  outputs.title = "External outputs";
  outputs.xlabel = "t";
  outputs.ylabel = "y";
  for (Eigen::Index j = 0; j < ny; ++j) {
    const Eigen::VectorXd ya = a.y.col(j), yb = b.y.col(j);
    outputs.add({label_a + " y" + std::to_string(j + 1), t, {ya.data(), ya.data() + ya.size()}});
    outputs.add({label_b + " y" + std::to_string(j + 1), t, {yb.data(), yb.data() + yb.size()}});
  }
  put("outputs.svg", outputs.render());
  SvgPlot rel;
  rel.title = "Relative output difference";
  rel.xlabel = "t";
  rel.ylabel = "e";
  rel.logy = true;
  for (Eigen::Index j = 0; j < ny; ++j) {
    const Eigen::VectorXd e = run.rel.col(j);
    rel.add({"e" + std::to_string(j + 1), t, {e.data(), e.data() + e.size()}});
  }
  put("relative_error.svg", rel.render());
  return files;
}

inline json simulation_metrics(const study::PairedRun& run, std::uint64_t seed, double amplitude) {
  json j;
  j["seed"] = seed;
  j["amplitude"] = amplitude;
  j["T"] = run.sampling.T;
  j["M"] = run.sampling.M;
  j["d_T"] = run.d_T;
  j["d_F"] = run.d_F ? json(run.d_F->value) : json(nullptr);
  j["omega_peak"] = run.d_F ? json(run.d_F->omega) : json(nullptr);
  j["max_relative_error"] = std::vector<double>(run.max_rel.data(), run.max_rel.data() + run.max_rel.size());
  j["margins"] = {{"a", margins_json(run.margins_a)}, {"b", margins_json(run.margins_b)}};
  return j;
}

}  // namespace detail

inline CommandOutcome simulate_cmd(const SimulateOptions& o) {
  const ModelFile mf = load_model(o.model);
  const SCMatrix a = parse_scm_arg(o.scm_a), b = parse_scm_arg(o.scm_b);
  mf.nds.check_scm_shape(a, "--scm-a");
  mf.nds.check_scm_shape(b, "--scm-b");
  for (const SCMatrix* phi : {&a, &b})
    if (!check_nds_regular(mf.nds, *phi)) throw NotRegular("the NDS is not regular at the given SCM");
  const study::PairedRun run = study::paired_run(mf.nds, a, b, o.seed, o.amplitude, o.samples);
  if (!run.margins_a.stable || !run.margins_b.stable) throw Unstable("simulation needs both NDSs stable");
  CommandOutcome out;
  out.artifacts = detail::write_simulation(run, o.out_dir, "a", "b");
  out.report = {{"command", "simulate"}, {"status", "ok"}};
  const json metrics_body = detail::simulation_metrics(run, o.seed, o.amplitude);
  for (const auto& [k, v] : metrics_body.items()) out.report[k] = v;
  const fs::path metrics = detail::out_path(o.out_dir, "metrics.json");
  out.artifacts.push_back(metrics.string());
  json copy = out.report;
  copy["artifacts"] = out.artifacts;
  write_file_atomic(metrics, dump(copy));
  return out;
}

struct SweepOptions {
  std::string model;
  std::optional<std::string> scm0;
  std::string directions = "paper";
  std::string tau = "0:0.1:20";
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::size_t grid_points = 2000;
  std::string out_dir = "out";
};

inline std::vector<SCMatrix> load_directions(const std::string& arg, const NdsDefinition& nds) {
  std::vector<SCMatrix> dirs;
  if (arg == "paper") {
    for (const auto& d : reference::phi_tilde()) dirs.push_back(d);
  } else {
    const json doc = io::parse_json_text(io::read_file(arg), arg);
    const json& list = doc.is_object() && doc.contains("directions") ? doc.at("directions") : doc;
    if (!list.is_array() || list.empty()) throw SchemaError(arg + ": expected a nonempty array of SCMs");
    for (const auto& d : list) dirs.push_back(io::to_mat(d, "directions"));
  }
  for (const auto& d : dirs) nds.check_scm_shape(d, "direction");
  return dirs;
}

namespace detail {

struct SweepRun {
  std::vector<study::DirectionSweep> sweeps;
  UndiffRegion region;
};

inline SweepRun run_sweep(const NdsDefinition& nds, const SCMatrix& phi0, const std::vector<SCMatrix>& dirs,
                          const std::vector<Rat>& taus, const SweepConfig& cfg) {
  UndiffRegion reg = region_or_trivial(nds, phi0);
  return {study::sweep_directions(nds, phi0, dirs, taus, cfg, reg), reg};
}

inline std::vector<double> column(const std::vector<SweepPoint>& pts, double SweepPoint::*f, bool skip_nan = true) {
  std::vector<double> v;
  for (const auto& p : pts) v.push_back(p.skipped && skip_nan ? std::nan("") : p.*f);
  return v;
}

inline std::vector<std::string> write_sweep(const NdsDefinition& nds, const SCMatrix& phi0, const SweepRun& run,
                                            const std::string& dir, json& report) {
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& content) {
    const fs::path p = out_path(dir, name);
    write_file_atomic(p, content);
    files.push_back(p.string());
  };
  CsvTable csv({"k", "tau", "d_T", "d_F", "d_S", "s_mr", "s_md", "skipped", "reason", "omega_peak", "T", "M"});
  json dirs = json::array();
  for (std::size_t k = 0; k < run.sweeps.size(); ++k) {
    const auto& s = run.sweeps[k];
    json skipped = json::array();
    std::size_t kept = 0;
    for (const auto& p : s.points) {
      auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
      if (p.skipped) {
        skipped.push_back(to_string(p.tau));
        csv.add_row({std::to_string(k + 1), to_string(p.tau), "", "", "", "", "", "1", p.reason, "", "", ""});
        continue;
      }
      ++kept;
      csv.add_row({std::to_string(k + 1), to_string(p.tau), format_double(p.d_T), format_double(p.d_F),
                   format_double(p.d_S), opt(p.margins.s_mr), opt(p.margins.s_md), "0", "",
                   format_double(p.omega_peak), format_double(p.sampling.T), std::to_string(p.sampling.M)});
    }
    json e = {{"k", k + 1}, {"phi_tilde", io::from_mat(s.phi_tilde)}, {"samples", s.points.size()},
              {"retained", kept}, {"skipped_tau", skipped}, {"d_S_at_1", distance_scm(s.phi_tilde, run.region)}};
    if (const SweepPoint* best = study::max_df_point(s)) {
      e["max_d_F"] = {{"tau", to_string(best->tau)}, {"value", best->d_F}, {"omega", best->omega_peak}};
      const SweepPoint* top = best;
      for (const auto& p : s.points)
        if (!p.skipped && p.d_T > top->d_T) top = &p;
      e["max_d_T"] = {{"tau", to_string(top->tau)}, {"value", top->d_T}};
    } else {
      e["max_d_F"] = nullptr;
      e["max_d_T"] = nullptr;
    }
    e["d_S_linear"] = study::ds_is_linear(s, run.region);
    e["d_T_unimodal_in_d_F"] = study::dt_unimodal_in_df(s);
    dirs.push_back(std::move(e));
  }
  report["directions"] = dirs;
  put("sweep.csv", csv.str());

  SvgPlot tf;
  tf.title = "Time vs frequency domain distance";
  tf.xlabel = "d_F";
  tf.ylabel = "d_T";
  tf.logx = tf.logy = true;
  SvgPlot tt;
  tt.title = "d_T and scaled stability margins vs tau";
  tt.xlabel = "tau";
  tt.ylabel = "scaled value";
  for (std::size_t k = 0; k < run.sweeps.size(); ++k) {
    const auto& pts = run.sweeps[k].points;
    const std::string tag = "k=" + std::to_string(k + 1);
    tf.add({tag, column(pts, &SweepPoint::d_F), column(pts, &SweepPoint::d_T), true});
    std::vector<double> tau, dt, mr, md;
    for (const auto& p : pts) {
      tau.push_back(p.tau.get_d());
      dt.push_back(p.skipped ? std::nan("") : p.d_T);
      mr.push_back(!p.skipped && p.margins.s_mr ? *p.margins.s_mr : std::nan(""));
      md.push_back(!p.skipped && p.margins.s_md ? *p.margins.s_md : std::nan(""));
    }
    auto scale = [](std::vector<double> v) {
      double m = 0;
      for (double x : v)
        if (std::isfinite(x)) m = std::max(m, std::abs(x));
      if (m > 0)
        for (double& x : v) x /= m;
      return v;
    };
    tt.add({"d_T " + tag, tau, scale(dt)});
    tt.add({"s_mr " + tag, tau, scale(mr)});
    tt.add({"s_md " + tag, tau, scale(md)});
  }
  put("dT_vs_dF.svg", tf.render());
  put("dT_margins_vs_tau.svg", tt.render(900, 520));

  // Singular values of the frequency response difference at the largest d_F of the first direction.
  if (!run.sweeps.empty()) {
    if (const SweepPoint* best = study::max_df_point(run.sweeps[0])) {
      const SCMatrix phi = sweep_scm(phi0, run.sweeps[0].phi_tilde, best->tau);
      const FrequencyResponse fr(nds_tfm(nds, phi) - nds_tfm(nds, phi0), nds.time_domain);
      FreqGrid g = default_grid(nds.time_domain);
      g.points = 400;
      const std::vector<double> w = log_grid(g);
      std::vector<std::vector<double>> sv;
      for (double x : w) {
        const Eigen::VectorXd s = fr.singular_values(x);
        if (sv.empty()) sv.resize(static_cast<std::size_t>(s.size()));
        for (Eigen::Index i = 0; i < s.size(); ++i) sv[static_cast<std::size_t>(i)].push_back(s(i));
      }
      SvgPlot sp;
      sp.title = "Singular values of the response difference, k=1, tau=" + to_string(best->tau);
      sp.xlabel = "omega";
      sp.ylabel = "sigma";
      sp.logx = sp.logy = true;
      for (std::size_t i = 0; i < sv.size(); ++i) sp.add({"sigma_" + std::to_string(i + 1), w, sv[i]});
      put("sigma_response_difference.svg", sp.render());
      report["sigma_plot"] = {{"k", 1}, {"tau", to_string(best->tau)}};
    }
  }
  return files;
}

}  // namespace detail

inline CommandOutcome sweep_cmd(const SweepOptions& o) {
  const ModelFile mf = load_model(o.model);
  const SCMatrix phi0 = detail::scm_or_model(mf, o.scm0, "--scm0");
  if (!check_nds_regular(mf.nds, phi0)) throw NotRegular("the NDS is not regular at the given SCM");
  const auto dirs = load_directions(o.directions, mf.nds);
  const auto taus = tau_grid(o.tau);
  SweepConfig cfg;
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  FreqGrid g = default_grid(mf.nds.time_domain);
  g.points = o.grid_points;
  cfg.grid = g;
  const auto run = detail::run_sweep(mf.nds, phi0, dirs, taus, cfg);
  CommandOutcome out;
  out.report = {{"command", "sweep"}, {"status", "ok"}, {"seed", o.seed}, {"tau", o.tau},
                {"grid_points", o.grid_points}, {"region_dimension", run.region.dimension()}};
  out.artifacts = detail::write_sweep(mf.nds, phi0, run, o.out_dir, out.report);
  const fs::path rp = detail::out_path(o.out_dir, "sweep.json");
  out.artifacts.push_back(rp.string());
  json copy = out.report;
  copy["artifacts"] = out.artifacts;
  write_file_atomic(rp, dump(copy));
  return out;
}

struct ReproduceOptions {
  std::string out_dir = "out";
  std::string tau = "0:0.1:20";
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

inline CommandOutcome reproduce(const ReproduceOptions& o) {
  const NdsDefinition nds = reference::nds();
  const SCMatrix phi0 = reference::phi_0();
  CommandOutcome out;
  std::vector<study::Check> checks;
  checks.push_back(study::identifiability_at_phi0());
  checks.push_back(study::region_membership());
  checks.push_back(study::tfm_oracle());
  checks.push_back(study::reconstructibility());
  {
    study::Check c{5, "recover_scm(lump(Phi)) = Phi for Phi_0, Phi_u, Phi_i"};
    c.pass = study::fixture_round_trips();
    c.detail = c.pass ? "exact" : "mismatch";
    checks.push_back(c);
  }
  study::Stopwatch sim_clock;
  const auto run_u = study::paired_run(nds, phi0, reference::phi_u(), o.seed);
  const auto run_i = study::paired_run(nds, phi0, reference::phi_i(), o.seed);
  checks.push_back(study::simulation_discrimination(run_u, run_i, sim_clock.seconds()));
  for (auto& f : detail::write_simulation(run_u, (fs::path(o.out_dir) / "sim_phi_u").string(), "Phi_0", "Phi_u"))
    out.artifacts.push_back(f);
  for (auto& f : detail::write_simulation(run_i, (fs::path(o.out_dir) / "sim_phi_i").string(), "Phi_0", "Phi_i"))
    out.artifacts.push_back(f);

  SweepConfig cfg;
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  const auto taus = tau_grid(o.tau);
  std::vector<SCMatrix> dirs;
  for (const auto& d : reference::phi_tilde()) dirs.push_back(d);
  study::Stopwatch sweep_clock;
  const auto run = detail::run_sweep(nds, phi0, dirs, taus, cfg);
  checks.push_back(study::sweep_properties(nds, phi0, run.sweeps, run.region, sweep_clock.seconds(), 1800));
  checks.push_back(study::peak_frequency_distance(run.sweeps[0]));
  json sweep_report;
  for (auto& f : detail::write_sweep(nds, phi0, run, (fs::path(o.out_dir) / "sweep").string(), sweep_report))
    out.artifacts.push_back(f);

  json r;
  r["command"] = "reproduce-paper";
  r["seed"] = o.seed;
  r["tau"] = o.tau;
  json cj = json::array();
  bool all = true;
  std::string text;
  for (const auto& c : checks) {
    json e = {{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}};
    cj.push_back(e);
    all = all && c.pass;
    text += study::check_line(c) + "\n";
  }
  r["checks"] = cj;
  r["comparisons"] = json::array({
      {{"quantity", "null space at Phi_0"}, {"expected", "span{(0,0,1,-2)}"},
       {"computed", checks[0].detail}},
      {{"quantity", "max d_F, first direction"}, {"expected", reference::kPeakFreqDistance},
       {"computed", checks[7].detail}},
      {{"quantity", "max relative error Phi_0 vs Phi_u"}, {"expected", "<= 1e-6"},
       {"computed", run_u.max_rel.maxCoeff()}},
      {{"quantity", "max relative error Phi_0 vs Phi_i"}, {"expected", ">= 10"},
       {"computed", run_i.max_rel.maxCoeff()}},
  });
  r["sweep"] = sweep_report;
  r["status"] = all ? "ok" : "negative";
  const fs::path summary = fs::path(o.out_dir) / "summary.json";
  const fs::path summary_txt = fs::path(o.out_dir) / "summary.txt";
  out.artifacts.push_back(summary.string());
  out.artifacts.push_back(summary_txt.string());
  r["artifacts"] = out.artifacts;
  write_file_atomic(summary, dump(r));
  write_file_atomic(summary_txt, text);
  out.report = r;
  out.exit_code = all ? kOk : kNegative;
  return out;
}

}  // namespace ndscope::cli
