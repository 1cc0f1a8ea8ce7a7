#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ndscope/cli.hpp"

namespace cli = ndscope::cli;

namespace {

/// Optional string option: unset stays std::nullopt.
CLI::Option* opt_string(CLI::App* app, const std::string& name, std::optional<std::string>& target,
                        const std::string& help) {
  return app->add_option_function<std::string>(name, [&target](const std::string& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ndscope: identifiability, reconstruction and simulation of networked dynamic systems"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  std::optional<std::string> report_path;
  app.add_option("--report", report_path, "also write the JSON report to this file");

  cli::IdentOptions ident;
  auto* c_ident = app.add_subcommand("check-identifiability", "identifiability verdict at a given SCM");
  c_ident->add_option("model", ident.model, "model JSON")->required();
  opt_string(c_ident, "--scm", ident.scm, "SCM file or inline \"a,b;c,d\"");
  opt_string(c_ident, "--constraints", ident.constraints, "known_entries or affine constraint JSON");
  c_ident->add_flag("--augmented", ident.augmented, "use the augmented pencil with a random P");
  c_ident->add_option("--seed", seed, "RNG seed (default NDSCOPE_SEED or 0)");
  c_ident->add_flag("--strict", ident.strict, "exit 1 when not identifiable");

  cli::RegionOptions reg;
  auto* c_reg = app.add_subcommand("region", "basis of the undifferentiable SCM region");
  c_reg->add_option("model", reg.model, "model JSON")->required();
  opt_string(c_reg, "--scm", reg.scm, "SCM file or inline matrix");
  c_reg->add_option("--samples", reg.samples, "random region members to verify by TFM");
  c_reg->add_option("--seed", seed, "RNG seed");
  c_reg->add_flag("--strict", reg.strict, "exit 1 when the region is trivial");

  cli::ReconstructOptions rec;
  auto* c_rec = app.add_subcommand("reconstruct", "recover the SCM from a lumped model");
  c_rec->add_option("model", rec.model, "model JSON")->required();
  c_rec->add_option("--lumped", rec.lumped, "lumped model JSON")->required();
  c_rec->add_flag("--strict", rec.strict, "exit 1 when not reconstructible or inconsistent");

  cli::LumpOptions lmp;
  auto* c_lump = app.add_subcommand("lump", "lumped model of the NDS at an SCM");
  c_lump->add_option("model", lmp.model, "model JSON")->required();
  opt_string(c_lump, "--scm", lmp.scm, "SCM file or inline matrix");
  c_lump->add_flag("--descriptor", lmp.descriptor, "keep the internal signals as descriptor states");
  opt_string(c_lump, "--out", lmp.out, "write the lumped model JSON here");

  cli::SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "paired PRBS simulation of two SCMs");
  c_sim->add_option("model", sim.model, "model JSON")->required();
  c_sim->add_option("--scm-a", sim.scm_a, "first SCM")->required();
  c_sim->add_option("--scm-b", sim.scm_b, "second SCM")->required();
  c_sim->add_option("--seed", seed, "PRBS seed");
  c_sim->add_option("--amplitude", sim.amplitude, "PRBS amplitude");
  c_sim->add_option_function<std::size_t>("--samples", [&sim](std::size_t m) { sim.samples = m; },
                                          "override the number of samples");
  c_sim->add_option("--out-dir", sim.out_dir, "artifact directory");

  cli::SweepOptions swp;
  auto* c_swp = app.add_subcommand("sweep", "distance sweep along SCM directions");
  c_swp->add_option("model", swp.model, "model JSON")->required();
  opt_string(c_swp, "--scm0", swp.scm0, "base SCM (default: the model's scm)");
  c_swp->add_option("--directions", swp.directions, "directions JSON, or 'paper' for the built-in set");
  c_swp->add_option("--tau", swp.tau, "tau grid lo:step:hi");
  c_swp->add_option("--seed", seed, "PRBS seed");
  c_swp->add_option("--jobs", swp.jobs, "worker threads")->check(CLI::PositiveNumber);
  c_swp->add_option("--grid-points", swp.grid_points, "frequency grid size")->check(CLI::PositiveNumber);
  c_swp->add_option("--out-dir", swp.out_dir, "artifact directory");

  cli::ReproduceOptions rep;
  auto* c_rep = app.add_subcommand("reproduce-paper", "run every check on the built-in example network");
  c_rep->add_option("--out-dir", rep.out_dir, "artifact directory");
  c_rep->add_option("--tau", rep.tau, "tau grid lo:step:hi");
  c_rep->add_option("--seed", seed, "PRBS seed");
  c_rep->add_option("--jobs", rep.jobs, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kInputError;
  }

  cli::CommandOutcome out;
  const std::string name = app.get_subcommands().front()->get_name();
  out = cli::guarded(name, [&]() -> cli::CommandOutcome {
    const std::uint64_t s = seed ? *seed : cli::default_seed();
    if (name == "check-identifiability") {
      ident.seed = s;
      return cli::check_identifiability(ident);
    }
    if (name == "region") {
      reg.seed = s;
      return cli::region(reg);
    }
    if (name == "reconstruct") return cli::reconstruct(rec);
    if (name == "lump") return cli::lump_cmd(lmp);
    if (name == "simulate") {
      sim.seed = s;
      return cli::simulate_cmd(sim);
    }
    if (name == "sweep") {
      swp.seed = s;
      return cli::sweep_cmd(swp);
    }
    rep.seed = s;
    return cli::reproduce(rep);
  });
  const std::string text = cli::dump(out.report);
  std::cout << text;
  if (out.exit_code >= cli::kInputError) std::cerr << "error: " << out.report["error"]["message"].get<std::string>() << "\n";
  if (report_path) {
    try {
      ndscope::write_file_atomic(*report_path, text);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return cli::kInputError;
    }
  }
  return out.exit_code;
}
