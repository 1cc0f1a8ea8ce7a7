#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ndscope/study.hpp"
#include "properties.hpp"

using namespace ndscope;
using namespace ndscope::testing;

namespace {

study::Check from_suites(int id, const std::string& name, const std::vector<SuiteResult>& suites, int min_instances,
                         double seconds, double budget) {
  study::Check c{id, name};
  c.pass = seconds < budget;
  for (const auto& s : suites) {
    c.pass = c.pass && s.ok(min_instances);
    c.detail += s.name + ": " + std::to_string(s.instances) + " instances";
    if (s.failures) c.detail += ", " + std::to_string(s.failures) + " failures (" + s.first_failure + ")";
    c.detail += "; ";
  }
  c.detail += "time " + format_double(std::round(seconds * 10) / 10) + " s";
  c.seconds = seconds;
  return c;
}

std::set<int> parse_ids(const std::string& list) {
  std::set<int> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks on the built-in example network and seeded random instances"};
  bool ci = false;
  std::string expect_fail;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  app.add_flag("--ci", ci, "sweep with tau step 1.0 instead of 0.1");
  app.add_option("--expect-fail", expect_fail, "comma-separated criteria known to fail; exit 0 only if exactly these fail");
  app.add_option("--jobs", jobs, "sweep worker threads");
  app.add_option("--seed", seed, "PRBS seed");
  CLI11_PARSE(app, argc, argv);

  std::vector<study::Check> checks;
  auto emit = [&](study::Check c) {
    std::cout << study::check_line(c) << std::endl;
    checks.push_back(std::move(c));
  };
  emit(study::identifiability_at_phi0());
  emit(study::region_membership());
  emit(study::tfm_oracle());
  emit(study::reconstructibility());
  {
    study::Stopwatch sw;
    auto suite = suite_round_trip();
    if (!study::fixture_round_trips()) suite.expect(false, -1, "fixture round trip failed");
    emit(from_suites(5, "round-trip recovery on fixtures and 100 random SCMs", {suite}, 100, sw.seconds(), 60));
  }
  const auto nds = reference::nds();
  const auto phi0 = reference::phi_0();
  {
    study::Stopwatch sw;
    const auto run_u = study::paired_run(nds, phi0, reference::phi_u(), seed);
    const auto run_i = study::paired_run(nds, phi0, reference::phi_i(), seed);
    emit(study::simulation_discrimination(run_u, run_i, sw.seconds()));
  }
  {
    SweepConfig cfg;
    cfg.seed = seed;
    cfg.jobs = jobs;
    std::vector<SCMatrix> dirs;
    for (const auto& d : reference::phi_tilde()) dirs.push_back(d);
    const auto region = region_or_trivial(nds, phi0);
    study::Stopwatch sw;
    const auto sweeps = study::sweep_directions(nds, phi0, dirs, tau_grid(ci ? "0:1:20" : "0:0.1:20"), cfg, region);
    const double t = sw.seconds();
    emit(study::sweep_properties(nds, phi0, sweeps, region, t, ci ? 180 : 1800));
    emit(study::peak_frequency_distance(sweeps[0]));
  }
  {
    study::Stopwatch sw;
    std::vector<SuiteResult> suites{suite_smith(),          suite_smith_mcmillan(),    suite_mfd(),
                                    suite_proper_split(),   suite_mfd_choice(),        suite_det_factorization(),
                                    suite_lifted_tfm()};
    emit(from_suites(9, "property suites, >= 50 seeded instances each", suites, 50, sw.seconds(), 300));
  }
  {
    study::Stopwatch sw;
    emit(from_suites(10, "constrained tests agree with the plain verdict on A2", {suite_constrained_a2()}, 20,
                     sw.seconds(), 300));
  }

  const std::set<int> expected = parse_ids(expect_fail);
  std::set<int> failed;
  for (const auto& c : checks)
    if (!c.pass) failed.insert(c.id);
  std::size_t passed = checks.size() - failed.size();
  std::cout << passed << "/" << checks.size() << " criteria pass";
  if (!expected.empty()) {
    std::cout << "; expected failures:";
    for (int id : expected) std::cout << " " << id << (failed.count(id) ? " (failed)" : " (PASSED unexpectedly)");
  }
  std::cout << std::endl;
  return failed == expected ? EXIT_SUCCESS : EXIT_FAILURE;
}
