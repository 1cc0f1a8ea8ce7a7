// Walks the library API on the built-in two-subsystem network.
#include <iostream>
#include <utility>

#include "ndscope/reference.hpp"
#include "ndscope/sim.hpp"

using namespace ndscope;

int main() {
  const NdsDefinition nds = reference::nds();
  const SCMatrix phi0 = reference::phi_0();

  const IdentReport rep = check_identifiable_at(nds, phi0);
  std::cout << "case " << to_string(rep.tag.kind) << ", verdict " << to_string(rep.verdict) << "\n";

  const UndiffRegion region = undiff_region(rep, phi0);
  std::cout << "region dimension " << region.dimension() << "\n";
  const std::pair<const char*, SCMatrix> others[] = {{"Phi_u", reference::phi_u()}, {"Phi_i", reference::phi_i()}};
  for (const auto& [name, phi] : others) {
    std::cout << name << (region.contains(phi) ? " is" : " is not") << " in the region; TFM "
              << (tfm_equal(nds_tfm(nds, phi0), nds_tfm(nds, phi)) ? "equal" : "different") << "\n";
  }

  // The lumped model still tells Phi_u apart from Phi_0.
  const LumpedModel m = lump(nds, reference::phi_u());
  std::cout << "recovered from lumped model: " << (recover_scm(nds, m) == reference::phi_u() ? "Phi_u" : "?") << "\n";

  const FreqPeak d = distance_freq(nds, phi0, reference::phi_i());
  std::cout << "d_F(Phi_0, Phi_i) = " << d.value << " at omega " << d.omega << "\n";
  return 0;
}
