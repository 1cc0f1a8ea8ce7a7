#pragma once

#include <array>
#include <string>

#include "ndscope/model.hpp"

/// Built-in two-subsystem example network and its connection matrices.
namespace ndscope::reference {

inline RatMat mat(std::initializer_list<std::initializer_list<const char*>> rows) {
  RatMat m(rows.size(), rows.size() ? rows.begin()->size() : 0);
  std::size_t i = 0;
  for (const auto& r : rows) {
    std::size_t j = 0;
    for (const char* v : r) m(i, j++) = parse_rational(v);
    ++i;
  }
  return m;
}

inline SubsystemRealization subsystem() {
  SubsystemRealization s;
  s.E = RatMat::identity(2);
  s.A_xx = mat({{"-2", "-1"}, {"4", "-7"}});
  s.B_xv = mat({{"-0.3", "0.1"}, {"1.1", "0.8"}});
  s.B_xu = mat({{"0"}, {"1"}});
  s.C_zx = mat({{"1", "1"}});
  s.C_yx = mat({{"1", "-1"}});
  s.D_zv = mat({{"0", "-1"}});
  s.D_zu = mat({{"0"}});
  s.D_yv = mat({{"0", "0"}});
  s.D_yu = mat({{"0"}});
  return s;
}

inline NdsDefinition nds() {
  NdsDefinition n;
  n.subsystems = {subsystem(), subsystem()};
  return n;
}

inline SCMatrix phi_0() { return mat({{"0", "0"}, {"0", "0"}, {"1", "0"}, {"0", "0"}}); }
inline SCMatrix phi_u() { return mat({{"0", "0"}, {"0", "0"}, {"0", "0"}, {"2", "0"}}); }
inline SCMatrix phi_i() { return mat({{"0", "1"}, {"0", "0"}, {"1", "0"}, {"0", "0"}}); }

/// The four random perturbation samples used by the τ-sweep.
inline std::array<SCMatrix, 4> phi_tilde() {
  return {
      mat({{"1.1732", "0.4875"}, {"-0.5079", "-0.4236"}, {"2.3282", "-0.5629"}, {"1.0153", "-1.6446"}}),
      mat({{"0.4634", "-1.5646"}, {"-1.3977", "-1.3546"}, {"2.3531", "-0.8120"}, {"0.9047", "-0.3057"}}),
      mat({{"0.4667", "0.3628"}, {"-0.7651", "-0.7875"}, {"-0.6597", "-1.3277"}, {"1.5073", "-0.6405"}}),
      mat({{"-0.4462", "0.3897"}, {"-0.9077", "-0.3658"}, {"0.1943", "0.9004"}, {"0.6469", "-0.9311"}}),
  };
}

/// Expected H∞ peak of H(Φ̃₁(τ)) − H(Φ₀) over the sweep.
inline constexpr double kPeakFreqDistance = 179.20;

}  // namespace ndscope::reference
