// Prints the noise-free pipeline for both built-in cases and the expected
// mid-point enhancement for each probe state.

#include <cstdio>

#include "qspr/case_study.hpp"
#include "qspr/probes.hpp"

int main() {
  using namespace qspr;
  for (const auto& study : {kausaite2007(), lahiri1999()}) {
    const PreparedCase pc = prepare_case(study);
    const auto& f = pc.noise_free_fit;
    std::printf("%s\n", study.name.c_str());
    std::printf("  theta(0) %.4f deg   T(0) %.4f   T_mid %.4f\n", study.theta0_deg(), pc.ideal_T().front(), pc.t_mid);
    std::printf("  fit  k_s %.5g  k_d %.5g  k_a %.5g\n", f.k_s, f.k_d, f.k_a);
    const auto sc = SensingScenario::standard();
    for (double n : {10.0, 1e4}) {
      std::printf("  N=%-6g R_M  TMF %.4f  TMSV %.4f  TMSD %.4f\n", n, enhancement_RM(ProbeState::tmf(n), pc.t_mid, sc),
                  enhancement_RM(ProbeState::tmsv(n), pc.t_mid, sc), enhancement_RM(ProbeState::tmsd(n), pc.t_mid, sc));
    }
  }
}
