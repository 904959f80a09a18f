// qspr: command-line front end for the kinetics sensing simulator.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "qspr/experiment.hpp"
#include "qspr/fock_oracle.hpp"

namespace {

using namespace qspr;

constexpr int kExitUnreliable = 3;
constexpr int kExitVerifyFailed = 4;

int cmd_run(const std::string& config_path, const std::optional<std::string>& out,
            const std::optional<std::uint64_t>& seed, unsigned threads, bool paper_fidelity, bool allow_unreliable) {
  ExperimentConfig cfg = load_config(config_path);
  if (out) cfg.output_dir = *out;
  if (seed) cfg.seed = *seed;
  if (paper_fidelity) cfg.p = kPaperFidelitySets;
  const auto outcome = run_experiment(cfg, RunOptions{threads});
  fmt::print("wrote {} result rows to {}\n", outcome.rows.size(), outcome.output_dir.string());
  if (!outcome.unreliable.empty()) {
    for (const auto& d : outcome.unreliable) fmt::print(stderr, "unreliable ensemble: {}\n", d);
    if (!allow_unreliable) {
      fmt::print(stderr, "{} ensemble(s) flagged unreliable; raise nu or N, or pass --allow-unreliable\n",
                 outcome.unreliable.size());
      return kExitUnreliable;
    }
  }
  return 0;
}

int cmd_case(const std::string& name) {
  const CaseStudy c = resolve_case(name);
  const PreparedCase pc = prepare_case(c);
  const auto& f = pc.noise_free_fit;
  const nlohmann::json j{{"case", c.name},
                         {"stack", detail::stack_to_json(c.stack)},
                         {"kinetics", detail::kinetics_to_json(c.kinetics)},
                         {"k_s", c.kinetics.k_s()},
                         {"angular_amplitude_deg", c.angular_amplitude_deg},
                         {"buffer_index", c.buffer_index},
                         {"theta0_deg", c.theta0_deg()},
                         {"grid", detail::grid_to_json(c.grid)},
                         {"linearize", c.linearize},
                         {"default_nu", c.default_nu},
                         {"t_mid", pc.t_mid},
                         {"noise_free_fit", {{"k_s", f.k_s}, {"k_d", f.k_d}, {"k_a", f.k_a}, {"converged", f.converged}}}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_verify(int cutoff, int tuples, std::uint64_t seed, double tolerance) {
  const auto report = oracle::verify_closed_forms(cutoff, tuples, seed, tolerance);
  fmt::print("cutoff {}  tuples {}  tolerance {:g}\n", cutoff, tuples, tolerance);
  for (const auto& k : report.kinds) {
    if (k.truncation_failure)
      fmt::print("{:5}  TRUNCATED  {}\n", to_string(k.kind), k.diagnostic);
    else
      fmt::print("{:5}  max rel dev <M> {:.3e}  dM {:.3e}  {}\n", to_string(k.kind), k.max_rel_mean, k.max_rel_delta,
                 k.max_deviation() <= tolerance ? "ok" : "BREACH");
  }
  return report.passed() ? 0 : kExitVerifyFailed;
}

int cmd_sensorgram(const std::string& name, const std::optional<std::string>& out) {
  const PreparedCase pc = prepare_case(resolve_case(name));
  const auto& rec = pc.reconstruction;
  std::string text = "t,theta_deg,n_a,T,T_L\n";
  for (std::size_t i = 0; i < rec.t.size(); ++i)
    text += fmt::format("{},{},{},{},{}\n", fmt_double(rec.t[i]), fmt_double(rec.theta_deg[i]),
                        fmt_double(rec.n_a[i]), fmt_double(rec.T[i]), fmt_double(pc.T_linear[i]));
  if (!out) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(*out, std::ios::binary);
  if (!(f << text)) throw std::runtime_error("cannot write " + *out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-enhanced SPR kinetics simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qspr::kVersion);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool paper_fidelity = false;
  bool allow_unreliable = false;
  auto* run = app.add_subcommand("run", "run a sweep from a JSON config (or a previous manifest)");
  run->add_option("--config", config_path, "config or manifest JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory (overrides the config)");
  run->add_option("--seed", seed, "seed (overrides the config)");
  run->add_option("--threads", threads, "worker threads, 0 = all cores")->capture_default_str();
  run->add_flag("--paper-fidelity", paper_fidelity, "use p = 1500 sets");
  run->add_flag("--allow-unreliable", allow_unreliable, "exit 0 even if an ensemble is flagged unreliable");

  std::string case_name;
  auto* cas = app.add_subcommand("case", "print a built-in case study and its noise-free fit");
  cas->add_option("name", case_name, "kausaite2007 | lahiri1999")->required();

  int cutoff = 60;
  int tuples = 50;
  std::uint64_t verify_seed = 2024;
  double tolerance = 1e-6;
  auto* verify = app.add_subcommand("verify", "check closed-form moments against the Fock-basis oracle");
  verify->add_option("--cutoff", cutoff, "photon-number cutoff per mode")->capture_default_str();
  verify->add_option("--tuples", tuples, "random (state, T, eta_a, eta_b) draws per state kind")
      ->capture_default_str();
  verify->add_option("--seed", verify_seed)->capture_default_str();
  verify->add_option("--tolerance", tolerance, "relative tolerance")->capture_default_str();

  std::string sg_case;
  std::optional<std::string> sg_out;
  auto* sg = app.add_subcommand("sensorgram", "write a case's noise-free transmittance sensorgram as CSV");
  sg->add_option("--case", sg_case)->required();
  sg->add_option("--out", sg_out, "file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out, seed, threads, paper_fidelity, allow_unreliable);
    if (*cas) return cmd_case(case_name);
    if (*verify) return cmd_verify(cutoff, tuples, verify_seed, tolerance);
    if (*sg) return cmd_sensorgram(sg_case, sg_out);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 1;
}
