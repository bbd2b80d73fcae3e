#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tsneflow/error.hpp"
#include "tsneflow_cli/runner.hpp"

namespace {

void add_common(CLI::App* sub, tsneflow::cli::RunConfig& cfg, std::string& config_path,
                std::string& manifold, std::string& method) {
  sub->add_option("--config", config_path, "flat key=value config file (flags override it)");
  sub->add_option("--input", cfg.input, "CSV dataset, one point per line");
  sub->add_option("--manifold", manifold, "circle|sphere|torus|swiss_roll|gaussian_clusters");
  sub->add_option("--n", cfg.n, "sample size for --manifold");
  sub->add_option("--dim", cfg.dim, "ambient dimension for --manifold");
  sub->add_option("--perp", cfg.perp, "target perplexity");
  sub->add_option("--zeta", cfg.zeta, "perplexity as a fraction of n-1");
  sub->add_option("--t-end", cfg.flow.t_end, "flow time horizon");
  sub->add_option("--step", cfg.flow.step, "integrator step");
  sub->add_option("--method", method, "rk4|euler");
  sub->add_option("--record-every", cfg.flow.record_every, "steps between trace records");
  sub->add_option("--seed", cfg.seed, "seed for sampling and initialisation");
  sub->add_option("--out", cfg.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tsneflow::cli;
  CLI::App app{"Exact t-SNE gradient flow with theory diagnostics"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path, manifold, method;
  auto* run_cmd = app.add_subcommand("run", "calibrate, integrate the flow and write artifacts");
  auto* verify_cmd = app.add_subcommand("verify", "run the property and oracle checks");
  add_common(run_cmd, flags, config_path, manifold, method);
  add_common(verify_cmd, flags, config_path, manifold, method);
  verify_cmd->add_flag("--inject-gradient-sign-flip", flags.flip_gradient_sign)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    write_error_json(std::cerr, kExitConfig, "ConfigError", "cli-runner", e.what());
    return kExitConfig;
  }

  // Config file first, then every flag given on the command line on top.
  RunConfig cfg;
  try {
    if (!config_path.empty()) apply_config_file(config_path, cfg);
  } catch (const ConfigError& e) {
    write_error_json(std::cerr, kExitConfig, "ConfigError", "cli-runner", e.what());
    return kExitConfig;
  } catch (const tsneflow::Error& e) {
    write_error_json(std::cerr, kExitIo, "IoError", e.module(), e.what());
    return kExitIo;
  }
  CLI::App* sub = run_cmd->parsed() ? run_cmd : verify_cmd;
  auto given = [&](const char* name) { return sub->count(name) > 0; };
  if (given("--input")) cfg.input = flags.input;
  if (given("--n")) cfg.n = flags.n;
  if (given("--dim")) cfg.dim = flags.dim;
  if (given("--perp")) cfg.perp = flags.perp;
  if (given("--zeta")) cfg.zeta = flags.zeta;
  if (given("--t-end")) cfg.flow.t_end = flags.flow.t_end;
  if (given("--step")) cfg.flow.step = flags.flow.step;
  if (given("--record-every")) cfg.flow.record_every = flags.flow.record_every;
  if (given("--seed")) cfg.seed = flags.seed;
  if (given("--out")) cfg.out = flags.out;
  cfg.flip_gradient_sign = flags.flip_gradient_sign;
  try {
    if (given("--manifold")) cfg.manifold = tsneflow::parse_manifold_kind(manifold);
    if (given("--method")) cfg.flow.method = tsneflow::parse_flow_method(method);
  } catch (const tsneflow::Error& e) {
    write_error_json(std::cerr, kExitConfig, "ConfigError", "cli-runner", e.what());
    return kExitConfig;
  }

  return run_cmd->parsed() ? run(cfg, std::cout, std::cerr) : verify(cfg, std::cout, std::cerr);
}
