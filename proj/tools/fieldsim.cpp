#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "dsf/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "fieldsim: objective-driven stochastic fields on finite directed "
      "graphs"};
  app.require_subcommand(0, 0);

  std::string command;
  app.add_option("command", command,
                 "one of: validate evolve stationary objective gradient "
                 "propagate sample entropy-check train verify-all")
      ->required();

  std::string spec_path, format = "json", out_path, node, param;
  std::uint64_t seed = 0;
  bool seed_set = false, no_meta = false, serial = false;
  dsf::RunFlags flags;
  app.add_option("--spec", spec_path, "field spec file (json)")->required();
  app.add_option("--seed", seed, "random seed (overrides the spec)")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--t", flags.t, "time horizon");
  app.add_option("--paths", flags.paths, "number of sampled paths");
  app.add_option("--format", format, "output format: json or csv");
  app.add_option("--out", out_path, "output file (default stdout)");
  double tolerance = 0.0;
  bool tol_set = false;
  app.add_option("--tol", tolerance, "tolerance override")
      ->each([&](const std::string&) { tol_set = true; });
  app.add_option("--node", node, "node name for local operations");
  app.add_option("--param", param,
                 "parameter key 'TO->FROM' (destination index first)");
  app.add_option("--steps", flags.steps, "training steps");
  app.add_option("--lr", flags.learning_rate, "training learning rate");
  app.add_flag("--no-meta", no_meta, "omit wall-time metadata");
  app.add_flag("--serial", serial, "disable parallel kernels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return static_cast<int>(dsf::ErrorCode::usage);
  }

  if (seed_set) flags.seed = seed;
  if (tol_set) flags.tolerance = tolerance;
  flags.node = node;
  flags.param = param;
  flags.no_meta = no_meta;
  flags.exec = serial ? dsf::Exec::serial : dsf::Exec::parallel;

  try {
    const dsf::FieldSpec spec = dsf::load_field_spec(spec_path);
    const nlohmann::json report =
        dsf::run_experiment(spec, command, flags);
    dsf::emit_results(report, format, out_path);
    if (command == "verify-all" &&
        !report.at("results").at("all_pass").get<bool>())
      return static_cast<int>(dsf::ErrorCode::numeric);
    return 0;
  } catch (const dsf::Error& e) {
    std::fprintf(stderr, "{\"error_code\": %d, \"error\": \"%s\"}\n",
                 static_cast<int>(e.code()), e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "{\"error_code\": 4, \"error\": \"%s\"}\n",
                 e.what());
    return static_cast<int>(dsf::ErrorCode::numeric);
  }
}
