#include "dsf/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dsf/trajectories.hpp"

namespace dsf {

namespace {

using nlohmann::json;

[[noreturn]] void usage_error(const std::string& message) {
  throw Error(ErrorCode::usage, message);
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::pair<std::size_t, std::size_t> parse_param(const std::string& param) {
  const std::size_t arrow = param.find("->");
  if (arrow == std::string::npos)
    usage_error("--param expects 'TO->FROM' (destination first, matching "
                "G^to_from)");
  try {
    return {std::stoull(param.substr(0, arrow)),
            std::stoull(param.substr(arrow + 2))};
  } catch (const std::exception&) {
    usage_error("--param indices must be integers");
  }
}

Vector point_mass(Eigen::Index n, std::size_t at) {
  Vector v = Vector::Zero(n);
  v(static_cast<Eigen::Index>(at)) = 1.0;
  return v;
}

Vector uniform_state(Eigen::Index n) {
  return Vector::Constant(n, 1.0 / static_cast<double>(n));
}

// A deterministic sum-zero-column filter for the propagator checks.
Matrix seeded_filter(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix q(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r)
      q(r, c) = 2.0 * rng.uniform() - 1.0;
    q.col(c).array() -= q.col(c).sum() / static_cast<double>(n);
  }
  return q;
}

struct CheckList {
  json checks = json::array();
  bool all_pass = true;

  void add(const std::string& name, bool pass, double error) {
    checks.push_back({{"name", name},
                      {"status", pass ? "pass" : "fail"},
                      {"max_error", error}});
    all_pass = all_pass && pass;
  }
  void skip(const std::string& name, const std::string& reason) {
    checks.push_back(
        {{"name", name}, {"status", "skip"}, {"reason", reason}});
  }
};

json run_verify_all(const FieldSpec& spec, const FieldTopology& topology,
                    const std::vector<LocalGeneratorTable>& tables,
                    const Matrix& g, std::uint64_t seed, const RunFlags& flags) {
  const Eigen::Index n = g.rows();
  CheckList list;

  {  // The assembled generator equals the sum of the embeddings.
    Matrix total = Matrix::Zero(n, n);
    for (const auto& table : tables) total += embed_local(topology, table);
    list.add("generator-decomposition", (total - g).cwiseAbs().maxCoeff() <=
                                            1e-13,
             (total - g).cwiseAbs().maxCoeff());
    const double colsum = g.colwise().sum().cwiseAbs().maxCoeff();
    list.add("column-sums", colsum <= tol::column_sum, colsum);
  }

  {  // Non-neighbor local generators commute.
    double worst = 0.0;
    bool any = false;
    for (std::size_t a = 0; a < topology.num_nodes(); ++a)
      for (std::size_t b = a + 1; b < topology.num_nodes(); ++b)
        if (!topology.neighbors(a, b)) {
          any = true;
          worst = std::max(worst, commutator_norm(topology, a, b, tables));
        }
    if (any)
      list.add("nonneighbor-commutation", worst <= 1e-12, worst);
    else
      list.skip("nonneighbor-commutation", "all node pairs are neighbors");
  }

  {  // Evolution preserves normalization.
    const Vector phi = evolve(g, point_mass(n, 0), flags.t);
    const double err = std::abs(phi.sum() - 1.0) +
                       std::max(0.0, -phi.minCoeff());
    list.add("evolution-normalization", err <= tol::normalization, err);
  }

  const bool ergodic = null_space_dim(g) == 1;
  {
    const StationaryReport report = stationary(g, uniform_state(n));
    list.add("stationary-residual", report.residual <= tol::solve_residual,
             report.residual);
  }

  const ObjectiveOperator gamma = make_environment_objective(spec, topology);

  if (ergodic) {
    GeneratorSolver solver(g);
    const Matrix phi_op = phi_operator(g);
    double worst = 0.0;
    for (Eigen::Index w = 0; w < n; ++w) {
      const Vector basis = point_mass(n, static_cast<std::size_t>(w));
      const Vector lhs = basis + solver.solve_on_delta(g * basis);
      worst = std::max(worst, (lhs - phi_op.col(w)).cwiseAbs().maxCoeff());
    }
    list.add("integrated-response-identity", worst <= 1e-9, worst);

    if (!gamma.empty()) {
      const Vector phibar = averaged_state(g, uniform_state(n));
      double spread = 0.0;
      const double base = gamma.signal_rate(g).dot(phi_op.col(0));
      for (Eigen::Index w = 1; w < n; ++w)
        spread = std::max(
            spread,
            std::abs(gamma.signal_rate(g).dot(phi_op.col(w)) - base));
      list.add("objective-start-independence", spread <= 1e-10, spread);
      (void)phibar;
    } else {
      list.skip("objective-start-independence", "no objective signals");
    }
  } else {
    list.skip("integrated-response-identity", "system is not ergodic");
    list.skip("objective-start-independence", "system is not ergodic");
  }

  if (ergodic && static_cast<std::size_t>(n) <= kMaxPropagationStates) {
    const Vector phibar = averaged_state(g, uniform_state(n));
    // Lifted stationary flux, vectorized over pairs.
    Vector flux = Vector::Zero(n * n);
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index a = 0; a < n; ++a)
        flux(a * n + b) = g(a, b) * phibar(b);

    Propagator p_one;
    p_one.form = PropagatorForm::pq;
    p_one.q = Matrix::Identity(n, n);
    const Matrix pm = propagator_matrix(g, p_one);
    const double fixed = (pm * flux - flux).cwiseAbs().maxCoeff();
    list.add("propagator-fixes-stationary-flux", fixed <= 1e-9, fixed);
    const double idem = (pm * pm - pm).cwiseAbs().maxCoeff();
    list.add("propagator-idempotence", idem <= 1e-9, idem);

    Propagator pa, pb, pc;
    pa.form = pb.form = pc.form = PropagatorForm::pq;
    pa.q = seeded_filter(n, seed + 1);
    pb.q = seeded_filter(n, seed + 2);
    pc.q = compose_q(pa.q, pb.q);
    const Matrix lhs = propagator_matrix(g, pa) * propagator_matrix(g, pb);
    const double comp =
        (lhs - propagator_matrix(g, pc)).cwiseAbs().maxCoeff();
    list.add("propagator-composition", comp <= 1e-9, comp);
  } else {
    const std::string why = ergodic ? "configuration space too large"
                                    : "system is not ergodic";
    list.skip("propagator-fixes-stationary-flux", why);
    list.skip("propagator-idempotence", why);
    list.skip("propagator-composition", why);
  }

  if (ergodic && !gamma.empty()) {
    const GradientTable analytic = grad_system(gamma, g, flags.exec);
    double worst = 0.0;
    int tested = 0;
    for (Eigen::Index from = 0; from < n && tested < 12; ++from)
      for (Eigen::Index to = 0; to < n && tested < 12; ++to) {
        if (to == from) continue;
        double fd;
        try {
          fd = fd_gradient(gamma, g, static_cast<std::size_t>(to),
                           static_cast<std::size_t>(from));
        } catch (const NumericError&) {
          continue;  // stencil infeasible at this rate
        }
        const double a = analytic.values(to, from);
        worst = std::max(worst,
                         std::abs(a - fd) / std::max({1e-3, std::abs(a),
                                                      std::abs(fd)}));
        ++tested;
      }
    if (tested > 0)
      list.add("gradient-vs-finite-difference", worst <= 1e-5, worst);
    else
      list.skip("gradient-vs-finite-difference", "no differentiable rates");
  } else {
    list.skip("gradient-vs-finite-difference",
              ergodic ? "no objective signals" : "system is not ergodic");
  }

  {  // Path densities decompose over nodes.
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Path path =
          sample_path(g, 0, flags.t, Rng::stream(seed, 7000 + i));
      const double log_weight = path_log_weight(g, path);
      double total = 0.0;
      for (double term : field_lagrangian_terms(topology, tables, path))
        total += term;
      worst = std::max(worst, std::abs(total + log_weight));
    }
    list.add("path-density-decomposition", worst <= 1e-10, worst);
  }

  {  // Sampled transition frequencies track the master equation.
    const std::int64_t paths = std::max<std::int64_t>(flags.paths, 1000);
    const Vector exact = evolve(g, point_mass(n, 0), flags.t);
    double worst = 0.0;
    for (Eigen::Index w = 0; w < n; ++w) {
      const PathStats stats =
          mc_transition_prob(g, 0, static_cast<std::size_t>(w), flags.t,
                             paths, seed + 11, flags.exec);
      const double slack = 5.0 * stats.std_error + 1e-3;
      worst = std::max(worst,
                       std::abs(stats.estimate - exact(w)) - slack);
    }
    list.add("transition-probability-sampling", worst <= 0.0, worst);
  }

  if (!gamma.empty()) {
    const std::int64_t paths = std::max<std::int64_t>(flags.paths, 1000);
    const PathStats stats = mc_expected_signal(g, gamma, 0, flags.t, paths,
                                               seed + 13, flags.exec);
    const double exact = expected_signal_quadrature(gamma, g, 0, flags.t);
    const double slack = 5.0 * stats.std_error + 1e-3;
    const double err = std::abs(stats.estimate - exact) - slack;
    list.add("expected-signal-sampling", err <= 0.0, err);
  } else {
    list.skip("expected-signal-sampling", "no objective signals");
  }

  if (has_network(spec) && !spec.propagators.empty() && ergodic &&
      static_cast<std::size_t>(n) <= kMaxPropagationStates) {
    try {
      const PropagationNetwork network = make_network(spec, topology, g);
      const UniformValueReport report = check_uniform_value(network, g);
      list.add("propagation-uniform-value", report.spread <= 1e-9,
               report.spread);
    } catch (const Error& e) {
      list.skip("propagation-uniform-value",
                std::string("network unavailable: ") + e.what());
    }
  } else {
    list.skip("propagation-uniform-value", "no propagation network");
  }

  json results;
  results["checks"] = list.checks;
  results["all_pass"] = list.all_pass;
  return results;
}

json run_subcommand(const FieldSpec& spec, const std::string& subcommand,
                    const RunFlags& flags, std::uint64_t seed) {
  const FieldTopology topology = make_topology(spec);
  const std::vector<LocalGeneratorTable> tables = make_tables(spec, topology);
  const Matrix g = assemble_system(topology, tables);
  const Eigen::Index n = g.rows();
  json results;

  if (subcommand == "validate") {
    for (const auto& table : tables) validate_local(topology, table);
    results["nodes"] = topology.num_nodes();
    results["edges"] = topology.edges().size();
    results["configurations"] = topology.omega().total();
    results["generator_valid"] =
        is_valid_generator(g, flags.tolerance.value_or(tol::column_sum));
    results["column_sum_residual"] = g.colwise().sum().cwiseAbs().maxCoeff();
    results["ergodic"] = null_space_dim(g) == 1;
    if (has_network(spec)) {
      const PropagationNetwork network = make_network(spec, topology, g);
      results["strongly_connected"] = network.strongly_connected;
    }
  } else if (subcommand == "evolve") {
    const Vector phi = evolve(g, point_mass(n, 0), flags.t);
    results["t"] = flags.t;
    results["state"] = to_json(phi);
    results["normalization_error"] = std::abs(phi.sum() - 1.0);
  } else if (subcommand == "stationary") {
    const StationaryReport report = stationary(g, uniform_state(n));
    results["state"] = to_json(report.stationary);
    results["ergodic"] = report.ergodic;
    results["null_dim"] = report.null_dim;
    results["residual"] = report.residual;
    if (report.residual > flags.tolerance.value_or(tol::solve_residual))
      throw NumericError("stationary: residual above tolerance");
  } else if (subcommand == "objective") {
    const ObjectiveOperator gamma = make_environment_objective(spec, topology);
    results["value"] = objective_value(gamma, g, uniform_state(n));
    results["signal_entries"] = gamma.entries().size();
  } else if (subcommand == "gradient") {
    const ObjectiveOperator gamma = make_environment_objective(spec, topology);
    if (!flags.node.empty()) {
      const std::size_t x = topology.node_index(flags.node);
      GradientTable table;
      if (!spec.propagators.empty()) {
        const PropagationNetwork network = make_network(spec, topology, g);
        table = propagated_local_gradient(network, g, x, flags.exec);
      } else {
        table = grad_local(gamma, topology, g, x, flags.exec);
      }
      if (!flags.param.empty()) {
        const auto [to, from] = parse_param(flags.param);
        results["value"] = table.at(to, from);
      } else {
        json rows = json::array();
        for (Eigen::Index o = 0; o < table.values.rows(); ++o)
          for (Eigen::Index u = 0; u < table.values.cols(); ++u)
            if (table.values(o, u) != 0.0 ||
                static_cast<std::size_t>(o) != tables[x].act_of_obs(
                                                   static_cast<std::size_t>(u)))
              rows.push_back({{"to", o}, {"from", u},
                              {"value", table.values(o, u)}});
        results["table"] = rows;
      }
    } else {
      const GradientTable table = grad_system(gamma, g, flags.exec);
      if (!flags.param.empty()) {
        const auto [to, from] = parse_param(flags.param);
        if (to >= static_cast<std::size_t>(n) ||
            from >= static_cast<std::size_t>(n) || to == from)
          usage_error("--param is not an off-diagonal parameter");
        results["value"] = table.at(to, from);
      } else {
        json rows = json::array();
        for (Eigen::Index from = 0; from < n; ++from)
          for (Eigen::Index to = 0; to < n; ++to)
            if (to != from)
              rows.push_back({{"to", to}, {"from", from},
                              {"value", table.values(to, from)}});
        results["table"] = rows;
      }
    }
  } else if (subcommand == "propagate") {
    if (!has_network(spec))
      throw DomainError("propagate: the spec defines no objective signals");
    const PropagationNetwork network = make_network(spec, topology, g);
    const UniformValueReport report = check_uniform_value(network, g);
    json values = json::array();
    for (std::size_t i = 0; i < report.nodes.size(); ++i)
      values.push_back({{"node", topology.node(report.nodes[i]).name},
                        {"value", report.values(static_cast<Eigen::Index>(i))}});
    results["values"] = values;
    results["spread"] = report.spread;
    results["strongly_connected"] = network.strongly_connected;
  } else if (subcommand == "sample") {
    if (flags.paths < 1) usage_error("--paths must be at least 1");
    Vector histogram = Vector::Zero(n);
    double mean_jumps = 0.0;
    for (std::int64_t i = 0; i < flags.paths; ++i) {
      const Path path = sample_path(
          g, 0, flags.t, Rng::stream(seed, static_cast<std::uint64_t>(i)));
      histogram(static_cast<Eigen::Index>(path.final_state())) += 1.0;
      mean_jumps += static_cast<double>(path.jumps.size());
    }
    histogram /= static_cast<double>(flags.paths);
    mean_jumps /= static_cast<double>(flags.paths);
    results["paths"] = flags.paths;
    results["t"] = flags.t;
    results["mean_jumps"] = mean_jumps;
    results["final_state_frequencies"] = to_json(histogram);
  } else if (subcommand == "entropy-check") {
    if (flags.paths < 1) usage_error("--paths must be at least 1");
    const EntropyReport report =
        entropy_bound_check(g, flags.t, 0, flags.paths, seed, flags.exec);
    results["mc_mean"] = report.mc_mean;
    results["stderr"] = report.std_error;
    results["bound"] = report.bound;
    results["entropies"] = to_json(report.entropies);
    results["satisfied"] =
        report.mc_mean >= report.bound - 3.0 * report.std_error;
  } else if (subcommand == "train") {
    std::vector<std::size_t> trained;
    if (!flags.node.empty())
      trained.push_back(topology.node_index(flags.node));
    else
      trained = topology.acting_nodes();
    if (trained.empty()) usage_error("train: no acting nodes to train");
    TrainerConfig config;
    config.learning_rate = flags.learning_rate;
    config.n_steps = flags.steps;
    std::vector<LocalGeneratorTable> mutable_tables = tables;
    TrainingTrace trace;
    if (!spec.propagators.empty()) {
      const PropagationNetwork network = make_network(spec, topology, g);
      trace = train_gradient_descent(topology, mutable_tables, network,
                                     trained, config);
    } else {
      const ObjectiveOperator gamma =
          make_environment_objective(spec, topology);
      trace = train_gradient_descent(topology, mutable_tables, gamma, trained,
                                     config);
    }
    json steps = json::array();
    for (const TrainStep& step : trace)
      steps.push_back({{"step", step.step},
                       {"values", step.values},
                       {"grad_norm", step.grad_norm},
                       {"step_scale", step.step_scale}});
    results["trace"] = steps;
    json final_rates = json::object();
    for (std::size_t x : trained) {
      const Matrix& rates = mutable_tables[x].rates();
      std::vector<double> flat(rates.data(), rates.data() + rates.size());
      final_rates[topology.node(x).name] = flat;
    }
    results["final_rates"] = final_rates;
  } else if (subcommand == "verify-all") {
    results = run_verify_all(spec, topology, tables, g, seed, flags);
  } else {
    usage_error("unknown subcommand '" + subcommand + "'");
  }
  return results;
}

}  // namespace

json run_experiment(const FieldSpec& spec, const std::string& subcommand,
                    const RunFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = flags.seed.value_or(spec.seed);

  json report;
  report["command"] = subcommand;
  report["seed"] = seed;
  json config;
  config["t"] = flags.t;
  config["paths"] = flags.paths;
  if (flags.tolerance) config["tol"] = *flags.tolerance;
  if (!flags.node.empty()) config["node"] = flags.node;
  if (!flags.param.empty()) config["param"] = flags.param;
  if (subcommand == "train") {
    config["steps"] = flags.steps;
    config["learning_rate"] = flags.learning_rate;
  }
  report["config"] = config;
  report["results"] = run_subcommand(spec, subcommand, flags, seed);

  if (!flags.no_meta) {
    const auto elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start);
    report["meta"] = {{"wall_time_s", elapsed.count()}};
  }
  return report;
}

namespace {

void csv_escape(std::ostream& out, const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void flatten_csv(const json& value, const std::string& key,
                 std::ostream& out) {
  if (value.is_object()) {
    if (value.contains("value") && value.at("value").is_number()) {
      csv_escape(out, key);
      out << ',' << value.at("value").dump() << ',';
      if (value.contains("stderr")) out << value.at("stderr").dump();
      out << ',';
      if (value.contains("tolerance")) out << value.at("tolerance").dump();
      out << '\n';
      return;
    }
    for (const auto& item : value.items())
      flatten_csv(item.value(), key.empty() ? item.key()
                                            : key + "." + item.key(),
                  out);
  } else if (value.is_array()) {
    std::size_t i = 0;
    for (const json& item : value)
      flatten_csv(item, key + "." + std::to_string(i++), out);
  } else {
    csv_escape(out, key);
    out << ',';
    if (value.is_string())
      csv_escape(out, value.get<std::string>());
    else
      out << value.dump();
    out << ",,\n";
  }
}

}  // namespace

std::string render_results(const json& report, const std::string& format) {
  if (format == "json") return report.dump(2) + "\n";
  if (format != "csv") usage_error("--format must be json or csv");
  std::ostringstream out;
  out << "key,value,stderr,tolerance\n";
  if (report.contains("results"))
    flatten_csv(report.at("results"), "", out);
  return out.str();
}

void emit_results(const json& report, const std::string& format,
                  const std::string& out_path) {
  const std::string body = render_results(report, format);
  if (out_path.empty()) {
    std::fputs(body.c_str(), stdout);
    return;
  }
  const std::string tmp = out_path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot write to " + tmp);
    out << body;
    if (!out.good()) throw DomainError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), out_path.c_str()) != 0)
    throw DomainError("cannot move results into place: " + out_path);
}

}  // namespace dsf
