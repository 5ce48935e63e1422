#ifndef DSF_RUNNER_HPP
#define DSF_RUNNER_HPP

#include <optional>

#include <json.hpp>

#include "dsf/field_spec.hpp"

namespace dsf {

struct RunFlags {
  std::optional<std::uint64_t> seed;  // overrides the spec's seed
  double t = 1.0;
  std::int64_t paths = 1000;
  std::optional<double> tolerance;
  std::string node;   // node name for local operations
  std::string param;  // "TO->FROM" parameter key
  int steps = 50;
  double learning_rate = 0.1;
  bool no_meta = false;
  Exec exec = Exec::parallel;
};

/// Runs one subcommand against a loaded spec and returns the full report
/// document: command echo, resolved config, results, and (unless no_meta)
/// wall time. Identical (spec, subcommand, flags) produce identical
/// documents.
nlohmann::json run_experiment(const FieldSpec& spec,
                              const std::string& subcommand,
                              const RunFlags& flags);

/// Serializes a report. json: the document itself; csv: one row per scalar
/// under results, columns key,value,stderr,tolerance. Empty out_path means
/// stdout; files are written to a temp name and renamed into place.
void emit_results(const nlohmann::json& report, const std::string& format,
                  const std::string& out_path);

std::string render_results(const nlohmann::json& report,
                           const std::string& format);

}  // namespace dsf

#endif  // DSF_RUNNER_HPP
