#pragma once

// Scenario configuration (strict JSON), deterministic CSV/JSON emission and the
// command entry points behind the bogosim executable.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bogo/experiments.hpp"
#include "json.hpp"

namespace bogo {

inline constexpr int kSchemaVersion = 1;

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 2;
inline constexpr int numeric_failure = 3;
}  // namespace exit_code

struct CliOverrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<unsigned> threads;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  /// Evaluation time for the spectrum command.
  std::optional<double> time;
};

struct MonteCarloConfig {
  std::uint64_t samples = 100'000;
};

struct StabilityConfig {
  std::vector<double> A_values{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  StabilityMethod method = StabilityMethod::analytic;
};

enum class OutputFormat { csv, json };

struct ScenarioConfig {
  Scenario scenario;
  MonteCarloConfig monte_carlo;
  StabilityConfig stability;
  OutputFormat format = OutputFormat::csv;
  std::filesystem::path out_dir;
  /// The configuration with every default filled in, echoed into run metadata.
  nlohmann::ordered_json resolved;
};

/// Parses and validates a configuration tree. Unknown keys, wrong types and a
/// mismatched schema_version raise ConfigError.
ScenarioConfig parse_config(const nlohmann::json& doc, const CliOverrides& overrides = {});
ScenarioConfig load_config(const std::filesystem::path& path, const CliOverrides& overrides = {});

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double x);

/// Column names of ObservableRecord, in order.
const std::vector<std::string>& record_columns();
std::string csv_header();
std::string csv_row(const ObservableRecord& r);
void write_records(const std::filesystem::path& path, const std::vector<ObservableRecord>& rows,
                   OutputFormat format);

std::string version_string();

int cmd_vtrace(const std::filesystem::path& config, const CliOverrides& overrides,
               std::ostream& out, std::ostream& err);
int cmd_stability(const std::filesystem::path& config, const CliOverrides& overrides,
                  std::ostream& out, std::ostream& err);
int cmd_spectrum(const std::filesystem::path& config, const CliOverrides& overrides,
                 std::ostream& out, std::ostream& err);
int cmd_resonance(const std::filesystem::path& config, const CliOverrides& overrides,
                  std::ostream& out, std::ostream& err);
int cmd_mc_validate(const std::filesystem::path& config, const CliOverrides& overrides,
                    std::ostream& out, std::ostream& err);

}  // namespace bogo
