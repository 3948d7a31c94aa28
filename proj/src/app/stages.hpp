#pragma once

// The CLI stages as library calls. Each writes its outputs and a
// manifest.json (config, hash, seed, code version, status) under the run's
// output directory and returns a JSON report.

#include <functional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "app/run_config.hpp"

namespace rbc::app {

// The inputs were read but did not pass (rejected records, gradient error
// over tolerance). Carries the full report.
class ValidationFailure : public std::runtime_error {
 public:
  ValidationFailure(const std::string& what, nlohmann::json report) : std::runtime_error(what), report_(std::move(report)) {}
  const nlohmann::json& report() const { return report_; }

 private:
  nlohmann::json report_;
};

// Progress events, one JSON object each.
using LogFn = std::function<void(const nlohmann::json&)>;

const std::vector<std::string>& stage_names();
// Output directory of a stage: output_dir, or runs/<stage> when unset.
std::filesystem::path output_dir_of(const std::string& stage, const nlohmann::json& config);

// `config` must come from resolve_config. Throws ConfigError, MissingInput,
// ValidationFailure, or std::runtime_error for I/O failures. "serve" is not
// a batch stage; see service::make_http_server.
nlohmann::json run_stage(const std::string& stage, const nlohmann::json& config, const LogFn& log = {});

void write_manifest(const std::filesystem::path& dir, const std::string& stage, const nlohmann::json& config,
                    const nlohmann::json& extra);

}  // namespace rbc::app
