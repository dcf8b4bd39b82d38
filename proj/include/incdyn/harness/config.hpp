#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace incdyn {

/// The experiment kinds the harness knows how to run.
enum class ExperimentKind {
    kToyFlow,
    kToyGd,
    kThreshold,
    kSensing,
    kQuadratic,
    kDiagClassify,
    kConvClassify,
    kOmpAgreement,
};

std::string to_string(ExperimentKind k);

/// Parsed and validated experiment configuration. `params` holds the
/// kind-specific block (already schema-checked).
struct ExperimentConfig {
    int schema_version = 1;
    ExperimentKind kind = ExperimentKind::kToyFlow;
    std::string name;
    std::uint64_t seed = 0;
    std::string output_dir; // optional; empty -> derived from root + name

    // the full parsed document (nlohmann objects are key-sorted, so the
    // serialization below is canonical under field reordering)
    std::shared_ptr<nlohmann::json> document;

    const nlohmann::json& params() const;
    /// Hash of the canonical (key-sorted) serialization.
    std::string config_hash() const;
};

struct ValidationError {
    std::string field;
    std::string message;
};

/// Parses a config document; collects schema violations with field paths.
/// Returns nullopt and fills `errors` when invalid.
std::optional<ExperimentConfig> parse_config(const std::string& json_text,
                                             std::vector<ValidationError>& errors);

std::optional<ExperimentConfig> load_config(const std::string& path,
                                            std::vector<ValidationError>& errors);

}  // namespace incdyn
