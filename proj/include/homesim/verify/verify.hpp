#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "homesim/core/catalog.hpp"
#include "homesim/core/types.hpp"
#include "homesim/knowledge/knowledge.hpp"
#include "homesim/runtime/archive.hpp"
#include "homesim/runtime/params.hpp"
#include "homesim/threat/threat.hpp"

namespace homesim::verify {

enum class Stage { kSchema, kPhysical, kSemantic, kFactual, kSecurity, kBusiness };
inline constexpr std::array<Stage, 6> kStages{Stage::kSchema,  Stage::kPhysical, Stage::kSemantic,
                                              Stage::kFactual, Stage::kSecurity, Stage::kBusiness};
std::string_view stage_name(Stage s);

enum class Severity { kInfo, kWarning, kError };
std::string_view severity_name(Severity s);

struct Finding {
  Severity severity = Severity::kError;
  std::string message;
  std::string location;

  bool operator==(const Finding&) const = default;
};

struct ValidatorReport {
  Stage stage = Stage::kSchema;
  double score = 1.0;
  std::vector<Finding> findings;

  bool operator==(const ValidatorReport&) const = default;
};

inline constexpr double kErrorPenalty = 0.2;
inline constexpr double kWarningPenalty = 0.05;

/// max(0, 1 - 0.2 * errors - 0.05 * warnings). Info findings are free.
double score_findings(std::span<const Finding> findings);

enum class Outcome { kApprove, kReview, kReject };
std::string_view outcome_name(Outcome o);

inline constexpr double kApproveThreshold = 0.85;
inline constexpr double kReviewThreshold = 0.70;

struct GateDecision {
  double confidence = 0.0;
  Outcome outcome = Outcome::kReject;
  std::string explanation;
};

/// Product of score^weight over the six stages; a zero score with positive
/// weight gives 0, a zero weight drops the stage. Missing weights default to 1.
/// Throws ValidationError unless every stage appears exactly once, or for a
/// negative weight or a score outside [0, 1].
double aggregate_confidence(std::span<const ValidatorReport> reports,
                            const std::map<Stage, double>& weights = {});

/// approve at >= 0.85, review at >= 0.70, reject below. Throws
/// ValidationError for a confidence outside [0, 1].
GateDecision gate(double confidence);
/// Same thresholds; the explanation lists the error and warning findings.
GateDecision gate(double confidence, std::span<const ValidatorReport> reports);

enum class ArtifactKind { kHome, kParameters, kScenarios, kBundle };
std::string_view artifact_kind_name(ArtifactKind k);

/// Anything the pipeline can check. Schema problems met while reading raw
/// JSON are kept in `schema_findings`; the typed members are then absent and
/// later stages report that they could not look.
struct Artifact {
  ArtifactKind kind = ArtifactKind::kHome;
  std::string name;
  std::vector<Finding> schema_findings;
  std::optional<HomeConfiguration> home;
  std::optional<SimulationParameters> params;
  std::optional<std::vector<threat::AttackScenario>> scenarios;
  std::optional<std::vector<SimulationEvent>> events;  // bundles only
  std::optional<ExperimentRecord> record;              // bundles only
  std::optional<SimMillis> horizon;                    // for scenario windows
};

Artifact home_artifact(const HomeConfiguration& home);
Artifact parameters_artifact(const SimulationParameters& params);
Artifact scenarios_artifact(std::vector<threat::AttackScenario> scenarios,
                            std::optional<SimMillis> horizon = std::nullopt);
Artifact bundle_artifact(const SimulationResult& result);
/// From an imported archive; the events and config are re-read from the artifacts.
Artifact bundle_artifact(const Archive& archive);

/// Kind is recognised from the shape: an object with rooms and devices is a
/// home, an array is a scenario list, any other object is a parameter set.
Artifact artifact_from_json(const nlohmann::json& j, std::string name = "artifact");
/// A directory holding an archive manifest is imported (digests checked,
/// IntegrityError on damage); a file is parsed as JSON. Throws
/// ValidationError for unreadable input.
Artifact load_artifact(const std::filesystem::path& path);

struct Context {
  const Catalogs* catalogs = nullptr;
  const knowledge::KnowledgeIndex* kb = nullptr;
  std::size_t factual_k = 5;
};

/// Stages are pure functions of (artifact, context). The semantic, security
/// and business stages need catalogs; without them they throw
/// ValidationError. Without a knowledge index the factual stage scores 1.0
/// with a "skipped" info finding.
ValidatorReport run_stage(Stage stage, const Artifact& artifact, const Context& context);

struct Verification {
  std::vector<ValidatorReport> reports;  // kStages order
  double confidence = 0.0;
  GateDecision decision;
};

Verification verify_artifact(const Artifact& artifact, const Context& context,
                    const std::map<Stage, double>& weights = {});

nlohmann::json to_json(const Verification& v);

}  // namespace homesim::verify
