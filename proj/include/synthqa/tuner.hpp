#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "synthqa/dataset.hpp"
#include "synthqa/metrics.hpp"
#include "synthqa/pareto.hpp"

namespace synthqa {

enum class ParamKind { Float, Int, Categorical, Fixed };

std::string_view to_string(ParamKind kind);

struct Parameter {
  std::string name;
  ParamKind kind = ParamKind::Float;
  double min = 0.0;
  double max = 1.0;
  bool log_scale = false;
  std::vector<nlohmann::json> choices;
  nlohmann::json value;  // Fixed only

  bool optimized() const { return kind != ParamKind::Fixed; }
};

// Named overlay of fixed values; each stratum is tuned as its own study.
struct Stratum {
  std::string name;
  nlohmann::json values = nlohmann::json::object();
};

struct SearchSpace {
  std::vector<Parameter> parameters;
  std::vector<Stratum> strata;

  // Throws InvalidSearchSpace.
  void validate() const;
  const Parameter* find(std::string_view name) const;
};

SearchSpace parse_search_space(const nlohmann::json& doc);
SearchSpace load_search_space(const std::filesystem::path& path);
nlohmann::json search_space_to_json(const SearchSpace& space);

enum class TrialStatus { Completed, FailedTrain, FailedSynth, TimeoutTrain, TimeoutSynth };

std::string_view to_string(TrialStatus status);
TrialStatus trial_status_from_string(std::string_view text);

struct Trial {
  std::size_t id = 0;
  std::string stratum;
  nlohmann::json params = nlohmann::json::object();
  TrialStatus status = TrialStatus::Completed;
  std::vector<double> objectives;  // present iff completed
  double train_seconds = 0.0;
  double synth_seconds = 0.0;
  std::string message;

  bool completed() const { return status == TrialStatus::Completed; }
};

nlohmann::json trial_to_json(const Trial& trial);
Trial trial_from_json(const nlohmann::json& doc);

struct Objective {
  std::string metric;
  Direction direction = Direction::Minimize;
};

// Categorical columns: mae2 minimized; numerical: hist_iou2 maximized; both:
// the two together. Degree-1 metrics stand in when a kind has a single column.
std::vector<Objective> objectives_for_schema(const Schema& schema);

struct TpeOptions {
  double gamma = 0.25;
  std::size_t n_candidates = 24;
  std::size_t n_startup = 10;
  double bandwidth_floor = 0.01;
  double prior_weight = 1.0;
};

struct StudyConfig {
  std::size_t budget = 1;
  double train_timeout = 0.0;  // seconds; 0 = unlimited
  double synth_timeout = 0.0;
  std::uint64_t seed = 0;
  std::vector<Objective> objectives;
  TpeOptions tpe;
};

struct Study {
  SearchSpace space;
  StudyConfig config;
  std::string stratum;
  std::vector<Trial> trials;  // this stratum only, in id order

  std::size_t n_completed() const;
  void validate() const;
};

// Next parameter assignment (fixed values and the stratum overlay included).
// A pure function of the seed, the stratum and the completed trials: failed
// trials are invisible, so a failed assignment is retried as is.
nlohmann::json suggest(const Study& study);

struct TrialOutcome {
  TrialStatus status = TrialStatus::Completed;
  std::vector<double> objectives;
  double train_seconds = 0.0;
  double synth_seconds = 0.0;
  std::string message;
};

using TrialRunner = std::function<TrialOutcome(const nlohmann::json& params, std::size_t trial_id)>;

// External synthesizer driven through the train / synth command contract.
struct ExternalSynthCommand {
  std::vector<std::string> argv;
  std::filesystem::path real_csv;
  std::filesystem::path schema_json;
  std::filesystem::path workdir;
  std::size_t n_synth = 0;  // 0: as many rows as the real data
  EvaluateOptions evaluate;
};

// Runs both phases and scores the output. Never throws for adapter failures.
TrialOutcome run_external(const ExternalSynthCommand& command, const TableData& real,
                          const std::vector<Objective>& objectives, const nlohmann::json& params,
                          std::size_t trial_id, double train_timeout, double synth_timeout);

Trial run_trial(const Study& study, const nlohmann::json& params, std::size_t trial_id, const TrialRunner& runner);

std::vector<Trial> load_journal(const std::filesystem::path& path);
void append_journal(const std::filesystem::path& path, const Trial& trial);

using TrialCallback = std::function<void(const Trial&)>;

// Suggest and run until the study holds `budget` completed trials. Failed trials
// are kept for audit but never counted. `next_id` supplies trial ids and is
// advanced; when `journal` is set every trial is appended as soon as it ends.
void optimize(Study& study, const TrialRunner& runner, std::size_t& next_id,
              const std::optional<std::filesystem::path>& journal = std::nullopt, const TrialCallback& on_trial = {});

// One study per stratum (or a single unnamed one), resumed from `journal`
// when it already exists.
std::vector<Study> optimize_space(const SearchSpace& space, const StudyConfig& config, const TrialRunner& runner,
                                  const std::optional<std::filesystem::path>& journal = std::nullopt,
                                  const TrialCallback& on_trial = {});

// Single objective: the best trial, earliest id on ties. Two objectives: the
// non-dominated completed trials in id order. Throws NoCompletedTrials.
std::vector<Trial> best(const Study& study);

}  // namespace synthqa
