#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "synthqa/dataset.hpp"

namespace synthqa {

inline constexpr std::string_view kWildcard = "*";

// Violation when the value of `prefix_column` is not a string prefix of `full_column`.
struct PrefixRule {
  std::string name;
  std::string full_column;
  std::string prefix_column;
};

// Violation when (a, b) matches a listed pair. Either side of a pair may be "*"
// (never both); the wildcard does not match the missing level.
struct ExclusionRule {
  std::string name;
  std::string column_a;
  std::string column_b;
  std::vector<std::pair<std::string, std::string>> forbidden;
};

struct RangeBound {
  double min = 0.0;
  double max = 0.0;
};

// Per group level, the bounded column must stay within [min, max]. For ordinal
// columns (`order` non-empty) bounds are positions in `order`.
struct RangeRule {
  std::string name;
  std::string group_column;
  std::string bounded_column;
  std::vector<std::string> order;
  std::map<std::string, RangeBound> bounds;
  bool fitted = false;

  bool ordinal() const { return !order.empty(); }
};

using Rule = std::variant<PrefixRule, ExclusionRule, RangeRule>;

struct RuleSet {
  std::vector<Rule> rules;
};

std::string_view rule_type(const Rule& rule);
const std::string& rule_name(const Rule& rule);

RuleSet parse_rules(const nlohmann::json& doc);
RuleSet load_rules(const std::filesystem::path& path);
nlohmann::json rules_to_json(const RuleSet& rules);

// Throws UnknownColumn / InvalidRule when the rules do not fit the schema.
void validate_rules(const RuleSet& rules, const Schema& schema);

// Bounds = observed (min, max) per group level in `real`. Group levels whose rows
// all lack a bounded value get no bound.
RangeRule fit_range_rule(const RangeRule& rule, const TableData& real);
// Fits every range rule that has no explicit bounds.
RuleSet fit_range_rules(const RuleSet& rules, const TableData& real);

struct ViolationExample {
  std::size_t row = 0;
  std::string value_a;
  std::string value_b;
};

struct RuleViolations {
  std::string name;
  std::string type;
  std::string column_a;
  std::string column_b;
  std::size_t possible_levels = 0;
  std::optional<std::size_t> levels_observed_in_real;
  std::size_t n_distinct_violating_level_pairs = 0;
  std::size_t n_rows_violating = 0;
  std::size_t n_rows = 0;
  double pct_samples_affected = 0.0;
  std::vector<ViolationExample> examples;
};

struct ViolationReport {
  std::vector<RuleViolations> rules;
};

inline constexpr std::size_t kMaxExamples = 10;

// `reference` (the real data), when given, supplies the observed-level counts.
ViolationReport check(const RuleSet& rules, const TableData& data, const TableData* reference = nullptr);

nlohmann::json violation_report_to_json(const ViolationReport& report);
// One row per rule, Table-7 layout.
std::string violation_report_to_csv(const ViolationReport& report);

}  // namespace synthqa
