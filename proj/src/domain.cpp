#include "synthqa/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "synthqa/report.hpp"

namespace synthqa {

using nlohmann::json;

namespace {

std::size_t require_column(const Schema& schema, const std::string& rule, const std::string& column) {
  auto idx = schema.index_of(column);
  if (!idx) {
    throw Error(ErrorCode::UnknownColumn, "rule '" + rule + "' references unknown column '" + column + "'");
  }
  return *idx;
}

std::size_t require_categorical(const Schema& schema, const std::string& rule, const std::string& column) {
  const std::size_t idx = require_column(schema, rule, column);
  if (schema.columns[idx].kind != ColumnKind::Categorical) {
    throw Error(ErrorCode::InvalidRule, "rule '" + rule + "': column '" + column + "' must be categorical");
  }
  return idx;
}

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) { return (std::uint64_t{a} << 32) | b; }

std::string json_string(const json& obj, const char* key, const std::string& context) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw Error(ErrorCode::InvalidRule, context + ": missing string field \"" + key + "\"");
  }
  return obj[key].get<std::string>();
}

std::size_t position_in(const std::vector<std::string>& order, const std::string& level, const std::string& rule) {
  auto it = std::find(order.begin(), order.end(), level);
  if (it == order.end()) {
    throw Error(ErrorCode::InvalidRule, "rule '" + rule + "': level '" + level + "' is not in the ordered level list");
  }
  return static_cast<std::size_t>(it - order.begin());
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Distinct non-missing values of a numerical column, for pair keys.
struct NumericIndex {
  std::vector<double> values;
  std::uint32_t code(double v) const {
    return static_cast<std::uint32_t>(std::lower_bound(values.begin(), values.end(), v) - values.begin());
  }
};

NumericIndex index_numeric(const NumericalColumn& col) {
  NumericIndex idx;
  idx.values = col.present_values();
  std::sort(idx.values.begin(), idx.values.end());
  idx.values.erase(std::unique(idx.values.begin(), idx.values.end()), idx.values.end());
  return idx;
}

std::size_t distinct_pairs(const TableData& data, std::size_t col_a, std::size_t col_b) {
  const auto& a = data.categorical(col_a);
  std::unordered_set<std::uint64_t> seen;
  if (data.schema().columns[col_b].kind == ColumnKind::Categorical) {
    const auto& b = data.categorical(col_b);
    for (std::size_t r = 0; r < data.n_rows(); ++r) seen.insert(pair_key(a.codes[r], b.codes[r]));
  } else {
    const auto& b = data.numerical(col_b);
    const NumericIndex idx = index_numeric(b);
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
      if (b.missing[r]) continue;
      seen.insert(pair_key(a.codes[r], idx.code(b.values[r])));
    }
  }
  return seen.size();
}

class Accumulator {
 public:
  explicit Accumulator(RuleViolations& out) : out_(out) {}

  void flag(std::size_t row, std::uint64_t key, const TableData& data, std::size_t col_a, std::size_t col_b) {
    ++out_.n_rows_violating;
    distinct_.insert(key);
    if (out_.examples.size() < kMaxExamples) {
      out_.examples.push_back({row, data.cell_text(row, col_a), data.cell_text(row, col_b)});
    }
  }

  void finish(std::size_t n_rows) {
    out_.n_rows = n_rows;
    out_.n_distinct_violating_level_pairs = distinct_.size();
    out_.pct_samples_affected = n_rows ? static_cast<double>(out_.n_rows_violating) / static_cast<double>(n_rows) : 0.0;
  }

 private:
  RuleViolations& out_;
  std::unordered_set<std::uint64_t> distinct_;
};

void check_prefix(const PrefixRule& rule, const TableData& data, RuleViolations& out) {
  const Schema& schema = data.schema();
  const std::size_t full_idx = require_categorical(schema, rule.name, rule.full_column);
  const std::size_t prefix_idx = require_categorical(schema, rule.name, rule.prefix_column);
  const auto& full = data.categorical(full_idx);
  const auto& prefix = data.categorical(prefix_idx);
  out.column_a = rule.full_column;
  out.column_b = rule.prefix_column;
  out.possible_levels = full.levels.size() * prefix.levels.size();

  std::unordered_map<std::uint64_t, bool> verdicts;
  Accumulator acc(out);
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    const std::uint64_t key = pair_key(full.codes[r], prefix.codes[r]);
    auto [it, inserted] = verdicts.try_emplace(key, false);
    if (inserted) {
      const std::string& f = full.levels[full.codes[r]];
      const std::string& p = prefix.levels[prefix.codes[r]];
      const bool skip = f == kMissingLevel || p == kMissingLevel;
      it->second = !skip && !f.starts_with(p);
    }
    if (it->second) acc.flag(r, key, data, full_idx, prefix_idx);
  }
  acc.finish(data.n_rows());
}

void check_exclusion(const ExclusionRule& rule, const TableData& data, RuleViolations& out) {
  const Schema& schema = data.schema();
  const std::size_t a_idx = require_categorical(schema, rule.name, rule.column_a);
  const std::size_t b_idx = require_categorical(schema, rule.name, rule.column_b);
  const auto& a = data.categorical(a_idx);
  const auto& b = data.categorical(b_idx);
  out.column_a = rule.column_a;
  out.column_b = rule.column_b;
  out.possible_levels = a.levels.size() * b.levels.size();

  auto codes_matching = [](const CategoricalColumn& col, const std::string& value) {
    std::vector<std::uint32_t> codes;
    for (std::size_t l = 0; l < col.levels.size(); ++l) {
      const bool match = value == kWildcard ? col.levels[l] != kMissingLevel : col.levels[l] == value;
      if (match) codes.push_back(static_cast<std::uint32_t>(l));
    }
    return codes;
  };
  std::unordered_set<std::uint64_t> forbidden;
  for (const auto& [va, vb] : rule.forbidden) {
    for (auto ca : codes_matching(a, va)) {
      for (auto cb : codes_matching(b, vb)) forbidden.insert(pair_key(ca, cb));
    }
  }
  Accumulator acc(out);
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    const std::uint64_t key = pair_key(a.codes[r], b.codes[r]);
    if (forbidden.contains(key)) acc.flag(r, key, data, a_idx, b_idx);
  }
  acc.finish(data.n_rows());
}

void check_range(const RangeRule& rule, const TableData& data, RuleViolations& out) {
  const Schema& schema = data.schema();
  const std::size_t g_idx = require_categorical(schema, rule.name, rule.group_column);
  const std::size_t v_idx = require_column(schema, rule.name, rule.bounded_column);
  const auto& group = data.categorical(g_idx);
  out.column_a = rule.group_column;
  out.column_b = rule.bounded_column;

  std::vector<std::optional<RangeBound>> bound_of(group.levels.size());
  for (std::size_t l = 0; l < group.levels.size(); ++l) {
    auto it = rule.bounds.find(group.levels[l]);
    if (it != rule.bounds.end() && group.levels[l] != kMissingLevel) bound_of[l] = it->second;
  }

  Accumulator acc(out);
  if (rule.ordinal()) {
    if (schema.columns[v_idx].kind != ColumnKind::Categorical) {
      throw Error(ErrorCode::InvalidRule, "rule '" + rule.name + "': ordinal bounded column must be categorical");
    }
    const auto& bounded = data.categorical(v_idx);
    out.possible_levels = group.levels.size() * bounded.levels.size();
    std::vector<std::optional<double>> position(bounded.levels.size());
    for (std::size_t l = 0; l < bounded.levels.size(); ++l) {
      if (bounded.levels[l] == kMissingLevel) continue;
      position[l] = static_cast<double>(position_in(rule.order, bounded.levels[l], rule.name));
    }
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
      const auto& bound = bound_of[group.codes[r]];
      const auto& pos = position[bounded.codes[r]];
      if (!bound || !pos) continue;
      if (*pos < bound->min || *pos > bound->max) {
        acc.flag(r, pair_key(group.codes[r], bounded.codes[r]), data, g_idx, v_idx);
      }
    }
  } else {
    if (schema.columns[v_idx].kind != ColumnKind::Numerical) {
      throw Error(ErrorCode::InvalidRule,
                  "rule '" + rule.name + "': categorical bounded column needs an \"order\" list");
    }
    const auto& bounded = data.numerical(v_idx);
    const NumericIndex idx = index_numeric(bounded);
    out.possible_levels = group.levels.size() * idx.values.size();
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
      const auto& bound = bound_of[group.codes[r]];
      if (!bound || bounded.missing[r]) continue;
      const double v = bounded.values[r];
      if (v < bound->min || v > bound->max) {
        acc.flag(r, pair_key(group.codes[r], idx.code(v)), data, g_idx, v_idx);
      }
    }
  }
  acc.finish(data.n_rows());
}

}  // namespace

std::string_view rule_type(const Rule& rule) {
  switch (rule.index()) {
    case 0: return "prefix";
    case 1: return "exclusion";
    default: return "range";
  }
}

const std::string& rule_name(const Rule& rule) {
  return std::visit([](const auto& r) -> const std::string& { return r.name; }, rule);
}

RuleSet parse_rules(const json& doc) {
  if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array()) {
    throw Error(ErrorCode::InvalidRule, "expected an object with a \"rules\" array");
  }
  RuleSet set;
  std::size_t index = 0;
  for (const auto& item : doc["rules"]) {
    const std::string context = "rule #" + std::to_string(index++);
    if (!item.is_object()) throw Error(ErrorCode::InvalidRule, context + ": not an object");
    const std::string type = json_string(item, "type", context);
    const std::string name = item.contains("name") ? json_string(item, "name", context) : context;
    if (type == "prefix") {
      set.rules.emplace_back(PrefixRule{name, json_string(item, "full", context), json_string(item, "prefix", context)});
    } else if (type == "exclusion") {
      ExclusionRule rule;
      rule.name = name;
      const auto& cols = item.value("columns", json::array());
      if (!cols.is_array() || cols.size() != 2 || !cols[0].is_string() || !cols[1].is_string()) {
        throw Error(ErrorCode::InvalidRule, context + ": \"columns\" must list two column names");
      }
      rule.column_a = cols[0].get<std::string>();
      rule.column_b = cols[1].get<std::string>();
      for (const auto& pair : item.value("forbidden", json::array())) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
          throw Error(ErrorCode::InvalidRule, context + ": forbidden entries must be [value_a, value_b]");
        }
        auto a = pair[0].get<std::string>();
        auto b = pair[1].get<std::string>();
        if (a == kWildcard && b == kWildcard) {
          throw Error(ErrorCode::InvalidRule, context + ": wildcard allowed on one side only");
        }
        rule.forbidden.emplace_back(std::move(a), std::move(b));
      }
      set.rules.emplace_back(std::move(rule));
    } else if (type == "range") {
      RangeRule rule;
      rule.name = name;
      rule.group_column = json_string(item, "group", context);
      rule.bounded_column = json_string(item, "bounded", context);
      if (item.contains("order")) rule.order = item["order"].get<std::vector<std::string>>();
      if (item.contains("bounds")) {
        for (const auto& [level, bound] : item["bounds"].items()) {
          if (!bound.is_array() || bound.size() != 2) {
            throw Error(ErrorCode::InvalidRule, context + ": bounds must be [min, max]");
          }
          RangeBound b;
          if (rule.ordinal()) {
            b.min = static_cast<double>(position_in(rule.order, bound[0].get<std::string>(), name));
            b.max = static_cast<double>(position_in(rule.order, bound[1].get<std::string>(), name));
          } else {
            b.min = bound[0].get<double>();
            b.max = bound[1].get<double>();
          }
          if (b.min > b.max) throw Error(ErrorCode::InvalidRule, context + ": min > max for '" + level + "'");
          rule.bounds[level] = b;
        }
      }
      set.rules.emplace_back(std::move(rule));
    } else {
      throw Error(ErrorCode::InvalidRule, context + ": unknown rule type '" + type + "'");
    }
  }
  return set;
}

RuleSet load_rules(const std::filesystem::path& path) {
  try {
    return parse_rules(read_json_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidRule, path.string() + ": " + e.what());
  }
}

json rules_to_json(const RuleSet& rules) {
  json arr = json::array();
  for (const auto& rule : rules.rules) {
    json item;
    item["type"] = std::string(rule_type(rule));
    item["name"] = rule_name(rule);
    if (const auto* p = std::get_if<PrefixRule>(&rule)) {
      item["full"] = p->full_column;
      item["prefix"] = p->prefix_column;
    } else if (const auto* e = std::get_if<ExclusionRule>(&rule)) {
      item["columns"] = {e->column_a, e->column_b};
      json forbidden = json::array();
      for (const auto& [a, b] : e->forbidden) forbidden.push_back({a, b});
      item["forbidden"] = std::move(forbidden);
    } else {
      const auto& r = std::get<RangeRule>(rule);
      item["group"] = r.group_column;
      item["bounded"] = r.bounded_column;
      if (r.ordinal()) item["order"] = r.order;
      json bounds = json::object();
      for (const auto& [level, b] : r.bounds) {
        if (r.ordinal()) {
          bounds[level] = {r.order[static_cast<std::size_t>(b.min)], r.order[static_cast<std::size_t>(b.max)]};
        } else {
          bounds[level] = {b.min, b.max};
        }
      }
      item["bounds"] = std::move(bounds);
    }
    arr.push_back(std::move(item));
  }
  return json{{"rules", std::move(arr)}};
}

void validate_rules(const RuleSet& rules, const Schema& schema) {
  for (const auto& rule : rules.rules) {
    if (const auto* p = std::get_if<PrefixRule>(&rule)) {
      require_categorical(schema, p->name, p->full_column);
      require_categorical(schema, p->name, p->prefix_column);
    } else if (const auto* e = std::get_if<ExclusionRule>(&rule)) {
      require_categorical(schema, e->name, e->column_a);
      require_categorical(schema, e->name, e->column_b);
    } else {
      const auto& r = std::get<RangeRule>(rule);
      require_categorical(schema, r.name, r.group_column);
      const std::size_t v = require_column(schema, r.name, r.bounded_column);
      const bool categorical = schema.columns[v].kind == ColumnKind::Categorical;
      if (categorical != r.ordinal()) {
        throw Error(ErrorCode::InvalidRule, "rule '" + r.name +
                                                "': ordinal columns need an \"order\" list, numerical columns must not have one");
      }
    }
  }
}

RangeRule fit_range_rule(const RangeRule& rule, const TableData& real) {
  const Schema& schema = real.schema();
  const std::size_t g_idx = require_categorical(schema, rule.name, rule.group_column);
  const std::size_t v_idx = require_column(schema, rule.name, rule.bounded_column);
  const auto& group = real.categorical(g_idx);

  std::vector<std::optional<RangeBound>> fitted(group.levels.size());
  auto include = [&](std::uint32_t g, double v) {
    auto& b = fitted[g];
    if (!b) {
      b = RangeBound{v, v};
    } else {
      b->min = std::min(b->min, v);
      b->max = std::max(b->max, v);
    }
  };
  if (rule.ordinal()) {
    const auto& bounded = real.categorical(v_idx);
    std::vector<std::optional<double>> position(bounded.levels.size());
    for (std::size_t l = 0; l < bounded.levels.size(); ++l) {
      if (bounded.levels[l] == kMissingLevel) continue;
      position[l] = static_cast<double>(position_in(rule.order, bounded.levels[l], rule.name));
    }
    for (std::size_t r = 0; r < real.n_rows(); ++r) {
      if (const auto& pos = position[bounded.codes[r]]) include(group.codes[r], *pos);
    }
  } else {
    const auto& bounded = real.numerical(v_idx);
    for (std::size_t r = 0; r < real.n_rows(); ++r) {
      if (!bounded.missing[r]) include(group.codes[r], bounded.values[r]);
    }
  }
  RangeRule out = rule;
  out.bounds.clear();
  out.fitted = true;
  for (std::size_t l = 0; l < group.levels.size(); ++l) {
    if (fitted[l] && group.levels[l] != kMissingLevel) out.bounds[group.levels[l]] = *fitted[l];
  }
  return out;
}

RuleSet fit_range_rules(const RuleSet& rules, const TableData& real) {
  RuleSet out = rules;
  for (auto& rule : out.rules) {
    if (auto* r = std::get_if<RangeRule>(&rule); r && r->bounds.empty()) *r = fit_range_rule(*r, real);
  }
  return out;
}

ViolationReport check(const RuleSet& rules, const TableData& data, const TableData* reference) {
  validate_rules(rules, data.schema());
  ViolationReport report;
  for (const auto& rule : rules.rules) {
    RuleViolations v;
    v.name = rule_name(rule);
    v.type = std::string(rule_type(rule));
    if (const auto* p = std::get_if<PrefixRule>(&rule)) {
      check_prefix(*p, data, v);
    } else if (const auto* e = std::get_if<ExclusionRule>(&rule)) {
      check_exclusion(*e, data, v);
    } else {
      check_range(std::get<RangeRule>(rule), data, v);
    }
    if (reference) {
      const Schema& ref_schema = reference->schema();
      const auto a = require_categorical(ref_schema, v.name, v.column_a);
      const auto b = require_column(ref_schema, v.name, v.column_b);
      v.levels_observed_in_real = distinct_pairs(*reference, a, b);
    }
    report.rules.push_back(std::move(v));
  }
  return report;
}

json violation_report_to_json(const ViolationReport& report) {
  json arr = json::array();
  for (const auto& r : report.rules) {
    json examples = json::array();
    for (const auto& e : r.examples) examples.push_back({{"row", e.row}, {"a", e.value_a}, {"b", e.value_b}});
    arr.push_back({{"name", r.name},
                   {"type", r.type},
                   {"columns", {r.column_a, r.column_b}},
                   {"possible_levels", r.possible_levels},
                   {"levels_observed_in_real",
                    r.levels_observed_in_real ? json(*r.levels_observed_in_real) : json(nullptr)},
                   {"n_distinct_violating_level_pairs", r.n_distinct_violating_level_pairs},
                   {"n_rows_violating", r.n_rows_violating},
                   {"n_rows", r.n_rows},
                   {"pct_samples_affected", r.pct_samples_affected},
                   {"examples", std::move(examples)}});
  }
  return json{{"rules", std::move(arr)}};
}

std::string violation_report_to_csv(const ViolationReport& report) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    return out + "\"";
  };
  std::string out =
      "rule,type,column_a,column_b,possible_levels,levels_observed_in_real,n_distinct,pct_samples,n_rows_violating,"
      "n_rows\n";
  for (const auto& r : report.rules) {
    char pct[32];
    std::snprintf(pct, sizeof pct, "%.2f%%", r.pct_samples_affected * 100.0);
    out += quote(r.name) + "," + r.type + "," + quote(r.column_a) + "," + quote(r.column_b) + "," +
           std::to_string(r.possible_levels) + "," +
           (r.levels_observed_in_real ? std::to_string(*r.levels_observed_in_real) : std::string()) + "," +
           std::to_string(r.n_distinct_violating_level_pairs) + "," + pct + "," +
           std::to_string(r.n_rows_violating) + "," + std::to_string(r.n_rows) + "\n";
  }
  return out;
}

}  // namespace synthqa
