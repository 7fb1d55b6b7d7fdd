#include <doctest.h>

#include <algorithm>
#include <random>

#include "synthqa/domain.hpp"

using namespace synthqa;
using nlohmann::json;

namespace {

const std::string kFixtures = SYNTHQA_FIXTURES;
const std::string kConfigs = SYNTHQA_CONFIGS;

Schema epi_schema() { return load_schema(kFixtures + "/epicancer_schema.json"); }

const RuleViolations& find(const ViolationReport& r, const std::string& name) {
  for (const auto& v : r.rules) {
    if (v.name == name) return v;
  }
  FAIL("rule not in report: " << name);
  return r.rules.front();
}

Schema cat_schema(std::initializer_list<const char*> names) {
  Schema s;
  for (auto n : names) s.columns.push_back({n, ColumnKind::Categorical});
  return s;
}

}  // namespace

TEST_CASE("prefix semantics") {
  const Schema s = cat_schema({"full", "short"});
  RuleSet rules = parse_rules(json::parse(R"({"rules":[{"type":"prefix","name":"p","full":"full","prefix":"short"}]})"));
  const auto data = TableData::from_rows(s, {{"C61.0", "C20"}, {"C20.9", "C20"}, {"", "C20"}});
  const auto r = check(rules, data);
  REQUIRE(r.rules.size() == 1);
  CHECK(r.rules[0].n_rows_violating == 1);
  CHECK(r.rules[0].n_distinct_violating_level_pairs == 1);
  REQUIRE(r.rules[0].examples.size() == 1);
  CHECK(r.rules[0].examples[0].row == 0);
  CHECK(r.rules[0].examples[0].value_a == "C61.0");
  CHECK(r.rules[0].pct_samples_affected == doctest::Approx(1.0 / 3));
}

TEST_CASE("shipped rules on the fixtures") {
  const RuleSet rules = load_rules(kConfigs + "/epicancer_rules.json");
  const auto real = load_csv(kFixtures + "/epicancer_real.csv", epi_schema());
  const auto synth = load_csv(kFixtures + "/epicancer_synth.csv", epi_schema());
  validate_rules(rules, real.schema());
  const auto fitted = fit_range_rules(rules, real);

  const auto on_real = check(fitted, real, &real);
  for (const auto& v : on_real.rules) {
    CHECK(v.n_rows_violating == 0);
    CHECK(v.pct_samples_affected == 0.0);
  }

  const auto r = check(fitted, synth, &real);
  CHECK(find(r, "sex_vs_icd3").n_rows_violating == 3);
  CHECK(find(r, "sex_vs_icd3").n_distinct_violating_level_pairs == 3);
  CHECK(find(r, "icd_vs_icd3").n_rows_violating == 1);
  CHECK(find(r, "age_group_vs_icd3").n_rows_violating == 1);
  CHECK(find(r, "age_group_vs_icd3").examples.at(0).value_b == "a00b04");
  REQUIRE(find(r, "sex_vs_icd3").levels_observed_in_real);

  const auto csv = violation_report_to_csv(r);
  CHECK(csv.rfind("rule,type,column_a,column_b,possible_levels,levels_observed_in_real,n_distinct,pct_samples,", 0) == 0);
  CHECK(csv.find("37.50%") != std::string::npos);
  const auto j = violation_report_to_json(r);
  CHECK(j["rules"].size() == 3);
}

TEST_CASE("sex exclusion flags a female prostate row") {
  const RuleSet rules = load_rules(kConfigs + "/icd_sex_exclusion.json");
  const Schema s = cat_schema({"SEX", "ICDGM10DREI"});
  const auto data = TableData::from_rows(s, {{"2", "C61"}, {"1", "C61"}, {"2", "C50"}});
  const auto r = check(rules, data);
  CHECK(r.rules[0].n_distinct_violating_level_pairs == 1);
  CHECK(r.rules[0].n_rows_violating == 1);
  CHECK(r.rules[0].possible_levels == 4);
}

TEST_CASE("wildcard exclusion") {
  const Schema s = cat_schema({"a", "b"});
  const auto rules = parse_rules(
      json::parse(R"({"rules":[{"type":"exclusion","name":"e","columns":["a","b"],"forbidden":[["*","z"]]}]})"));
  const auto data = TableData::from_rows(s, {{"x", "z"}, {"y", "z"}, {"", "z"}, {"x", "w"}});
  const auto r = check(rules, data);
  CHECK(r.rules[0].n_rows_violating == 2);
  CHECK(r.rules[0].n_distinct_violating_level_pairs == 2);
  CHECK_THROWS_AS(parse_rules(json::parse(
                      R"({"rules":[{"type":"exclusion","name":"e","columns":["a","b"],"forbidden":[["*","*"]]}]})")),
                  Error);
}

TEST_CASE("range fitting") {
  Schema s = cat_schema({"g"});
  s.columns.push_back({"age", ColumnKind::Numerical});
  const auto real = TableData::from_rows(s, {{"G", "30"}, {"G", "41"}, {"G", "50"}, {"H", "7"}, {"K", ""}});
  RangeRule rule{"r", "g", "age", {}, {}, false};
  const auto fitted = fit_range_rule(rule, real);
  CHECK(fitted.fitted);
  CHECK(fitted.bounds.at("G").min == 30);
  CHECK(fitted.bounds.at("G").max == 50);
  CHECK(fitted.bounds.at("H").min == fitted.bounds.at("H").max);
  CHECK_FALSE(fitted.bounds.count("K"));

  RuleSet set{{fitted}};
  const auto synth = TableData::from_rows(s, {{"G", "29"}, {"G", "50"}, {"H", "8"}, {"Z", "1"}});
  const auto r = check(set, synth);
  CHECK(r.rules[0].n_rows_violating == 2);
}

TEST_CASE("ordinal range bounds are positions") {
  const Schema s = cat_schema({"icd", "age"});
  const auto rules = parse_rules(json::parse(R"({"rules":[{"type":"range","name":"r","group":"icd","bounded":"age",
      "order":["a00b04","a05b09","a10b14","a15b19"]}]})"));
  const auto real = TableData::from_rows(s, {{"C1", "a05b09"}, {"C1", "a10b14"}});
  const auto fitted = fit_range_rules(rules, real);
  const auto& rr = std::get<RangeRule>(fitted.rules[0]);
  CHECK(rr.bounds.at("C1").min == 1);
  CHECK(rr.bounds.at("C1").max == 2);
  const auto synth = TableData::from_rows(s, {{"C1", "a00b04"}, {"C1", "a15b19"}, {"C1", "a10b14"}});
  CHECK(check(fitted, synth).rules[0].n_rows_violating == 2);
  CHECK(check(fitted, synth).rules[0].n_distinct_violating_level_pairs == 2);
}

TEST_CASE("possible levels is the product of dictionary sizes") {
  const Schema s = cat_schema({"icd", "icd3"});
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < 556; ++i) {
    const int chapter = i % 108;
    rows.push_back({"C" + std::to_string(100 + chapter) + "." + std::to_string(i / 108),
                    "C" + std::to_string(100 + chapter)});
  }
  const auto data = TableData::from_rows(s, rows);
  const auto rules =
      parse_rules(json::parse(R"({"rules":[{"type":"prefix","name":"p","full":"icd","prefix":"icd3"}]})"));
  const auto r = check(rules, data, &data);
  CHECK(r.rules[0].possible_levels == 60048);
  CHECK(r.rules[0].levels_observed_in_real == 556);
  CHECK(r.rules[0].n_rows_violating == 0);
}

TEST_CASE("permutation invariance and duplicate rows") {
  const RuleSet rules = fit_range_rules(load_rules(kConfigs + "/epicancer_rules.json"),
                                        load_csv(kFixtures + "/epicancer_real.csv", epi_schema()));
  const auto synth = load_csv(kFixtures + "/epicancer_synth.csv", epi_schema());
  std::vector<std::vector<std::string>> rows;
  for (std::size_t r = 0; r < synth.n_rows(); ++r) {
    std::vector<std::string> row;
    for (std::size_t c = 0; c < synth.n_columns(); ++c) row.push_back(synth.cell_text(r, c));
    rows.push_back(row);
  }
  const auto base = check(rules, synth);
  std::mt19937_64 rng(9);
  for (int iter = 0; iter < 10; ++iter) {
    auto shuffled = rows;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto r = check(rules, TableData::from_rows(epi_schema(), shuffled));
    for (std::size_t i = 0; i < r.rules.size(); ++i) {
      CHECK(r.rules[i].n_rows_violating == base.rules[i].n_rows_violating);
      CHECK(r.rules[i].n_distinct_violating_level_pairs == base.rules[i].n_distinct_violating_level_pairs);
    }
  }
  auto dup = rows;
  dup.push_back(rows[0]);  // (2, C61): sex violation
  const auto r = check(rules, TableData::from_rows(epi_schema(), dup));
  CHECK(find(r, "sex_vs_icd3").n_distinct_violating_level_pairs ==
        find(base, "sex_vs_icd3").n_distinct_violating_level_pairs);
  CHECK(find(r, "sex_vs_icd3").pct_samples_affected > find(base, "sex_vs_icd3").pct_samples_affected);
  for (const auto& v : r.rules) CHECK(v.n_distinct_violating_level_pairs <= v.possible_levels);
}

TEST_CASE("rule validation errors") {
  const Schema s = cat_schema({"a", "b"});
  CHECK_THROWS_AS(parse_rules(json::parse(R"({"rules":[{"type":"regex","name":"x"}]})")), Error);
  const auto unknown =
      parse_rules(json::parse(R"({"rules":[{"type":"prefix","name":"p","full":"a","prefix":"nope"}]})"));
  try {
    validate_rules(unknown, s);
    FAIL("expected UnknownColumn");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownColumn);
  }
  const auto round = rules_to_json(load_rules(kConfigs + "/epicancer_rules.json"));
  CHECK(rules_to_json(parse_rules(round)) == round);
}
