#include <doctest.h>

#include <map>
#include <random>

#include "oracle.hpp"
#include "synthqa/marginals.hpp"
#include "synthqa/metrics.hpp"

using namespace synthqa;

namespace {

Schema cat_schema(std::size_t n) {
  Schema s;
  for (std::size_t i = 0; i < n; ++i) s.columns.push_back({"c" + std::to_string(i), ColumnKind::Categorical});
  return s;
}

}  // namespace

TEST_CASE("tuple canonical form") {
  VariableTuple t({0, 2});
  CHECK(t.degree() == 2);
  CHECK(t.label(cat_schema(3)) == "c0 x c2");
  CHECK_THROWS_AS(VariableTuple({2, 0}), Error);
  CHECK_THROWS_AS(VariableTuple({1, 1}), Error);
  CHECK_THROWS_AS(VariableTuple({0, 1, 2, 3}), Error);
}

TEST_CASE("enumerate tuples is lexicographic and kind-filtered") {
  Schema s = cat_schema(4);
  s.columns[2].kind = ColumnKind::Numerical;
  const auto pairs = enumerate_tuples(s, 2, ColumnKind::Categorical);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].columns() == std::vector<std::size_t>{0, 1});
  CHECK(pairs[1].columns() == std::vector<std::size_t>{0, 3});
  CHECK(pairs[2].columns() == std::vector<std::size_t>{1, 3});
  CHECK(enumerate_tuples(cat_schema(10), 2, ColumnKind::Categorical).size() == 45);
  CHECK(enumerate_tuples(cat_schema(10), 3, ColumnKind::Categorical).size() == 120);
  CHECK(enumerate_tuples(s, 2, ColumnKind::Numerical).empty());
}

TEST_CASE("hand-counted pairwise table") {
  const Schema s = cat_schema(2);
  const auto real = TableData::from_rows(s, {{"a", "x"}, {"a", "y"}, {"b", "x"}, {"b", "x"}});
  const auto synth = TableData::from_rows(s, {{"a", "x"}, {"a", "x"}, {"c", "y"}});
  const auto pair = align_dictionaries(real, synth);
  const auto t = count_marginal(pair, VariableTuple({0, 1}));
  CHECK(t.n_real == 4);
  CHECK(t.n_synth == 3);
  // union support: (a,x) (a,y) (b,x) (c,y)
  REQUIRE(t.cells.size() == 4);
  std::map<std::pair<std::string, std::string>, std::pair<std::uint64_t, std::uint64_t>> got;
  const auto& l0 = pair.real.categorical(0).levels;
  const auto& l1 = pair.real.categorical(1).levels;
  for (const auto& c : t.cells) got[{l0[c.codes[0]], l1[c.codes[1]]}] = {c.count_real, c.count_synth};
  CHECK(got[{"a", "x"}] == std::pair<std::uint64_t, std::uint64_t>{1, 2});
  CHECK(got[{"a", "y"}] == std::pair<std::uint64_t, std::uint64_t>{1, 0});
  CHECK(got[{"b", "x"}] == std::pair<std::uint64_t, std::uint64_t>{2, 0});
  CHECK(got[{"c", "y"}] == std::pair<std::uint64_t, std::uint64_t>{0, 1});
  for (std::size_t i = 1; i < t.cells.size(); ++i) CHECK(t.cells[i - 1].codes < t.cells[i].codes);
}

TEST_CASE("counts match the oracle and conserve mass") {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 40; ++iter) {
    auto d = oracle::random_pair(rng, 5, 4, 60, false);
    const auto pair = align_dictionaries(oracle::table(d.schema, d.real), oracle::table(d.schema, d.synth));
    for (std::size_t k = 1; k <= 3; ++k) {
      for (const auto& tuple : enumerate_tuples(d.schema, k, ColumnKind::Categorical)) {
        const auto t = count_marginal(pair, tuple);
        const auto o = oracle::count(d, tuple.columns(), 10);
        REQUIRE(t.cells.size() == o.cells.size());
        std::uint64_t sr = 0, ss = 0;
        for (const auto& c : t.cells) {
          oracle::Key key;
          for (std::size_t i = 0; i < k; ++i) {
            std::string level = pair.real.categorical(tuple[i]).levels[c.codes[i]];
            key.push_back(level == kMissingLevel ? "<missing>" : level);
          }
          const auto it = o.cells.find(key);
          REQUIRE(it != o.cells.end());
          CHECK(c.count_real == it->second.first);
          CHECK(c.count_synth == it->second.second);
          sr += c.count_real;
          ss += c.count_synth;
        }
        CHECK(sr == d.real.size());
        CHECK(ss == d.synth.size());
      }
    }
  }
}

TEST_CASE("binned numerical rows with missing values are excluded") {
  Schema s = cat_schema(1);
  s.columns.push_back({"x", ColumnKind::Numerical});
  const auto real = TableData::from_rows(s, {{"a", "1"}, {"a", ""}, {"b", "2"}});
  const auto synth = TableData::from_rows(s, {{"a", "9"}, {"b", ""}});
  const auto pair = bin_numeric(align_dictionaries(real, synth), fit_bins(real, 4));
  const auto t = count_marginal(pair, VariableTuple({1}));
  CHECK(t.n_real == 2);
  CHECK(t.n_synth == 1);
  CHECK_THROWS_AS(count_marginal(align_dictionaries(real, synth), VariableTuple({1})), Error);
}
