#include <doctest.h>

#include <random>

#include "synthqa/metrics.hpp"
#include "synthqa/refsynth.hpp"

using namespace synthqa;

namespace {

Schema schema_of(std::initializer_list<std::pair<const char*, ColumnKind>> cols) {
  Schema s;
  for (const auto& [n, k] : cols) s.columns.push_back({n, k});
  return s;
}

TableData random_real(std::uint64_t seed, std::size_t n) {
  const Schema s = schema_of({{"a", ColumnKind::Categorical},
                              {"b", ColumnKind::Categorical},
                              {"x", ColumnKind::Numerical}});
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = rng() % 4;
    rows.push_back({std::string(1, static_cast<char>('A' + v)), std::string(1, static_cast<char>('P' + rng() % 3)),
                    i % 10 == 0 ? "" : std::to_string(rng() % 100)});
  }
  return TableData::from_rows(s, rows);
}

}  // namespace

TEST_CASE("samplers are deterministic and keep the schema") {
  const auto real = random_real(1, 300);
  for (auto fn : {&independent_sample, &bootstrap_sample}) {
    const auto a = fn(real, 200, 42);
    const auto b = fn(real, 200, 42);
    const auto c = fn(real, 200, 43);
    CHECK(a.n_rows() == 200);
    CHECK(a.schema().same_columns(real.schema()));
    CHECK(to_csv(a) == to_csv(b));
    CHECK(to_csv(a) != to_csv(c));
  }
  CHECK(to_csv(mode_collapse_sample(real, 5)) == to_csv(mode_collapse_sample(real, 5)));
  CHECK_THROWS_AS(bootstrap_sample(real, 0, 1), Error);
}

TEST_CASE("independent sampler fits marginals at large n") {
  const auto real = random_real(2, 2000);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = evaluate(real, independent_sample(real, 100000, seed));
    CHECK(*r.mae1 < 0.01);
  }
}

TEST_CASE("independence breaks perfectly correlated columns") {
  const Schema s = schema_of({{"a", ColumnKind::Categorical}, {"b", ColumnKind::Categorical}});
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < 1000; ++i) rows.push_back(i % 2 ? std::vector<std::string>{"0", "0"} : std::vector<std::string>{"1", "1"});
  const auto real = TableData::from_rows(s, rows);
  const auto r = evaluate(real, independent_sample(real, 100000, 3));
  CHECK(*r.invented2 == doctest::Approx(0.5).epsilon(0.02));
  const auto single = TableData::from_rows(s, {{"k", "k"}, {"k", "k"}});
  const auto out = independent_sample(single, 10, 0);
  for (std::size_t i = 0; i < 10; ++i) CHECK(out.cell_text(i, 0) == "k");
}

TEST_CASE("bootstrap stays inside the real support") {
  const auto real = random_real(4, 500);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = evaluate(real, bootstrap_sample(real, real.n_rows(), seed));
    CHECK(*r.invented2 == 0.0);
    CHECK(*r.coverage1 <= 1.0);
    CHECK(*evaluate(real, bootstrap_sample(real, 1, seed)).invented2 == 0.0);
  }
  const auto big = evaluate(real, bootstrap_sample(real, 200000, 1));
  CHECK(*big.mae2 < 0.005);
  CHECK(*big.coverage2 == 1.0);
  CHECK(*big.hist_iou1 > 0.97);
}

TEST_CASE("mode collapse") {
  const Schema s = schema_of({{"a", ColumnKind::Categorical}, {"b", ColumnKind::Categorical}});
  const auto real = TableData::from_rows(s, {{"A", "Y"}, {"A", "Y"}, {"A", "Z"}, {"B", "X"}, {"C", "X"}, {"C", "X"}});
  const auto out = mode_collapse_sample(real, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(out.cell_text(i, 0) == "A");
    CHECK(out.cell_text(i, 1) == "X");  // X and Y tie at 3; X is smaller
  }
  const auto r = evaluate(real, out);
  CHECK(*r.coverage1 == doctest::Approx((1.0 / 3 + 1.0 / 3) / 2));
  CHECK(*r.invented2 == 1.0);  // (A, X) never co-occurs in real

  const auto simple = TableData::from_rows(s, {{"A", "Q"}, {"A", "Q"}, {"A", "Q"}, {"B", "R"}});
  const auto r2 = evaluate(simple, mode_collapse_sample(simple, 3));
  CHECK(*r2.coverage1 == 0.5);
  CHECK(*r2.invented2 == 0.0);
}
