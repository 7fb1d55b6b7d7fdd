#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "synthqa/dataset.hpp"

using namespace synthqa;

namespace {

Schema mixed_schema() {
  return parse_schema_json(R"({"columns":[{"name":"a","kind":"categorical"},{"name":"x","kind":"numerical"}]})");
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("schema parsing and validation") {
  const Schema s = mixed_schema();
  REQUIRE(s.columns.size() == 2);
  CHECK(s.columns[1].kind == ColumnKind::Numerical);
  CHECK(s.index_of("x") == 1);
  CHECK_FALSE(s.index_of("y"));
  CHECK(s.count(ColumnKind::Categorical) == 1);
  CHECK(parse_schema_json(schema_to_json(s)).same_columns(s));

  CHECK(code_of([] { parse_schema_json(R"({"columns":[]})"); }) == ErrorCode::InvalidSchema);
  CHECK(code_of([] {
          parse_schema_json(R"({"columns":[{"name":"a","kind":"categorical"},{"name":"a","kind":"numerical"}]})");
        }) == ErrorCode::InvalidSchema);
  CHECK(code_of([] { parse_schema_json(R"({"columns":[{"name":"a","kind":"ordinal"}]})"); }) ==
        ErrorCode::InvalidSchema);
  CHECK(code_of([] { parse_schema_json("{"); }) == ErrorCode::InvalidSchema);
}

TEST_CASE("csv parsing keeps levels and missing cells") {
  const auto t = parse_csv("x,a\n1.5,red\n,\"blue, dark\"\n3,\n", mixed_schema());
  REQUIRE(t.n_rows() == 3);
  const auto& a = t.categorical(0);
  CHECK(t.cell_text(1, 0) == "blue, dark");
  CHECK(a.levels[a.codes[2]] == kMissingLevel);
  const auto& x = t.numerical(1);
  CHECK(x.missing[1] == 1);
  CHECK(x.missing_count() == 1);
  CHECK(x.present_values() == std::vector<double>{1.5, 3.0});
}

TEST_CASE("csv errors") {
  CHECK(code_of([] { parse_csv("a\nred\n", mixed_schema()); }) == ErrorCode::MissingColumn);
  CHECK(code_of([] { parse_csv("a,x\nred,abc\n", mixed_schema()); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_csv("a,x\nred\n", mixed_schema()); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_csv("a,x\n\"red,1\n", mixed_schema()); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_csv("", mixed_schema()); }) == ErrorCode::EmptyFile);
  CHECK(code_of([] { load_csv("/nonexistent/file.csv", mixed_schema()); }) == ErrorCode::Io);
}

TEST_CASE("csv round trip") {
  const auto t = parse_csv("a,x\n\"q\"\"uote\",2\nplain,\n", mixed_schema());
  const auto back = parse_csv(to_csv(t), mixed_schema());
  REQUIRE(back.n_rows() == 2);
  CHECK(back.cell_text(0, 0) == "q\"uote");
  CHECK(back.cell_text(0, 1) == t.cell_text(0, 1));
  CHECK(back.numerical(1).missing[1] == 1);

  const auto dir = std::filesystem::temp_directory_path() / "synthqa_dataset_test";
  std::filesystem::create_directories(dir);
  write_csv(t, dir / "t.csv");
  CHECK(to_csv(load_csv(dir / "t.csv", mixed_schema())) == to_csv(t));
  std::filesystem::remove_all(dir);
}

TEST_CASE("profile counts present levels plus numerical columns") {
  const auto t = parse_csv("a,x\nr,1\ng,2\nr,\n", mixed_schema());
  const auto p = profile(t);
  CHECK(p.n_samples == 3);
  CHECK(p.n_categorical == 1);
  CHECK(p.n_numerical == 1);
  CHECK(p.total_categories == 2);
  CHECK(p.vector_size == 3);
}

TEST_CASE("aligned dictionaries are sorted and tagged by origin") {
  Schema s = parse_schema_json(R"({"columns":[{"name":"a","kind":"categorical"}]})");
  const auto real = parse_csv("a\nb\nc\nb\n", s);
  const auto synth = parse_csv("a\nz\nb\n", s);
  const auto pair = align_dictionaries(real, synth);
  const auto& levels = pair.real.categorical(0).levels;
  REQUIRE(levels == std::vector<std::string>{"b", "c", "z"});
  CHECK(pair.synth.categorical(0).levels == levels);
  CHECK(pair.origins[0][0] == LevelOrigin::Shared);
  CHECK(pair.origins[0][1] == LevelOrigin::RealOnly);
  CHECK(pair.origins[0][2] == LevelOrigin::SynthOnly);
  CHECK(pair.synth.cell_text(0, 0) == "z");
}

TEST_CASE("compacted drops unused levels") {
  Schema s = parse_schema_json(R"({"columns":[{"name":"a","kind":"categorical"}]})");
  CategoricalColumn col{{"x", "y", "z"}, {2, 2, 0}, {}};
  TableData t(s, {col});
  const auto c = t.compacted();
  CHECK(c.categorical(0).levels == std::vector<std::string>{"x", "z"});
  CHECK(c.cell_text(0, 0) == "z");
  CHECK(c.cell_text(2, 0) == "x");
}

TEST_CASE("custom missing token") {
  Schema s = parse_schema_json(
      R"({"columns":[{"name":"a","kind":"categorical"},{"name":"x","kind":"numerical"}],"missing_token":"NA"})");
  const auto t = parse_csv("a,x\nNA,NA\n,4\n", s);
  CHECK(t.categorical(0).levels[t.categorical(0).codes[0]] == kMissingLevel);
  CHECK(t.numerical(1).missing[0] == 1);
  CHECK(t.cell_text(0, 1) == "NA");
}
