#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>

#include "faceverify/manifest.hpp"

using namespace faceverify;

namespace {

const char* kGood =
    "path,subject,split\n"
    "a/0.pgm,0,train\n"
    "a/1.pgm,0,eval\n"
    "a/2.pgm,0,test\n"
    "b/0.pgm,1,train\n"
    "b/1.pgm,1,eval\n"
    "b/2.pgm,1,test\n"
    "c/0.pgm,2,train\n"
    "c/1.pgm,2,eval\n"
    "c/2.pgm,2,test\n";

}  // namespace

TEST_CASE("manifest with three subjects across all splits", "[manifest]") {
  const DatasetManifest m = parse_manifest(kGood);
  CHECK(m.entries.size() == 9);
  CHECK(m.subjects() == std::set<int>{0, 1, 2});
  CHECK(m.in_split(Split::train).size() == 3);
  CHECK(m.in_split(Split::eval).size() == 3);
  CHECK(m.in_split(Split::test).size() == 3);
}

TEST_CASE("unknown split tag is rejected with its line number", "[manifest]") {
  const std::string text =
      "path,subject,split\n"
      "a/0.pgm,0,train\n"
      "a/1.pgm,0,validation\n";
  CHECK_THROWS_WITH(parse_manifest(text), Catch::Matchers::ContainsSubstring("line 3") &&
                                              Catch::Matchers::ContainsSubstring("validation"));
}

TEST_CASE("non-integer subject is rejected with its line number", "[manifest]") {
  const std::string text =
      "path,subject,split\n"
      "a/0.pgm,zero,train\n";
  CHECK_THROWS_WITH(parse_manifest(text), Catch::Matchers::ContainsSubstring("line 2"));
}

TEST_CASE("subject present only outside train violates the manifest contract",
          "[manifest]") {
  const std::string text =
      "path,subject,split\n"
      "a/0.pgm,0,train\n"
      "b/0.pgm,1,test\n";
  CHECK_THROWS_WITH(parse_manifest(text),
                    Catch::Matchers::ContainsSubstring("subject 1") &&
                        Catch::Matchers::ContainsSubstring("not in train"));
}

TEST_CASE("a path may appear in only one split", "[manifest][prop]") {
  const std::string text =
      "path,subject,split\n"
      "a/0.pgm,0,train\n"
      "a/0.pgm,0,test\n";
  CHECK_THROWS_WITH(parse_manifest(text),
                    Catch::Matchers::ContainsSubstring("more than one row"));

  // and a valid manifest partitions its paths
  const DatasetManifest m = parse_manifest(kGood);
  std::set<std::string> seen;
  for (const auto& e : m.entries) CHECK(seen.insert(e.path).second);
}

TEST_CASE("relative paths resolve against the manifest directory", "[manifest]") {
  const DatasetManifest m = parse_manifest(
      "path,subject,split\n"
      "a/0.pgm,0,train\n"
      "/abs/1.pgm,0,train\n",
      "/data/set");
  CHECK(m.entries[0].path == "/data/set/a/0.pgm");
  CHECK(m.entries[1].path == "/abs/1.pgm");
}

TEST_CASE("missing header and bad field counts are rejected", "[manifest]") {
  CHECK_THROWS_WITH(parse_manifest("a,0,train\n"),
                    Catch::Matchers::ContainsSubstring("header"));
  CHECK_THROWS_AS(parse_manifest(""), input_error);
  CHECK_THROWS_WITH(parse_manifest("path,subject,split\na,0\n"),
                    Catch::Matchers::ContainsSubstring("3 fields"));
}

TEST_CASE("manifest encode and parse round trip", "[manifest]") {
  const DatasetManifest m = parse_manifest(kGood);
  const DatasetManifest again = parse_manifest(encode_manifest(m));
  REQUIRE(again.entries.size() == m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    CHECK(again.entries[i].path == m.entries[i].path);
    CHECK(again.entries[i].subject == m.entries[i].subject);
    CHECK(again.entries[i].split == m.entries[i].split);
  }
}
