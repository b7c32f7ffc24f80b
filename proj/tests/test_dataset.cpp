#include <doctest.h>

#include <random>
#include <sstream>

#include "exitrank/dataset.hpp"
#include "exitrank/errors.hpp"
#include "fixture_models.hpp"
#include "test_util.hpp"

using namespace exitrank;
using testsupport::contains;
using testsupport::thrown_message;

TEST_CASE("letor line with sparse features") {
  ParsedLine line = parse_letor_line("2 qid:7 1:0.5 3:1.25");
  CHECK(line.relevance == 2);
  CHECK(line.query_id == 7);
  REQUIRE(line.features.size() == 2);
  CHECK(line.features[0] == std::pair<int, double>{0, 0.5});
  CHECK(line.features[1] == std::pair<int, double>{2, 1.25});
}

TEST_CASE("letor line with only a comment after qid") {
  ParsedLine line = parse_letor_line("0 qid:1 # comment");
  CHECK(line.relevance == 0);
  CHECK(line.query_id == 1);
  CHECK(line.features.empty());
}

TEST_CASE("letor line rejects duplicate feature index") {
  std::string msg = thrown_message<ParseError>(
      [] { parse_letor_line("1 qid:3 2:0 2:1"); });
  CHECK(contains(msg, "duplicate"));
  CHECK(contains(msg, "2"));
}

TEST_CASE("letor line malformed tokens") {
  CHECK_THROWS_AS(parse_letor_line("1 qid:3 junk"), ParseError);
  CHECK_THROWS_AS(parse_letor_line("1 qid:3 0:1.0"), ParseError);
  CHECK_THROWS_AS(parse_letor_line("1 1:0.5"), ParseError);
  CHECK_THROWS_AS(parse_letor_line("1.5 qid:1 1:0.5"), ParseError);
  CHECK_THROWS_AS(parse_letor_line("qid:1 1:0.5"), ParseError);
  CHECK_THROWS_AS(parse_letor_line(""), ParseError);
  CHECK_THROWS_AS(parse_letor_line("   # only a comment"), ParseError);
  std::string msg = thrown_message<ParseError>(
      [] { parse_letor_line("1 qid:3 1:nope"); });
  CHECK(contains(msg, "1:nope"));
}

TEST_CASE("load groups lines by query id") {
  std::istringstream in(
      "1 qid:7 1:1.0\n"
      "0 qid:7 1:2.0\n"
      "2 qid:9 1:3.0\n");
  Dataset ds = load_dataset(in);
  REQUIRE(ds.groups.size() == 2);
  CHECK(ds.groups[0].query_id == 7);
  CHECK(ds.groups[0].documents.size() == 2);
  CHECK(ds.groups[1].query_id == 9);
  CHECK(ds.groups[1].documents.size() == 1);
}

TEST_CASE("feature count is the max observed 1-based index") {
  std::istringstream in("0 qid:1 2:1.0 5:2.0\n");
  Dataset ds = load_dataset(in);
  CHECK(ds.num_features == 5);
  const auto& f = ds.groups[0].documents[0].features;
  REQUIRE(f.size() == 5);
  CHECK(f[0] == 0.0);
  CHECK(f[1] == 1.0);
  CHECK(f[2] == 0.0);
  CHECK(f[3] == 0.0);
  CHECK(f[4] == 2.0);
}

TEST_CASE("non-contiguous query ids merge in first-appearance order") {
  std::istringstream in(
      "0 qid:3 1:1\n"
      "0 qid:1 1:2\n"
      "0 qid:2 1:3\n"
      "1 qid:3 1:4\n"
      "1 qid:1 1:5\n"
      "1 qid:2 1:6\n");
  Dataset ds = load_dataset(in);
  REQUIRE(ds.groups.size() == 3);
  CHECK(ds.groups[0].query_id == 3);
  CHECK(ds.groups[1].query_id == 1);
  CHECK(ds.groups[2].query_id == 2);
  for (const QueryGroup& g : ds.groups) {
    REQUIRE(g.documents.size() == 2);
    CHECK(g.documents[0].doc_index == 0);
    CHECK(g.documents[1].doc_index == 1);
  }
  CHECK(ds.groups[0].documents[1].features[0] == 4.0);
}

TEST_CASE("load failures") {
  SUBCASE("empty input") {
    std::istringstream in("\n  \n");
    CHECK_THROWS_AS(load_dataset(in), DataError);
  }
  SUBCASE("override below the observed feature index") {
    std::istringstream in("0 qid:1 4:1.0\n");
    CHECK_THROWS_AS(load_dataset(in, 3), DataError);
  }
  SUBCASE("relevance outside the graded range") {
    std::istringstream in("5 qid:1 1:1.0\n");
    CHECK_THROWS_AS(load_dataset(in), DataError);
    std::istringstream neg("-1 qid:1 1:1.0\n");
    CHECK_THROWS_AS(load_dataset(neg), DataError);
  }
  SUBCASE("parse error carries the line number") {
    std::istringstream in("0 qid:1 1:1.0\nbroken\n");
    std::string msg =
        thrown_message<ParseError>([&] { load_dataset(in); });
    CHECK(contains(msg, "line 2"));
  }
  SUBCASE("missing file names the path") {
    std::string msg = thrown_message<DataError>(
        [] { load_dataset_file("/nope/missing.letor"); });
    CHECK(contains(msg, "/nope/missing.letor"));
  }
}

TEST_CASE("override widens the feature space") {
  std::istringstream in("0 qid:1 2:1.0\n");
  Dataset ds = load_dataset(in, 6);
  CHECK(ds.num_features == 6);
  CHECK(ds.groups[0].documents[0].features.size() == 6);
}

TEST_CASE("letor round-trip reproduces the dataset") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  Dataset ds;
  ds.num_features = 4;
  for (int q = 0; q < 5; ++q) {
    QueryGroup g;
    g.query_id = 100 + q;
    int n = 1 + static_cast<int>(rng() % 6);
    for (int d = 0; d < n; ++d) {
      Document doc;
      doc.doc_index = d;
      doc.relevance = static_cast<int>(rng() % 5);
      for (int j = 0; j < 4; ++j) doc.features.push_back(val(rng));
      g.documents.push_back(std::move(doc));
    }
    ds.groups.push_back(std::move(g));
  }

  std::ostringstream out;
  write_letor(ds, out);
  std::istringstream in(out.str());
  Dataset back = load_dataset(in);

  REQUIRE(back.groups.size() == ds.groups.size());
  CHECK(back.num_features == ds.num_features);
  for (std::size_t gi = 0; gi < ds.groups.size(); ++gi) {
    CHECK(back.groups[gi].query_id == ds.groups[gi].query_id);
    REQUIRE(back.groups[gi].documents.size() ==
            ds.groups[gi].documents.size());
    for (std::size_t di = 0; di < ds.groups[gi].documents.size(); ++di) {
      const Document& a = ds.groups[gi].documents[di];
      const Document& b = back.groups[gi].documents[di];
      CHECK(a.relevance == b.relevance);
      REQUIRE(a.features.size() == b.features.size());
      for (std::size_t j = 0; j < a.features.size(); ++j) {
        CHECK(a.features[j] == b.features[j]);
      }
    }
  }
}

TEST_CASE("dataset statistics") {
  SUBCASE("two groups") {
    std::istringstream in(
        "1 qid:1 1:1\n"
        "3 qid:1 1:2\n"
        "0 qid:2 1:3\n");
    DatasetStats stats = dataset_stats(load_dataset(in));
    CHECK(stats.num_queries == 2);
    CHECK(stats.num_documents == 3);
    CHECK(stats.mean_docs_per_query == 1.5);
    CHECK(stats.min_docs_per_query == 1);
    CHECK(stats.max_docs_per_query == 2);
    REQUIRE(stats.relevance_histogram.size() == 4);
    CHECK(stats.relevance_histogram[0] == 1);
    CHECK(stats.relevance_histogram[1] == 1);
    CHECK(stats.relevance_histogram[3] == 1);
  }
  SUBCASE("single large group") {
    std::ostringstream lines;
    for (int i = 0; i < 120; ++i) lines << "0 qid:5 1:" << i << "\n";
    std::istringstream in(lines.str());
    DatasetStats stats = dataset_stats(load_dataset(in));
    CHECK(stats.num_queries == 1);
    CHECK(stats.num_documents == 120);
    CHECK(stats.mean_docs_per_query == 120.0);
  }
}

TEST_CASE("fixture dataset loads as committed") {
  Dataset ds = testsupport::three_queries();
  REQUIRE(ds.groups.size() == 3);
  CHECK(ds.num_features == 2);
  CHECK(ds.groups[0].documents.size() == 4);
  CHECK(ds.groups[1].documents.size() == 2);
  CHECK(ds.groups[2].documents.size() == 3);
  CHECK(ds.groups[0].documents[0].relevance == 3);
  CHECK(ds.groups[0].documents[0].features[1] == 2.0);
  CHECK(ds.groups[2].documents[2].features[0] == 2.5);
}
