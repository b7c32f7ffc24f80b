#include "exitrank/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "exitrank/errors.hpp"
#include "exitrank/text.hpp"

namespace exitrank {

namespace {

[[noreturn]] void parse_fail(std::string_view what, std::string_view line) {
  std::string msg(what);
  msg += " in line: \"";
  msg += line;
  msg += "\"";
  throw ParseError(msg);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

}  // namespace

std::size_t Dataset::num_documents() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.documents.size();
  return n;
}

ParsedLine parse_letor_line(std::string_view line) {
  std::string_view body = line;
  if (auto hash = body.find('#'); hash != std::string_view::npos) {
    body = body.substr(0, hash);
  }
  body = strip(body);
  if (body.empty()) parse_fail("empty line", line);

  auto tokens = split_ws(body);
  ParsedLine parsed;

  long long label = 0;
  if (!parse_int(tokens[0], label)) parse_fail("non-integer label", line);
  parsed.relevance = static_cast<int>(label);

  if (tokens.size() < 2 || !tokens[1].starts_with("qid:")) {
    parse_fail("missing qid", line);
  }
  long long qid = 0;
  if (!parse_int(tokens[1].substr(4), qid)) parse_fail("malformed qid", line);
  parsed.query_id = qid;

  std::unordered_set<int> seen;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    auto tok = tokens[i];
    auto colon = tok.find(':');
    if (colon == std::string_view::npos || colon == 0 ||
        colon + 1 == tok.size()) {
      parse_fail("malformed feature token '" + std::string(tok) + "'", line);
    }
    long long idx = 0;
    double value = 0.0;
    if (!parse_int(tok.substr(0, colon), idx) || idx < 1) {
      parse_fail("malformed feature index '" + std::string(tok) + "'", line);
    }
    if (!parse_double(tok.substr(colon + 1), value)) {
      parse_fail("malformed feature value '" + std::string(tok) + "'", line);
    }
    int zero_based = static_cast<int>(idx - 1);
    if (!seen.insert(zero_based).second) {
      parse_fail("duplicate feature index " + std::to_string(idx), line);
    }
    parsed.features.emplace_back(zero_based, value);
  }
  return parsed;
}

Dataset load_dataset(std::istream& in, std::optional<int> num_features) {
  Dataset ds;
  std::unordered_map<std::int64_t, std::size_t> group_of;
  std::vector<std::vector<ParsedLine>> pending;  // sparse docs per group
  int max_index = -1;
  std::size_t line_no = 0;
  std::string raw;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view body = raw;
    if (auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    if (strip(body).empty()) continue;

    ParsedLine parsed;
    try {
      parsed = parse_letor_line(raw);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (parsed.relevance < 0 || parsed.relevance > 4) {
      throw DataError("line " + std::to_string(line_no) + ": relevance grade " +
                      std::to_string(parsed.relevance) +
                      " outside [0, 4] in line: \"" + raw + "\"");
    }
    for (const auto& [idx, _] : parsed.features) {
      if (idx > max_index) max_index = idx;
    }

    auto [it, inserted] = group_of.try_emplace(parsed.query_id, pending.size());
    if (inserted) pending.emplace_back();
    pending[it->second].push_back(std::move(parsed));
  }

  if (pending.empty()) throw DataError("empty dataset: no documents parsed");

  int needed = max_index + 1;
  int feature_count = num_features.value_or(needed);
  if (feature_count < needed) {
    throw DataError("num_features " + std::to_string(feature_count) +
                    " smaller than max observed feature index + 1 (" +
                    std::to_string(needed) + ")");
  }

  ds.num_features = feature_count;
  ds.groups.reserve(pending.size());
  for (auto& lines : pending) {
    QueryGroup group;
    group.query_id = lines.front().query_id;
    group.documents.reserve(lines.size());
    for (auto& parsed : lines) {
      Document doc;
      doc.doc_index = static_cast<int>(group.documents.size());
      doc.relevance = parsed.relevance;
      doc.features.assign(static_cast<std::size_t>(feature_count), 0.0);
      for (const auto& [idx, value] : parsed.features) {
        doc.features[static_cast<std::size_t>(idx)] = value;
      }
      group.documents.push_back(std::move(doc));
    }
    ds.groups.push_back(std::move(group));
  }
  return ds;
}

Dataset load_dataset_file(const std::string& path,
                          std::optional<int> num_features) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  return load_dataset(in, num_features);
}

void write_letor(const Dataset& ds, std::ostream& out) {
  for (const auto& group : ds.groups) {
    for (const auto& doc : group.documents) {
      out << doc.relevance << " qid:" << group.query_id;
      for (std::size_t i = 0; i < doc.features.size(); ++i) {
        out << ' ' << (i + 1) << ':' << fmt_double(doc.features[i]);
      }
      out << '\n';
    }
  }
}

void write_letor_file(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path);
  write_letor(ds, out);
}

DatasetStats dataset_stats(const Dataset& ds) {
  DatasetStats stats;
  stats.num_queries = ds.num_queries();
  stats.num_documents = ds.num_documents();
  stats.mean_docs_per_query =
      stats.num_queries == 0
          ? 0.0
          : static_cast<double>(stats.num_documents) /
                static_cast<double>(stats.num_queries);
  for (const QueryGroup& g : ds.groups) {
    int n = g.size();
    if (stats.min_docs_per_query == 0 || n < stats.min_docs_per_query) {
      stats.min_docs_per_query = n;
    }
    stats.max_docs_per_query = std::max(stats.max_docs_per_query, n);
    for (const Document& d : g.documents) {
      std::size_t grade = static_cast<std::size_t>(d.relevance);
      if (grade >= stats.relevance_histogram.size()) {
        stats.relevance_histogram.resize(grade + 1, 0);
      }
      ++stats.relevance_histogram[grade];
    }
  }
  return stats;
}

}  // namespace exitrank
