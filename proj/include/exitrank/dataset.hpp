#ifndef EXITRANK_DATASET_HPP
#define EXITRANK_DATASET_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace exitrank {

/// One judged query-document pair. Feature vectors are dense; sparse input
/// positions that were absent in the file hold 0.0.
struct Document {
  int doc_index = 0;  // position within the query group, 0-based
  int relevance = 0;  // graded judgment, 0 (irrelevant) .. 4 (perfect)
  std::vector<double> features;
};

struct QueryGroup {
  std::int64_t query_id = 0;
  std::vector<Document> documents;  // doc_index 0..n-1 in file order

  int size() const { return static_cast<int>(documents.size()); }
};

/// Immutable after load; safe to share across threads read-only.
struct Dataset {
  std::vector<QueryGroup> groups;  // first-appearance order of query ids
  int num_features = 0;

  std::size_t num_queries() const { return groups.size(); }
  std::size_t num_documents() const;
};

/// Result of parsing one LETOR/SVMLight line. Feature indices are converted
/// from the file's 1-based convention to 0-based.
struct ParsedLine {
  int relevance = 0;
  std::int64_t query_id = 0;
  std::vector<std::pair<int, double>> features;  // (index, value), file order
};

/// `<label> qid:<int> <fid>:<float> ... [# comment]`
/// Throws ParseError (naming the line) on malformed tokens, missing qid,
/// a non-integer label, or a duplicate feature index.
ParsedLine parse_letor_line(std::string_view line);

/// Groups lines by query id (merging non-contiguous repeats in
/// first-appearance order) and densifies feature vectors. The feature count
/// is max observed index + 1 unless overridden. Blank lines are skipped.
/// Throws DataError on empty input, an override smaller than an observed
/// index, or a relevance grade outside [0, 4].
Dataset load_dataset(std::istream& in, std::optional<int> num_features = {});
Dataset load_dataset_file(const std::string& path,
                          std::optional<int> num_features = {});

/// Writes every document as a dense LETOR line (all features, 1-based ids).
/// Reparsing the output reproduces the dataset exactly.
void write_letor(const Dataset& ds, std::ostream& out);
void write_letor_file(const Dataset& ds, const std::string& path);

struct DatasetStats {
  std::size_t num_queries = 0;
  std::size_t num_documents = 0;
  double mean_docs_per_query = 0.0;
  int min_docs_per_query = 0;
  int max_docs_per_query = 0;
  std::vector<std::size_t> relevance_histogram;  // index = grade
};

DatasetStats dataset_stats(const Dataset& ds);

}  // namespace exitrank

#endif  // EXITRANK_DATASET_HPP
