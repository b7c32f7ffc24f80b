#ifndef EXITRANK_ERRORS_HPP
#define EXITRANK_ERRORS_HPP

#include <stdexcept>

namespace exitrank {

/// Malformed input text: LETOR lines, model dumps, schema violations.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structurally valid input that violates a domain invariant
/// (relevance grade out of range, empty model, NaN feature value, ...).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace exitrank

#endif  // EXITRANK_ERRORS_HPP
