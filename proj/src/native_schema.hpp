#ifndef EXITRANK_SRC_NATIVE_SCHEMA_HPP
#define EXITRANK_SRC_NATIVE_SCHEMA_HPP

#include <json.hpp>

#include "exitrank/ensemble.hpp"

namespace exitrank::detail {

nlohmann::json ensemble_to_json(const Ensemble& ens);
Ensemble ensemble_from_json(const nlohmann::json& j, int max_leaves);

}  // namespace exitrank::detail

#endif  // EXITRANK_SRC_NATIVE_SCHEMA_HPP
