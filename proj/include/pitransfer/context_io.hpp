#pragma once

#include <filesystem>
#include <json.hpp>

#include "pitransfer/dimension.hpp"

namespace pitransfer {

/// Context files are JSON documents, one context per file:
///
///   {
///     "schema": 1,
///     "name": "pendulum_original",
///     "basis": ["m", "l", "g"],
///     "quantities": {
///       "m": {"value": 1.0, "dim": [1, 0, 0]},
///       ...
///     }
///   }
///
/// Quantity order in the file defines the coordinate order of the
/// dimensionless context vector.
inline constexpr int kContextSchemaVersion = 1;

nlohmann::ordered_json context_to_json(const Context& ctx);
Context context_from_json(const nlohmann::ordered_json& doc);

Context load_context(const std::filesystem::path& path);
void save_context(const Context& ctx, const std::filesystem::path& path);

}  // namespace pitransfer
