#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace thetafay::detail {

std::string cache_path(const std::string& dir, const std::string& hash);
// Returns the stored provider state when the entry exists, its checksum is
// intact and it was written for `config`.  A damaged entry yields nullopt
// and a warning; a different config under the same hash throws.
std::optional<nlohmann::json> cache_load(const std::string& dir, const std::string& hash,
                                         const nlohmann::json& config, std::string& warning);
void cache_store(const std::string& dir, const std::string& hash, const nlohmann::json& config,
                 const nlohmann::json& state);

}  // namespace thetafay::detail
