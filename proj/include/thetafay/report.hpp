#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "thetafay/types.hpp"

namespace thetafay {

inline constexpr const char* kToolVersion = "0.3.0";

// JSON text with every floating-point number printed with 17 significant
// digits; object keys are emitted in sorted order.
std::string dump17(const nlohmann::json& j, int indent = 2);

std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t h);

nlohmann::json to_json(cplx z);
nlohmann::json to_json(const CVec& v);
nlohmann::json to_json(const CMat& m);
nlohmann::json to_json(const IVec& v);
nlohmann::json to_json(const IMat& m);
cplx cplx_from_json(const nlohmann::json& j);
CVec cvec_from_json(const nlohmann::json& j);
CMat cmat_from_json(const nlohmann::json& j);

}  // namespace thetafay
