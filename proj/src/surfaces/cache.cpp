#include "cache.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "thetafay/report.hpp"

namespace thetafay::detail {

namespace {

std::string checksum(const nlohmann::json& config, const nlohmann::json& state) {
  return hex64(fnv1a64(dump17(config, -1) + "\n" + dump17(state, -1)));
}

}  // namespace

std::string cache_path(const std::string& dir, const std::string& hash) { return dir + "/" + hash + ".json"; }

std::optional<nlohmann::json> cache_load(const std::string& dir, const std::string& hash,
                                         const nlohmann::json& config, std::string& warning) {
  const std::string path = cache_path(dir, hash);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const std::exception&) {
    warning = "cache entry " + path + " is not valid JSON, rebuilding";
    std::cerr << "warning: " << warning << "\n";
    return std::nullopt;
  }
  if (!j.is_object() || !j.contains("config") || !j.contains("state") || !j.contains("checksum") ||
      j.at("checksum") != checksum(j.at("config"), j.at("state"))) {
    warning = "cache entry " + path + " failed checksum verification, rebuilding";
    std::cerr << "warning: " << warning << "\n";
    return std::nullopt;
  }
  if (dump17(j.at("config"), -1) != dump17(config, -1))
    throw std::runtime_error("cache hash collision: " + path + " holds a different surface config");
  return j.at("state");
}

void cache_store(const std::string& dir, const std::string& hash, const nlohmann::json& config,
                 const nlohmann::json& state) {
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  j["config"] = config;
  j["state"] = state;
  j["checksum"] = checksum(config, state);
  const std::string path = cache_path(dir, hash);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write cache file " + tmp);
    out << dump17(j) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace thetafay::detail
