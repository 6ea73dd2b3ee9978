#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dcs::cli {

std::string sha256_file(const std::filesystem::path& path);

/// Written as `manifest.<command>.json` next to a command's outputs.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  std::string timestamp;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  nlohmann::ordered_json to_json() const;
  std::filesystem::path write(const std::filesystem::path& dir) const;
};

std::string utc_timestamp();

}  // namespace dcs::cli
