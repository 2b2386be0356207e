#pragma once

// Output envelope shared by every subcommand, and file hashing for it.

#include <episteme/model_io.hpp>

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace episteme::cli {

/// Unreadable input files: exit code 1 like model errors.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad flags or flag values: exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
  return hex.str();
}

struct Input {
  std::string role;  // "model", "event", ...
  std::string file;  // base name only, so reports do not depend on the cwd
  std::string sha256;
};

/// Reads a file and records it as an input.
inline std::string read_input(std::vector<Input>& inputs, std::string role, const std::string& path) {
  std::string bytes = read_file(path);
  inputs.push_back({std::move(role), std::filesystem::path(path).filename().string(), sha256_hex(bytes)});
  return bytes;
}

/// No wall-clock data unless timings are asked for, so equal inputs give
/// equal bytes.
struct RunReport {
  std::string command;
  std::vector<Input> inputs;
  std::string verdict;
  json result;
  std::optional<json> timings;

  json to_json() const {
    json in = json::object();
    for (const auto& i : inputs) in[i.role] = {{"file", i.file}, {"sha256", i.sha256}};
    json j{{"command", command}, {"inputs", std::move(in)}, {"verdict", verdict}, {"result", result}};
    if (timings) j["timings"] = *timings;
    return j;
  }
  std::string dump() const { return to_json().dump(2) + "\n"; }
};

inline std::string error_json(const std::string& kind, const std::string& message) {
  return json{{"error", {{"kind", kind}, {"message", message}}}}.dump(2) + "\n";
}

}  // namespace episteme::cli
