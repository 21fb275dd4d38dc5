#include "cgl/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cgl/errors.hpp"

namespace cgl {

std::uint64_t fnv1a(const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_string(const std::string& s) { return fnv1a(s.data(), s.size()); }

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Err::IoError, "cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const auto n = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Err::IoError, "cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      raise(Err::ParseError,
            path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      raise(Err::ParseError, path + ":" + std::to_string(line_no) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

std::uint64_t config_hash(const std::map<std::string, std::string>& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0x1f;  // separator
    h *= 0x100000001b3ULL;
  };
  for (const auto& [k, v] : config) {
    mix(k);
    mix(v);
  }
  return h;
}

std::string manifest_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["version"] = kToolVersion;
  j["subcommand"] = m.subcommand;
  j["config_hash"] = hex64(config_hash(m.config));
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;  // std::map is already sorted
  j["config"] = std::move(cfg);
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.inputs) inputs[k] = v;
  j["inputs"] = std::move(inputs);
  return j.dump(2) + "\n";
}

void write_manifest(const std::string& path, const Manifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Err::IoError, "cannot write manifest to " + path);
  out << manifest_json(m);
  if (!out) raise(Err::IoError, "failed writing manifest to " + path);
}

}  // namespace cgl
