#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace cgl {

inline constexpr const char* kToolVersion = "0.1.0";

// 64-bit FNV-1a.
std::uint64_t fnv1a(const void* data, std::size_t len);
std::uint64_t fnv1a_string(const std::string& s);
std::uint64_t fnv1a_file(const std::string& path);  // IoError when unreadable

std::string hex64(std::uint64_t v);

// Flat key=value file; '#' starts a comment, blank lines skipped, whitespace
// around keys and values trimmed. Section membership is spelled in the key
// itself (aug.k=2).
std::map<std::string, std::string> load_config_file(const std::string& path);

struct Manifest {
  std::string subcommand;
  std::map<std::string, std::string> config;  // fully resolved, post-override
  std::map<std::string, std::string> inputs;  // path -> content digest
};

// Hash over the sorted config entries; identifies a run setup.
std::uint64_t config_hash(const std::map<std::string, std::string>& config);

// Deterministic JSON (sorted keys, no timestamps); reruns of an identical
// setup produce byte-identical files.
std::string manifest_json(const Manifest& m);
void write_manifest(const std::string& path, const Manifest& m);

}  // namespace cgl
