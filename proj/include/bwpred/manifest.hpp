#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bwpred/csv.hpp"
#include "bwpred/features.hpp"

namespace bwpred {

inline constexpr const char* kToolVersion = "1.0.0";

/// One manifest per output directory; holds everything needed to reproduce
/// the run byte for byte (wall time excepted).
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::int64_t wall_ms = 0;
};

inline void write_manifest(const std::string& out_dir, const RunManifest& m) {
  nlohmann::json j{{"tool", "bwpred"},
                   {"version", kToolVersion},
                   {"command", m.command},
                   {"argv", m.argv},
                   {"config", m.config},
                   {"seed", m.seed},
                   {"schema_hash", dataset_schema_hash()},
                   {"outputs", m.outputs},
                   {"wall_ms", m.wall_ms}};
  std::filesystem::create_directories(out_dir);
  write_file((std::filesystem::path(out_dir) / "manifest.json").string(), j.dump(2) + "\n");
}

}  // namespace bwpred
