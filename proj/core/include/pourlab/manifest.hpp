#ifndef POURLAB_MANIFEST_HPP_
#define POURLAB_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "pourlab/config.hpp"
#include "pourlab/reward.hpp"

namespace pourlab::harness {

inline constexpr std::string_view kToolVersion = "0.1.0";

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string utc_timestamp();

struct RunRecord {
  int config_index = 0;
  std::uint64_t seed = 0;
  bool done = false;
  std::string policy_path;  // relative to the output directory
  std::string policy_sha256;
  std::string curve_path;
  std::string curve_sha256;
  std::string completed_at;
};

struct RunManifest {
  std::string tool_version{kToolVersion};
  std::string config_sha256;       // config_identity of the effective config
  std::string config_file_sha256;  // of the file given on the command line, if any
  reward::RewardWeights baseline;
  reward::MutationSpec mutation;
  std::vector<reward::RewardWeights> grid;
  std::vector<std::uint64_t> seeds;
  std::string created_at;
  std::string updated_at;
  std::vector<RunRecord> runs;  // sorted by (config_index, seed)

  RunRecord* find(int config_index, std::uint64_t seed);
  RunRecord& find_or_add(int config_index, std::uint64_t seed);
};

// Hash of the canonical config with run-scoped fields (seed, workers,
// output directory) reset, so runs with different seeds can share a directory.
std::string config_identity(const SweepConfig& config);

// Fresh manifest with one pending run per (grid cell, seed).
RunManifest make_manifest(const SweepConfig& config, std::string config_file_sha256 = {});

std::string to_json(const RunManifest& manifest);
// Throws FormatError naming the offending field.
RunManifest parse_manifest(std::string_view text);

// True when the run is marked done and both artifacts hash to the recorded values.
bool run_intact(const RunRecord& run, const std::filesystem::path& out_dir);

std::string run_stem(int config_index, std::uint64_t seed);

// Serializes manifest updates from concurrent workers; every change is
// persisted atomically before the call returns.
class ManifestStore {
 public:
  ManifestStore(std::filesystem::path path, RunManifest manifest);
  void save();
  void mark_done(const RunRecord& run);
  RunManifest snapshot() const;

 private:
  void save_locked();
  std::filesystem::path path_;
  RunManifest manifest_;
  mutable std::mutex mutex_;
};

}  // namespace pourlab::harness

#endif  // POURLAB_MANIFEST_HPP_
