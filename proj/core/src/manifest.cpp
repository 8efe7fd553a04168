#include "pourlab/manifest.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "pourlab/error.hpp"

namespace pourlab::harness {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) out << std::setw(2) << static_cast<int>(digest[i]);
  return out.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunRecord* RunManifest::find(int config_index, std::uint64_t seed) {
  for (RunRecord& r : runs) {
    if (r.config_index == config_index && r.seed == seed) return &r;
  }
  return nullptr;
}

RunRecord& RunManifest::find_or_add(int config_index, std::uint64_t seed) {
  if (RunRecord* r = find(config_index, seed)) return *r;
  RunRecord fresh;
  fresh.config_index = config_index;
  fresh.seed = seed;
  const auto pos = std::lower_bound(runs.begin(), runs.end(), fresh, [](const auto& a, const auto& b) {
    return std::pair(a.config_index, a.seed) < std::pair(b.config_index, b.seed);
  });
  return *runs.insert(pos, fresh);
}

std::string run_stem(int config_index, std::uint64_t seed) {
  std::ostringstream out;
  out << 'c' << std::setw(2) << std::setfill('0') << config_index << "_s" << seed;
  return out.str();
}

std::string config_identity(const SweepConfig& config) {
  // Seed, worker count and output location do not change what a run computes
  // for a given (cell, seed) pair, so they are left out of the identity.
  SweepConfig copy = config;
  const SweepConfig defaults;
  copy.seed = defaults.seed;
  copy.seeds_per_config = defaults.seeds_per_config;
  copy.workers = defaults.workers;
  copy.output_dir = defaults.output_dir;
  copy.write_trajectories = defaults.write_trajectories;
  return sha256_hex(write_config(copy));
}

RunManifest make_manifest(const SweepConfig& config, std::string config_file_sha256) {
  RunManifest m;
  m.config_sha256 = config_identity(config);
  m.config_file_sha256 = std::move(config_file_sha256);
  m.baseline = config.baseline;
  m.mutation = config.mutation;
  m.grid = reward::build_weight_grid(config.baseline, config.mutation);
  m.seeds = config.seeds();
  m.created_at = utc_timestamp();
  m.updated_at = m.created_at;
  for (int i = 0; i < static_cast<int>(m.grid.size()); ++i) {
    for (std::uint64_t s : m.seeds) m.find_or_add(i, s);
  }
  return m;
}

namespace {

ordered_json weights_json(const reward::RewardWeights& w) {
  ordered_json j;
  j["w_a"] = w.w_a;
  j["w_t"] = w.w_t;
  j["w_e"] = w.w_e;
  return j;
}

template <typename T>
T get_field(const ordered_json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(where + key, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(where + key, "wrong type");
  }
}

reward::RewardWeights parse_weights(const ordered_json& j, const std::string& where) {
  return {get_field<double>(j, "w_a", where), get_field<double>(j, "w_t", where),
          get_field<double>(j, "w_e", where)};
}

}  // namespace

std::string to_json(const RunManifest& m) {
  ordered_json j;
  j["tool"] = "pourlab";
  j["tool_version"] = m.tool_version;
  j["config_sha256"] = m.config_sha256;
  j["config_file_sha256"] = m.config_file_sha256;
  j["baseline"] = weights_json(m.baseline);
  j["mutation"] = {{"sigma_t", m.mutation.sigma_t},
                   {"sigma_e", m.mutation.sigma_e},
                   {"grid_offsets", m.mutation.grid_offsets}};
  j["grid"] = ordered_json::array();
  for (std::size_t i = 0; i < m.grid.size(); ++i) {
    ordered_json cell = weights_json(m.grid[i]);
    cell["index"] = i;
    j["grid"].push_back(cell);
  }
  j["seeds"] = m.seeds;
  j["created_at"] = m.created_at;
  j["updated_at"] = m.updated_at;
  j["runs"] = ordered_json::array();
  for (const RunRecord& r : m.runs) {
    j["runs"].push_back({{"config_index", r.config_index},
                         {"seed", r.seed},
                         {"status", r.done ? "done" : "pending"},
                         {"policy", r.policy_path},
                         {"policy_sha256", r.policy_sha256},
                         {"curve", r.curve_path},
                         {"curve_sha256", r.curve_sha256},
                         {"completed_at", r.completed_at}});
  }
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("manifest", e.what());
  }
  const std::string top = "manifest.";
  RunManifest m;
  m.tool_version = get_field<std::string>(j, "tool_version", top);
  m.config_sha256 = get_field<std::string>(j, "config_sha256", top);
  m.config_file_sha256 = get_field<std::string>(j, "config_file_sha256", top);
  m.baseline = parse_weights(j.value("baseline", ordered_json{}), top + "baseline.");
  const ordered_json mutation = j.value("mutation", ordered_json{});
  m.mutation.sigma_t = get_field<double>(mutation, "sigma_t", top + "mutation.");
  m.mutation.sigma_e = get_field<double>(mutation, "sigma_e", top + "mutation.");
  m.mutation.grid_offsets =
      get_field<std::vector<double>>(mutation, "grid_offsets", top + "mutation.");
  const auto grid = get_field<ordered_json>(j, "grid", top);
  for (const auto& cell : grid) m.grid.push_back(parse_weights(cell, top + "grid."));
  m.seeds = get_field<std::vector<std::uint64_t>>(j, "seeds", top);
  m.created_at = get_field<std::string>(j, "created_at", top);
  m.updated_at = get_field<std::string>(j, "updated_at", top);
  const auto runs = get_field<ordered_json>(j, "runs", top);
  for (const auto& r : runs) {
    const std::string where = top + "runs.";
    RunRecord rec;
    rec.config_index = get_field<int>(r, "config_index", where);
    rec.seed = get_field<std::uint64_t>(r, "seed", where);
    const auto status = get_field<std::string>(r, "status", where);
    if (status != "done" && status != "pending") throw FormatError(where + "status", "unknown value");
    rec.done = status == "done";
    rec.policy_path = get_field<std::string>(r, "policy", where);
    rec.policy_sha256 = get_field<std::string>(r, "policy_sha256", where);
    rec.curve_path = get_field<std::string>(r, "curve", where);
    rec.curve_sha256 = get_field<std::string>(r, "curve_sha256", where);
    rec.completed_at = get_field<std::string>(r, "completed_at", where);
    m.runs.push_back(std::move(rec));
  }
  return m;
}

bool run_intact(const RunRecord& run, const fs::path& out_dir) {
  if (!run.done) return false;
  const fs::path policy = out_dir / run.policy_path;
  const fs::path curve = out_dir / run.curve_path;
  std::error_code ec;
  if (!fs::is_regular_file(policy, ec) || !fs::is_regular_file(curve, ec)) return false;
  return sha256_file(policy) == run.policy_sha256 && sha256_file(curve) == run.curve_sha256;
}

ManifestStore::ManifestStore(fs::path path, RunManifest manifest)
    : path_(std::move(path)), manifest_(std::move(manifest)) {}

void ManifestStore::save() {
  std::lock_guard lock(mutex_);
  save_locked();
}

void ManifestStore::mark_done(const RunRecord& run) {
  std::lock_guard lock(mutex_);
  manifest_.find_or_add(run.config_index, run.seed) = run;
  save_locked();
}

RunManifest ManifestStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return manifest_;
}

void ManifestStore::save_locked() {
  manifest_.updated_at = utc_timestamp();
  write_file_atomic(path_, to_json(manifest_));
}

}  // namespace pourlab::harness
