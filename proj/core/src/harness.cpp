#include "pourlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "pourlab/csv.hpp"
#include "pourlab/environment.hpp"
#include "pourlab/error.hpp"
#include "pourlab/manifest.hpp"
#include "pourlab/report.hpp"
#include "pourlab/train.hpp"

namespace pourlab::harness {

namespace fs = std::filesystem;
using behavior::BehaviorLabel;

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::clamp(workers, 1, n);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
        failed.store(true);
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

behavior::TrajectoryLog rollout_log(const rl::PolicyParams& params, const sim::EnvConfig& env,
                                    std::uint64_t episode_seed) {
  rl::PourEnvironment environment(env, params.trained_weights);
  behavior::EnvTrace trace;
  trace.dt = env.dt;
  trace.horizon = env.horizon;
  trace.total_mass = env.total_mass();
  trace.target_mass = env.target_fill_fraction * env.total_mass();
  trace.samples.reserve(static_cast<std::size_t>(env.horizon));
  std::vector<double> obs = environment.reset(episode_seed);
  for (;;) {
    const std::vector<double> action = rl::policy_mean(params, params.obs_norm.normalize(obs));
    rl::Transition tr = environment.step(action);
    trace.samples.push_back(
        behavior::capture(environment.state(), environment.last_info(), environment.config()));
    if (tr.done) break;
    obs = std::move(tr.observation);
  }
  return behavior::record(trace);
}

std::vector<behavior::TrajectoryLog> evaluate_policy(const rl::PolicyParams& params,
                                                     const sim::EnvConfig& env, int episodes,
                                                     std::uint64_t seed_base) {
  if (episodes < 1) throw UsageError("episode count must be >= 1");
  std::vector<behavior::TrajectoryLog> logs;
  logs.reserve(static_cast<std::size_t>(episodes));
  for (int k = 0; k < episodes; ++k) {
    logs.push_back(rollout_log(
        params, env, rl::derive_seed(seed_base, rl::kEvalEpisodeStream, static_cast<std::uint64_t>(k))));
  }
  return logs;
}

// ---------------------------------------------------------------------------
// CSV tables

namespace {

using csv::format_double;

std::vector<std::vector<std::string>> read_table(const fs::path& path,
                                                 const std::vector<std::string>& header) {
  if (!fs::is_regular_file(path)) throw std::runtime_error("missing file '" + path.string() + "'");
  auto rows = csv::parse(read_file(path));
  if (rows.empty() || rows.front() != header) {
    throw FormatError(path.filename().string(), "unexpected header");
  }
  rows.erase(rows.begin());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != header.size()) {
      throw FormatError(path.filename().string() + " row " + std::to_string(i + 1),
                        "expected " + std::to_string(header.size()) + " fields");
    }
  }
  return rows;
}

template <typename T>
T field_as(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  T value{};
  if (!(in >> value) || !in.eof()) throw FormatError(name, "cannot parse '" + text + "'");
  return value;
}

double double_field(const std::string& text, const std::string& name) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw FormatError(name, "cannot parse '" + text + "'");
    return v;
  } catch (const std::logic_error&) {
    throw FormatError(name, "cannot parse '" + text + "'");
  }
}

std::string write_table(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  csv::write_row(out, header);
  for (const auto& r : rows) csv::write_row(out, r);
  return out.str();
}

const std::vector<std::string> kLabelHeader{"config_index", "w_t", "w_e", "seed", "episode", "label"};

}  // namespace

std::vector<std::string> feature_header() {
  return {"config_index",     "w_t",          "w_e",           "seed",
          "episode",          "fill_ratio",   "spill_ratio",   "rim_ratio",
          "unreleased_ratio", "time_to_target", "effort_total", "oscillation_count",
          "landing_spread",   "emission_ongoing_at_horizon"};
}

std::vector<std::string> feature_fields(const FeatureRow& r) {
  const auto& f = r.features;
  return {std::to_string(r.config_index),
          format_double(r.w_t),
          format_double(r.w_e),
          std::to_string(r.seed),
          std::to_string(r.episode),
          format_double(f.fill_ratio),
          format_double(f.spill_ratio),
          format_double(f.rim_ratio),
          format_double(f.unreleased_ratio),
          f.time_to_target ? format_double(*f.time_to_target) : std::string(),
          format_double(f.effort_total),
          std::to_string(f.oscillation_count),
          format_double(f.landing_spread),
          f.emission_ongoing_at_horizon ? "1" : "0"};
}

void write_features_csv(const fs::path& path, const std::vector<FeatureRow>& rows) {
  std::vector<std::vector<std::string>> body;
  body.reserve(rows.size());
  for (const auto& r : rows) body.push_back(feature_fields(r));
  write_file_atomic(path, write_table(feature_header(), body));
}

std::vector<FeatureRow> read_features_csv(const fs::path& path) {
  const auto header = feature_header();
  std::vector<FeatureRow> out;
  for (const auto& f : read_table(path, header)) {
    FeatureRow r;
    r.config_index = field_as<int>(f[0], header[0]);
    r.w_t = double_field(f[1], header[1]);
    r.w_e = double_field(f[2], header[2]);
    r.seed = field_as<std::uint64_t>(f[3], header[3]);
    r.episode = field_as<int>(f[4], header[4]);
    r.features.fill_ratio = double_field(f[5], header[5]);
    r.features.spill_ratio = double_field(f[6], header[6]);
    r.features.rim_ratio = double_field(f[7], header[7]);
    r.features.unreleased_ratio = double_field(f[8], header[8]);
    if (!f[9].empty()) r.features.time_to_target = double_field(f[9], header[9]);
    r.features.effort_total = double_field(f[10], header[10]);
    r.features.oscillation_count = field_as<int>(f[11], header[11]);
    r.features.landing_spread = double_field(f[12], header[12]);
    if (f[13] != "0" && f[13] != "1") throw FormatError(header[13], "expected 0 or 1");
    r.features.emission_ongoing_at_horizon = f[13] == "1";
    out.push_back(r);
  }
  return out;
}

void write_labels_csv(const fs::path& path, const std::vector<LabelRow>& rows) {
  std::vector<std::vector<std::string>> body;
  body.reserve(rows.size());
  for (const auto& r : rows) {
    body.push_back({std::to_string(r.config_index), format_double(r.w_t), format_double(r.w_e),
                    std::to_string(r.seed), std::to_string(r.episode),
                    std::string(behavior::to_string(r.label))});
  }
  write_file_atomic(path, write_table(kLabelHeader, body));
}

std::vector<LabelRow> read_labels_csv(const fs::path& path) {
  std::vector<LabelRow> out;
  for (const auto& f : read_table(path, kLabelHeader)) {
    LabelRow r;
    r.config_index = field_as<int>(f[0], kLabelHeader[0]);
    r.w_t = double_field(f[1], kLabelHeader[1]);
    r.w_e = double_field(f[2], kLabelHeader[2]);
    r.seed = field_as<std::uint64_t>(f[3], kLabelHeader[3]);
    r.episode = field_as<int>(f[4], kLabelHeader[4]);
    const auto label = behavior::parse_label(f[5]);
    if (!label) throw FormatError(kLabelHeader[5], "unknown label '" + f[5] + "'");
    r.label = *label;
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification

double baseline_time_median(const std::vector<FeatureRow>& rows, int baseline_index,
                            const behavior::ClassifierThresholds& t, double episode_duration) {
  auto successful = [&](const FeatureRow& r) {
    const auto& f = r.features;
    return !f.emission_ongoing_at_horizon && f.time_to_target && f.fill_ratio >= t.fill_success &&
           f.spill_ratio <= t.spill_max;
  };
  std::vector<double> baseline, any;
  for (const auto& r : rows) {
    if (!successful(r)) continue;
    any.push_back(*r.features.time_to_target);
    if (r.config_index == baseline_index) baseline.push_back(*r.features.time_to_target);
  }
  if (!baseline.empty()) return behavior::median(baseline);
  if (!any.empty()) return behavior::median(any);
  return episode_duration;
}

std::vector<LabelRow> classify_rows(const std::vector<FeatureRow>& rows,
                                    const behavior::ClassifierThresholds& thresholds,
                                    double baseline_median,
                                    const behavior::LabelOverrides& overrides) {
  std::vector<LabelRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    LabelRow l{r.config_index, r.w_t, r.w_e, r.seed, r.episode,
               behavior::classify(r.features, thresholds, baseline_median)};
    if (const auto it = overrides.find({r.config_index, r.seed, r.episode}); it != overrides.end()) {
      l.label = it->second;
    }
    out.push_back(l);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

RunManifest open_manifest(const SweepConfig& config, const fs::path& out,
                          const std::string& config_file_sha256) {
  const fs::path path = out / "manifest.json";
  RunManifest fresh = make_manifest(config, config_file_sha256);
  if (!fs::exists(path)) return fresh;
  RunManifest existing = parse_manifest(read_file(path));
  if (existing.config_sha256 != fresh.config_sha256) {
    throw ConfigError("config", "output directory '" + out.string() +
                                    "' holds results for a different configuration");
  }
  existing.config_file_sha256 = config_file_sha256;
  // Seeds beyond the recorded list may have been added by `train`; keep them.
  for (const auto& r : fresh.runs) existing.find_or_add(r.config_index, r.seed);
  return existing;
}

RunRecord train_one(const SweepConfig& config, const std::vector<reward::RewardWeights>& grid,
                    int index, std::uint64_t seed, const fs::path& out) {
  const rl::TrainResult result =
      rl::train(rl::pour_env_factory(config.env), grid[static_cast<std::size_t>(index)],
                config.ppo, seed);
  const std::string stem = run_stem(index, seed);
  RunRecord rec;
  rec.config_index = index;
  rec.seed = seed;
  rec.policy_path = "policies/" + stem + ".policy";
  rec.curve_path = "curves/" + stem + ".csv";

  std::ostringstream policy_text;
  rl::write_policy(policy_text, result.params);
  std::ostringstream curve_text;
  rl::write_curve_csv(curve_text, result.curve);
  write_file_atomic(out / rec.policy_path, policy_text.str());
  write_file_atomic(out / rec.curve_path, curve_text.str());
  rec.policy_sha256 = sha256_hex(policy_text.str());
  rec.curve_sha256 = sha256_hex(curve_text.str());
  rec.done = true;
  rec.completed_at = utc_timestamp();
  return rec;
}

std::vector<FeatureRow> evaluate_rows(const SweepConfig& config, const rl::PolicyParams& params,
                                      int config_index, std::uint64_t seed, int episodes,
                                      const fs::path& out, const std::string& stem,
                                      bool write_trajectories) {
  const auto logs = evaluate_policy(params, config.env, episodes, seed);
  std::vector<FeatureRow> rows;
  for (int k = 0; k < episodes; ++k) {
    const auto& log = logs[static_cast<std::size_t>(k)];
    FeatureRow r;
    r.config_index = config_index;
    r.w_t = params.trained_weights.w_t;
    r.w_e = params.trained_weights.w_e;
    r.seed = seed;
    r.episode = k;
    r.features = behavior::extract_features(log, config.features);
    rows.push_back(r);
    if (write_trajectories) {
      std::ostringstream text;
      behavior::write_jsonl(text, log);
      write_file_atomic(out / "trajectories" / (stem + "_e" + std::to_string(k) + ".jsonl"),
                        text.str());
    }
  }
  return rows;
}

}  // namespace

TrainOutput cmd_train(const SweepConfig& config, int index, std::uint64_t seed, const fs::path& out,
                      const std::string& config_file_sha256) {
  validate(config);
  const auto grid = reward::build_weight_grid(config.baseline, config.mutation);
  if (index < 0 || index >= static_cast<int>(grid.size())) {
    throw UsageError("grid index " + std::to_string(index) + " outside [0, " +
                     std::to_string(grid.size() - 1) + "]");
  }
  fs::create_directories(out);
  ManifestStore store(out / "manifest.json", open_manifest(config, out, config_file_sha256));
  store.save();
  const RunRecord rec = train_one(config, grid, index, seed, out);
  store.mark_done(rec);
  return {out / rec.policy_path, out / rec.curve_path};
}

SweepResult cmd_sweep(const SweepConfig& config, const fs::path& out, const SweepOptions& options) {
  validate(config);
  fs::create_directories(out);
  ManifestStore store(out / "manifest.json",
                      open_manifest(config, out, options.config_file_sha256));
  store.save();
  write_file_atomic(out / "config.ini", write_config(config));

  RunManifest manifest = store.snapshot();
  std::vector<RunRecord> wanted;
  for (int i = 0; i < static_cast<int>(manifest.grid.size()); ++i) {
    for (std::uint64_t s : config.seeds()) {
      wanted.push_back(*manifest.find(i, s));
    }
  }

  SweepResult result;
  std::vector<std::pair<int, std::uint64_t>> jobs;
  for (const auto& r : wanted) {
    if (run_intact(r, out)) {
      ++result.skipped;
    } else {
      jobs.emplace_back(r.config_index, r.seed);
    }
  }
  const bool truncated =
      options.max_new_runs >= 0 && static_cast<int>(jobs.size()) > options.max_new_runs;
  if (truncated) jobs.resize(static_cast<std::size_t>(options.max_new_runs));

  parallel_for(static_cast<int>(jobs.size()), config.workers, [&](int j) {
    const auto [index, seed] = jobs[static_cast<std::size_t>(j)];
    store.mark_done(train_one(config, manifest.grid, index, seed, out));
  });
  result.trained = static_cast<int>(jobs.size());
  if (truncated) return result;

  const int episodes = config.evals_per_policy;
  std::vector<FeatureRow> rows(wanted.size() * static_cast<std::size_t>(episodes));
  parallel_for(static_cast<int>(wanted.size()), config.workers, [&](int j) {
    const RunRecord& r = wanted[static_cast<std::size_t>(j)];
    const rl::PolicyParams params =
        rl::load_policy((out / ("policies/" + run_stem(r.config_index, r.seed) + ".policy")).string());
    const auto run_rows = evaluate_rows(config, params, r.config_index, r.seed, episodes, out,
                                        run_stem(r.config_index, r.seed), config.write_trajectories);
    std::copy(run_rows.begin(), run_rows.end(),
              rows.begin() + static_cast<std::ptrdiff_t>(j) * episodes);
  });
  write_features_csv(out / "features.csv", rows);

  const double median =
      baseline_time_median(rows, reward::baseline_cell(config.mutation), config.thresholds,
                           config.env.horizon * config.env.dt);
  result.labels = classify_rows(rows, config.thresholds, median);
  write_labels_csv(out / "labels.csv", result.labels);
  cmd_report(out);
  result.complete = true;
  return result;
}

std::vector<FeatureRow> cmd_eval(const SweepConfig& config, const fs::path& policy, int episodes,
                                 std::uint64_t seed_base, const fs::path& out, int config_index) {
  validate(config);
  if (episodes < 1) throw UsageError("episode count must be >= 1");
  const rl::PolicyParams params = rl::load_policy(policy.string());
  fs::create_directories(out);
  const auto rows = evaluate_rows(config, params, config_index, seed_base, episodes, out,
                                  policy.stem().string(), true);
  const fs::path features = out / "features.csv";
  std::vector<FeatureRow> all;
  if (fs::exists(features)) all = read_features_csv(features);
  all.insert(all.end(), rows.begin(), rows.end());
  write_features_csv(features, all);
  return rows;
}

std::vector<LabelRow> cmd_classify(const SweepConfig& config, const fs::path& out,
                                   const std::optional<fs::path>& overrides) {
  validate(config);
  const auto rows = read_features_csv(out / "features.csv");
  behavior::LabelOverrides table;
  if (overrides) {
    std::ifstream in(*overrides);
    if (!in) throw std::runtime_error("cannot read '" + overrides->string() + "'");
    table = behavior::parse_overrides(in);
  }
  const double median =
      baseline_time_median(rows, reward::baseline_cell(config.mutation), config.thresholds,
                           config.env.horizon * config.env.dt);
  auto labels = classify_rows(rows, config.thresholds, median, table);
  write_labels_csv(out / "labels.csv", labels);
  return labels;
}

void cmd_report(const fs::path& out) {
  const auto labels = read_labels_csv(out / "labels.csv");
  if (labels.empty()) throw std::runtime_error("no labelled evaluations in '" + out.string() + "'");
  const auto cells = summarize(labels);
  const std::string svg = render_svg(cells);
  write_file_atomic(out / "summary.csv", summary_csv(cells));
  write_file_atomic(out / "grid.svg", svg);
}

}  // namespace pourlab::harness
