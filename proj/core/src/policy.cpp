#include "pourlab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pourlab/error.hpp"

namespace pourlab::rl {
namespace {

constexpr const char* kArtifactMagic = "pourlab-policy";
constexpr int kArtifactVersion = 1;

void write_list(std::ostream& out, const char* key, std::span<const double> values) {
  out << key << ' ' << values.size();
  for (double v : values) out << ' ' << v;
  out << '\n';
}

void write_sizes(std::ostream& out, const char* key, const std::vector<int>& sizes) {
  out << key << ' ' << sizes.size();
  for (int s : sizes) out << ' ' << s;
  out << '\n';
}

// Line-oriented reader: each line is "<key> <values...>".
class ArtifactReader {
 public:
  explicit ArtifactReader(std::istream& in) : in_(in) {}

  std::istringstream line(const std::string& key) {
    std::string text;
    if (!std::getline(in_, text)) throw FormatError(key, "missing");
    std::istringstream fields(text);
    std::string got;
    fields >> got;
    if (got != key) throw FormatError(key, "expected key, found '" + got + "'");
    return fields;
  }

  std::vector<double> doubles(const std::string& key) {
    auto fields = line(key);
    std::size_t n = 0;
    if (!(fields >> n)) throw FormatError(key, "missing count");
    std::vector<double> values(n);
    for (auto& v : values) {
      std::string token;
      if (!(fields >> token)) throw FormatError(key, "fewer values than declared");
      try {
        std::size_t used = 0;
        v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw FormatError(key, "unparseable value '" + token + "'");
      }
      if (!std::isfinite(v)) throw FormatError(key, "non-finite value");
    }
    std::string extra;
    if (fields >> extra) throw FormatError(key, "more values than declared");
    return values;
  }

  std::vector<int> sizes(const std::string& key) {
    auto fields = line(key);
    std::size_t n = 0;
    if (!(fields >> n) || n < 2 || n > 64) throw FormatError(key, "bad layer count");
    std::vector<int> out(n);
    for (auto& s : out) {
      if (!(fields >> s) || s < 1) throw FormatError(key, "bad layer size");
    }
    return out;
  }

 private:
  std::istream& in_;
};

}  // namespace

ObsNormalizer ObsNormalizer::identity(int size) {
  ObsNormalizer n;
  n.mean.assign(size, 0.0);
  n.var.assign(size, 1.0);
  n.count = 1e-4;
  return n;
}

void ObsNormalizer::update(std::span<const double> obs) {
  const double total = count + 1.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double delta = obs[i] - mean[i];
    mean[i] += delta / total;
    var[i] = (var[i] * count + delta * delta * count / total) / total;
  }
  count = total;
}

std::vector<double> ObsNormalizer::normalize(std::span<const double> obs) const {
  std::vector<double> out(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    out[i] = std::clamp((obs[i] - mean[i]) / std::sqrt(var[i] + 1e-8), -clip, clip);
  }
  return out;
}

PolicyParams PolicyParams::create(int obs_dim, int act_dim, std::vector<int> hidden,
                                  double init_log_std, std::mt19937_64& rng) {
  PolicyParams p;
  p.actor.sizes.push_back(obs_dim);
  p.critic.sizes.push_back(obs_dim);
  for (int h : hidden) {
    p.actor.sizes.push_back(h);
    p.critic.sizes.push_back(h);
  }
  p.actor.sizes.push_back(act_dim);
  p.critic.sizes.push_back(1);
  p.flat.assign(p.actor.param_count() + act_dim + p.critic.param_count(), 0.0);
  mlp_init(p.actor, p.actor_params(), rng, 1.0, 0.01);
  mlp_init(p.critic, p.critic_params(), rng, 1.0, 1.0);
  std::fill(p.log_std().begin(), p.log_std().end(), init_log_std);
  p.clamp_log_std();
  p.obs_norm = ObsNormalizer::identity(obs_dim);
  return p;
}

std::span<const double> PolicyParams::actor_params() const {
  return std::span<const double>(flat).subspan(actor_offset(), actor.param_count());
}
std::span<const double> PolicyParams::log_std() const {
  return std::span<const double>(flat).subspan(log_std_offset(), act_dim());
}
std::span<const double> PolicyParams::critic_params() const {
  return std::span<const double>(flat).subspan(critic_offset(), critic.param_count());
}
std::span<double> PolicyParams::actor_params() {
  return std::span<double>(flat).subspan(actor_offset(), actor.param_count());
}
std::span<double> PolicyParams::log_std() {
  return std::span<double>(flat).subspan(log_std_offset(), act_dim());
}
std::span<double> PolicyParams::critic_params() {
  return std::span<double>(flat).subspan(critic_offset(), critic.param_count());
}

void PolicyParams::clamp_log_std() {
  for (double& s : log_std()) s = std::clamp(s, kLogStdMin, kLogStdMax);
}

bool PolicyParams::all_finite() const {
  return std::all_of(flat.begin(), flat.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> policy_mean(const PolicyParams& params, std::span<const double> norm_obs) {
  MlpCache cache;
  auto out = mlp_forward(params.actor, params.actor_params(), norm_obs, cache);
  return {out.begin(), out.end()};
}

double value_estimate(const PolicyParams& params, std::span<const double> norm_obs) {
  MlpCache cache;
  return mlp_forward(params.critic, params.critic_params(), norm_obs, cache)[0];
}

double gaussian_log_prob(std::span<const double> action, std::span<const double> mean,
                         std::span<const double> log_std) {
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  double lp = 0.0;
  for (std::size_t d = 0; d < action.size(); ++d) {
    const double z = (action[d] - mean[d]) * std::exp(-log_std[d]);
    lp += -0.5 * z * z - log_std[d] - kHalfLog2Pi;
  }
  return lp;
}

double gaussian_entropy(std::span<const double> log_std) {
  const double half_log_2pi_e = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  double h = 0.0;
  for (double s : log_std) h += s + half_log_2pi_e;
  return h;
}

ActionSample sample_action(const PolicyParams& params, std::span<const double> norm_obs,
                           std::mt19937_64& rng) {
  ActionSample s;
  s.mean = policy_mean(params, norm_obs);
  const auto log_std = params.log_std();
  std::normal_distribution<double> normal(0.0, 1.0);
  s.action.resize(s.mean.size());
  for (std::size_t d = 0; d < s.mean.size(); ++d) {
    s.action[d] = s.mean[d] + std::exp(log_std[d]) * normal(rng);
  }
  s.log_prob = gaussian_log_prob(s.action, s.mean, log_std);
  return s;
}

void write_policy(std::ostream& out, const PolicyParams& p) {
  const auto old_precision = out.precision(17);
  out << kArtifactMagic << ' ' << kArtifactVersion << '\n';
  write_sizes(out, "actor_sizes", p.actor.sizes);
  write_sizes(out, "critic_sizes", p.critic.sizes);
  out << "reward_weights " << p.trained_weights.w_a << ' ' << p.trained_weights.w_t << ' '
      << p.trained_weights.w_e << '\n';
  write_list(out, "log_std", p.log_std());
  write_list(out, "obs_mean", p.obs_norm.mean);
  write_list(out, "obs_var", p.obs_norm.var);
  out << "obs_count " << p.obs_norm.count << '\n';
  out << "obs_clip " << p.obs_norm.clip << '\n';
  write_list(out, "actor_params", p.actor_params());
  write_list(out, "critic_params", p.critic_params());
  out.precision(old_precision);
}

PolicyParams read_policy(std::istream& in) {
  ArtifactReader reader(in);
  {
    std::string magic;
    int version = 0;
    std::string text;
    if (!std::getline(in, text)) throw FormatError("header", "empty artifact");
    std::istringstream fields(text);
    if (!(fields >> magic >> version) || magic != kArtifactMagic) {
      throw FormatError("header", "not a policy artifact");
    }
    if (version != kArtifactVersion) {
      throw FormatError("header", "unsupported version " + std::to_string(version));
    }
  }
  PolicyParams p;
  p.actor.sizes = reader.sizes("actor_sizes");
  p.critic.sizes = reader.sizes("critic_sizes");
  if (p.critic.input_size() != p.actor.input_size() || p.critic.output_size() != 1) {
    throw FormatError("critic_sizes", "incompatible with actor_sizes");
  }
  {
    auto fields = reader.line("reward_weights");
    if (!(fields >> p.trained_weights.w_a >> p.trained_weights.w_t >> p.trained_weights.w_e)) {
      throw FormatError("reward_weights", "expected three values");
    }
  }
  const auto log_std = reader.doubles("log_std");
  if (static_cast<int>(log_std.size()) != p.actor.output_size()) {
    throw FormatError("log_std", "length does not match action size");
  }
  p.obs_norm.mean = reader.doubles("obs_mean");
  p.obs_norm.var = reader.doubles("obs_var");
  if (static_cast<int>(p.obs_norm.mean.size()) != p.actor.input_size()) {
    throw FormatError("obs_mean", "length does not match observation size");
  }
  if (p.obs_norm.var.size() != p.obs_norm.mean.size()) {
    throw FormatError("obs_var", "length does not match observation size");
  }
  {
    auto fields = reader.line("obs_count");
    if (!(fields >> p.obs_norm.count)) throw FormatError("obs_count", "expected a value");
  }
  {
    auto fields = reader.line("obs_clip");
    if (!(fields >> p.obs_norm.clip)) throw FormatError("obs_clip", "expected a value");
  }
  const auto actor = reader.doubles("actor_params");
  if (actor.size() != p.actor.param_count()) {
    throw FormatError("actor_params", "count does not match actor_sizes");
  }
  const auto critic = reader.doubles("critic_params");
  if (critic.size() != p.critic.param_count()) {
    throw FormatError("critic_params", "count does not match critic_sizes");
  }
  p.flat.reserve(actor.size() + log_std.size() + critic.size());
  p.flat.insert(p.flat.end(), actor.begin(), actor.end());
  p.flat.insert(p.flat.end(), log_std.begin(), log_std.end());
  p.flat.insert(p.flat.end(), critic.begin(), critic.end());
  return p;
}

void save_policy(const std::string& path, const PolicyParams& params) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_policy(out, params);
  if (!out) throw std::runtime_error("write failed: " + path);
}

PolicyParams load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("path", "cannot open " + path);
  return read_policy(in);
}

}  // namespace pourlab::rl
