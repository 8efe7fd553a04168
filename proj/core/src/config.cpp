#include "pourlab/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <variant>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pourlab/csv.hpp"
#include "pourlab/error.hpp"

namespace pourlab::harness {
namespace {

using FieldRef = std::variant<double*, int*, long*, std::uint64_t*, bool*, std::string*,
                              sim::JointVector*, std::vector<double>*, std::vector<int>*>;

struct Field {
  const char* section;
  const char* key;
  FieldRef ref;
};

std::vector<Field> fields(SweepConfig& c) {
  sim::EnvConfig& e = c.env;
  rl::PPOConfig& p = c.ppo;
  return {
      {"env", "dt", &e.dt},
      {"env", "horizon", &e.horizon},
      {"env", "gravity", &e.gravity},
      {"env", "particle_count", &e.particle_count},
      {"env", "particle_mass", &e.particle_mass},
      {"env", "target_fill_fraction", &e.target_fill_fraction},
      {"env", "torque_limit", &e.torque_limit},
      {"env", "link_lengths", &e.link_lengths},
      {"env", "joint_damping", &e.joint_damping},
      {"env", "emission_rate_max", &e.emission_rate_max},
      {"env", "emission_gain", &e.emission_gain},
      {"env", "jet_speed", &e.jet_speed},
      {"env", "jet_jitter", &e.jet_jitter},
      {"env", "payload_mass", &e.payload_mass},
      {"env", "base_x", &e.base.x},
      {"env", "base_z", &e.base.z},
      {"env", "home_angles", &e.home_angles},
      {"env", "home_jitter", &e.home_jitter},
      {"env", "joint_lower", &e.joint_lower},
      {"env", "joint_upper", &e.joint_upper},
      {"cup", "lip_offset", &e.cup.lip_offset},
      {"cup", "half_width", &e.cup.half_width},
      {"cup", "depth", &e.cup.depth},
      {"cup", "fill_level", &e.cup.fill_level},
      {"container", "center_x", &e.container.center_x},
      {"container", "half_width", &e.container.half_width},
      {"container", "rim_half_thickness", &e.container.rim_half_thickness},
      {"container", "rim_z", &e.container.rim_z},
      {"ppo", "gamma", &p.gamma},
      {"ppo", "lambda", &p.lambda},
      {"ppo", "clip", &p.clip},
      {"ppo", "epochs", &p.epochs},
      {"ppo", "minibatch_size", &p.minibatch_size},
      {"ppo", "learning_rate", &p.learning_rate},
      {"ppo", "entropy_coef", &p.entropy_coef},
      {"ppo", "value_coef", &p.value_coef},
      {"ppo", "rollout_length", &p.rollout_length},
      {"ppo", "total_steps", &p.total_steps},
      {"ppo", "hidden", &p.hidden},
      {"ppo", "init_log_std", &p.init_log_std},
      {"ppo", "max_grad_norm", &p.max_grad_norm},
      {"reward", "w_a", &c.baseline.w_a},
      {"reward", "w_t", &c.baseline.w_t},
      {"reward", "w_e", &c.baseline.w_e},
      {"mutation", "sigma_t", &c.mutation.sigma_t},
      {"mutation", "sigma_e", &c.mutation.sigma_e},
      {"mutation", "grid_offsets", &c.mutation.grid_offsets},
      {"classifier", "fill_success", &c.thresholds.fill_success},
      {"classifier", "spill_max", &c.thresholds.spill_max},
      {"classifier", "fast_quantile", &c.thresholds.fast_quantile},
      {"classifier", "slow_quantile", &c.thresholds.slow_quantile},
      {"classifier", "rim_min", &c.thresholds.rim_min},
      {"classifier", "mixing_oscillations_min", &c.thresholds.mixing_oscillations_min},
      {"classifier", "watering_spread_min", &c.thresholds.watering_spread_min},
      {"features", "smoothing_window", &c.features.smoothing_window},
      {"features", "velocity_deadband", &c.features.velocity_deadband},
      {"sweep", "seeds_per_config", &c.seeds_per_config},
      {"sweep", "evals_per_policy", &c.evals_per_policy},
      {"sweep", "seed", &c.seed},
      {"sweep", "workers", &c.workers},
      {"sweep", "output_dir", &c.output_dir},
      {"sweep", "write_trajectories", &c.write_trajectories},
  };
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& text, const std::string& name) {
  T value{};
  const std::string t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(name, "cannot parse '" + t + "' as a number");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& name) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(item, name));
  return out;
}

void assign(const FieldRef& ref, const std::string& text, const std::string& name) {
  std::visit(
      [&](auto* target) {
        using T = std::remove_pointer_t<decltype(target)>;
        if constexpr (std::is_same_v<T, bool>) {
          const std::string t = trim(text);
          if (t == "true" || t == "1") {
            *target = true;
          } else if (t == "false" || t == "0") {
            *target = false;
          } else {
            throw ConfigError(name, "expected true or false");
          }
        } else if constexpr (std::is_same_v<T, std::string>) {
          *target = trim(text);
        } else if constexpr (std::is_same_v<T, sim::JointVector>) {
          const auto v = parse_list<double>(text, name);
          if (v.size() != target->size()) throw ConfigError(name, "expected 3 comma-separated values");
          std::copy(v.begin(), v.end(), target->begin());
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          *target = parse_list<double>(text, name);
        } else if constexpr (std::is_same_v<T, std::vector<int>>) {
          *target = parse_list<int>(text, name);
        } else {
          *target = parse_number<T>(text, name);
        }
      },
      ref);
}

std::string render(const FieldRef& ref) {
  return std::visit(
      [](auto* source) -> std::string {
        using T = std::remove_pointer_t<decltype(source)>;
        if constexpr (std::is_same_v<T, bool>) {
          return *source ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return *source;
        } else if constexpr (std::is_same_v<T, double>) {
          return csv::format_double(*source);
        } else if constexpr (std::is_same_v<T, sim::JointVector> ||
                             std::is_same_v<T, std::vector<double>> ||
                             std::is_same_v<T, std::vector<int>>) {
          std::string out;
          for (const auto& v : *source) {
            if (!out.empty()) out += ", ";
            if constexpr (std::is_same_v<T, std::vector<int>>) {
              out += std::to_string(v);
            } else {
              out += csv::format_double(v);
            }
          }
          return out;
        } else {
          return std::to_string(*source);
        }
      },
      ref);
}

}  // namespace

std::vector<std::uint64_t> SweepConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (int k = 0; k < seeds_per_config; ++k) out.push_back(seed + static_cast<std::uint64_t>(k));
  return out;
}

SweepConfig default_config() {
  SweepConfig c;
  c.ppo.total_steps = 250'000;
  c.ppo.init_log_std = 0.5;
  c.ppo.entropy_coef = 0.01;
  return c;
}

void apply_ci_profile(SweepConfig& c) {
  c.env.horizon = 300;
  c.ppo.total_steps = 2048;
  c.ppo.rollout_length = 512;
  c.ppo.epochs = 2;
  c.ppo.minibatch_size = 128;
  c.ppo.hidden = {16, 16};
  c.seeds_per_config = 1;
  c.evals_per_policy = 2;
}

void validate(const SweepConfig& c) {
  sim::validate(c.env);
  rl::validate(c.ppo);
  reward::validate(c.baseline);
  reward::validate(c.mutation);
  behavior::validate(c.thresholds);
  behavior::validate(c.features);
  if (c.seeds_per_config < 1) throw ConfigError("sweep.seeds_per_config", "must be >= 1");
  if (c.evals_per_policy < 1) throw ConfigError("sweep.evals_per_policy", "must be >= 1");
  if (c.workers < 1) throw ConfigError("sweep.workers", "must be >= 1");
  if (c.output_dir.empty()) throw ConfigError("sweep.output_dir", "must not be empty");
}

void parse_config(std::istream& in, SweepConfig& config) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  const std::vector<Field> table = fields(config);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(section, "keys must appear inside a [section]");
    }
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      const Field* match = nullptr;
      for (const Field& f : table) {
        if (section == f.section && key == f.key) match = &f;
      }
      if (!match) throw ConfigError(name, "unknown key");
      assign(match->ref, value.data(), name);
    }
  }
}

void load_config(const std::string& path, SweepConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  parse_config(in, config);
}

std::string write_config(const SweepConfig& config) {
  SweepConfig copy = config;
  std::ostringstream out;
  std::string current;
  for (const Field& f : fields(copy)) {
    if (current != f.section) {
      if (!current.empty()) out << '\n';
      current = f.section;
      out << '[' << current << "]\n";
    }
    out << f.key << " = " << render(f.ref) << '\n';
  }
  return out.str();
}

}  // namespace pourlab::harness
