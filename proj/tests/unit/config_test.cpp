#include "pourlab/config.hpp"

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "pourlab/csv.hpp"
#include "pourlab/error.hpp"

namespace pourlab::harness {
namespace {

SweepConfig parsed(const std::string& text, SweepConfig base = default_config()) {
  std::istringstream in(text);
  parse_config(in, base);
  return base;
}

std::string error_field(const std::string& text) {
  try {
    validate(parsed(text));
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "none";
}

TEST(Config, DefaultsAreValid) {
  EXPECT_NO_THROW(validate(default_config()));
  SweepConfig ci = default_config();
  apply_ci_profile(ci);
  EXPECT_NO_THROW(validate(ci));
  EXPECT_LT(ci.ppo.total_steps, default_config().ppo.total_steps);
}

TEST(Config, SectionsAndCommentsParse) {
  const SweepConfig c = parsed(
      "; desk profile\n"
      "[env]\n"
      "horizon = 600   \n"
      "home_angles = 1.0, -1.5, 0.2\n"
      "# reward block\n"
      "[reward]\n"
      "w_t = 3.5\n"
      "[ppo]\n"
      "hidden = 32, 16\n"
      "[sweep]\n"
      "write_trajectories = true\n"
      "output_dir = out dir\n");
  EXPECT_EQ(c.env.horizon, 600);
  EXPECT_EQ(c.env.home_angles, (sim::JointVector{1.0, -1.5, 0.2}));
  EXPECT_EQ(c.baseline.w_t, 3.5);
  EXPECT_EQ(c.ppo.hidden, (std::vector<int>{32, 16}));
  EXPECT_TRUE(c.write_trajectories);
  EXPECT_EQ(c.output_dir, "out dir");
  // Untouched keys keep their defaults.
  EXPECT_EQ(c.baseline.w_e, 0.2);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(error_field("[env]\nhorizonn = 3\n"), "env.horizonn");
  EXPECT_EQ(error_field("[nope]\nx = 1\n"), "nope.x");
  EXPECT_EQ(error_field("[env]\nhorizon = ten\n"), "env.horizon");
  EXPECT_EQ(error_field("[env]\nhome_angles = 1, 2\n"), "env.home_angles");
  EXPECT_EQ(error_field("[sweep]\nwrite_trajectories = maybe\n"), "sweep.write_trajectories");
  EXPECT_EQ(error_field("horizon = 3\n"), "horizon");
  EXPECT_EQ(error_field("[sweep]\nseeds_per_config = 0\n"), "sweep.seeds_per_config");
  EXPECT_EQ(error_field("[sweep]\nevals_per_policy = 0\n"), "sweep.evals_per_policy");
  EXPECT_EQ(error_field("[env]\nparticle_count = 0\n"), "particle_count");
  EXPECT_EQ(error_field("[classifier]\nfast_quantile = 2\n"), "fast_quantile");
  EXPECT_EQ(error_field("[env\nhorizon = 3\n"), "config");
}

TEST(Config, CanonicalTextRoundTrips) {
  const SweepConfig c = default_config();
  const std::string text = write_config(c);
  EXPECT_EQ(write_config(parsed(text, SweepConfig{})), text);
}

// Property: random perturbations of every numeric field survive the
// write/parse cycle bit for bit.
TEST(Config, RandomConfigsRoundTrip) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    SweepConfig c = default_config();
    c.env.dt = 0.001 + 0.02 * unit(gen);
    c.env.jet_jitter = unit(gen) / 3.0;
    c.env.home_angles = {unit(gen), -unit(gen), unit(gen) * 1e-7};
    c.ppo.learning_rate = std::pow(10.0, -6.0 * unit(gen));
    c.ppo.hidden = {1 + static_cast<int>(100 * unit(gen))};
    c.baseline.w_t = 1.0 / (0.1 + unit(gen));
    c.mutation.grid_offsets = {-unit(gen) - 1.0, 0.0, 1.0 / 3.0};
    c.thresholds.watering_spread_min = unit(gen) + 1e-300;
    c.seed = gen();
    const std::string text = write_config(c);
    const SweepConfig back = parsed(text, SweepConfig{});
    EXPECT_EQ(write_config(back), text);
    EXPECT_EQ(back.env.dt, c.env.dt);
    EXPECT_EQ(back.seed, c.seed);
    EXPECT_EQ(back.mutation.grid_offsets, c.mutation.grid_offsets);
  }
}

TEST(Config, ShippedFilesMatchTheBuiltInProfiles) {
  SweepConfig from_file = default_config();
  load_config(std::string(POURLAB_SOURCE_DIR) + "/configs/default.ini", from_file);
  EXPECT_EQ(write_config(from_file), write_config(default_config()));
  SweepConfig ci = default_config();
  apply_ci_profile(ci);
  SweepConfig ci_file = default_config();
  load_config(std::string(POURLAB_SOURCE_DIR) + "/configs/ci.ini", ci_file);
  EXPECT_EQ(write_config(ci_file), write_config(ci));
}

TEST(Config, SeedsCountUpFromTheBase) {
  SweepConfig c;
  c.seed = 7;
  c.seeds_per_config = 3;
  EXPECT_EQ(c.seeds(), (std::vector<std::uint64_t>{7, 8, 9}));
}

TEST(Csv, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(csv::escape("plain"), "plain");
  EXPECT_EQ(csv::escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv::escape("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(csv::escape(""), "");
}

TEST(Csv, ParsesQuotedFieldsAndCrlf) {
  const auto rows = csv::parse("a,\"b,c\",\"d\"\"e\"\r\n1,,\"x\ny\"\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"a", "b,c", "d\"e"}));
  EXPECT_EQ(rows[1], (std::vector<std::string>{"1", "", "x\ny"}));
  EXPECT_THROW(csv::parse("\"open\n"), FormatError);
}

// Property: random rows with awkward characters survive write then parse.
TEST(Csv, RandomRowsRoundTrip) {
  std::mt19937_64 gen(4);
  const std::string alphabet = "ab,\"\n\r x1";
  std::uniform_int_distribution<std::size_t> ch(0, alphabet.size() - 1), len(0, 6), width(1, 5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::vector<std::string>> rows(1 + trial % 4);
    std::ostringstream out;
    for (auto& row : rows) {
      row.resize(width(gen));
      for (auto& field : row) {
        for (std::size_t k = len(gen); k > 0; --k) field += alphabet[ch(gen)];
      }
      // A lone empty field is indistinguishable from a blank line.
      if (row.size() == 1 && row[0].empty()) row[0] = "a";
      csv::write_row(out, row);
    }
    EXPECT_EQ(csv::parse(out.str()), rows);
  }
}

TEST(Csv, FormatDoubleRoundTrips) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> unit(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = unit(gen);
    EXPECT_EQ(std::stod(csv::format_double(v)), v);
  }
  EXPECT_EQ(csv::format_double(0.15), "0.15");
  EXPECT_EQ(csv::format_double(4.0), "4");
}

}  // namespace
}  // namespace pourlab::harness
