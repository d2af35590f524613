#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.hpp"

using namespace noonsim;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("noonsim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

cli::RunContext context(const fs::path& out, const std::string& cfg_text = "") {
  static std::ostringstream sink;
  cli::RunContext ctx;
  ctx.config = KeyValueConfig::parse(cfg_text);
  ctx.out_dir = out;
  ctx.log = &sink;
  return ctx;
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string item; std::getline(in, item, sep);) out.push_back(item);
  return out;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = io::read_text(e.path());
  return files;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NOONSIM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, parses_comments_and_values) {
  const auto c = KeyValueConfig::parse("# header\npreset = tmp  # inline\n\nt_max = 0.02\ndecoherence = off\n"
                                       "t_max_list = 0.002, 0.01 ,0.02\n");
  EXPECT_EQ(c.text("preset").value(), "tmp");
  EXPECT_EQ(c.number("t_max").value(), 0.02);
  EXPECT_FALSE(c.boolean("decoherence").value());
  EXPECT_EQ(c.number_list("t_max_list").value(), (std::vector<double>{0.002, 0.01, 0.02}));
  EXPECT_FALSE(c.has("seed"));
}

TEST(Config, rejects_malformed_input) {
  EXPECT_THROW(KeyValueConfig::parse("t_max 0.02"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse("tmax = 0.02"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse("= 3"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse("t_max = fast").number("t_max"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse("n_times = 12.5").integer("n_times"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse("decoherence = maybe").boolean("decoherence"), ConfigError);
}

TEST(Config, builds_domain_objects_with_overrides) {
  const auto c = KeyValueConfig::parse("preset = tmp\nt2_collective = 2.0\nn_times = 128\nwindow_bins = 21\n"
                                       "line_shape = gaussian\nsensitivity = 9e-8\n");
  const auto sys = spin_system_from(c);
  EXPECT_EQ(sys.n_satellites, 9);
  EXPECT_EQ(sys.t2_collective, 2.0);
  EXPECT_EQ(encoding_config_from(c).n_times, 128);
  const auto opt = analysis_options_from(c);
  EXPECT_EQ(opt.window_bins, 21);
  EXPECT_EQ(opt.shape, LineShape::gaussian);
  EXPECT_EQ(thermometer_settings_from(c).truth.sensitivity, 9e-8);
  EXPECT_EQ(spin_system_from(KeyValueConfig{}).name, "hexafluorophosphate");
}

TEST(Config, invalid_domain_values_become_config_errors) {
  EXPECT_THROW(spin_system_from(KeyValueConfig::parse("n_satellites = 0")), ConfigError);
  EXPECT_THROW(encoding_config_from(KeyValueConfig::parse("t_max = -1")), ConfigError);
  EXPECT_THROW(analysis_options_from(KeyValueConfig::parse("window_bins = 3")), ConfigError);
  EXPECT_THROW(analysis_options_from(KeyValueConfig::parse("line_shape = voigt")), ConfigError);
  EXPECT_THROW(thermometer_settings_from(KeyValueConfig::parse("sensitivity = 0")), ConfigError);
}

TEST(Io, numbers_use_twelve_significant_digits) {
  EXPECT_EQ(io::num(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(io::num(11.73e-6), "1.173e-05");
  EXPECT_EQ(io::rounded(2.0 / 3.0), 0.666666666667);
}

TEST(Io, peak_series_json_round_trip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1e-3, 0.06);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = trial % 2 ? presets::tmp() : presets::hexafluorophosphate();
    EncodingConfig c;
    c.t_max = u(rng);
    c.n_times = 32;
    c.noise_sigma = 1e-3;
    c.seed = trial;
    const auto ps = run_protocol(sys, c);
    const auto back = io::peak_series_from_json(io::json::parse(io::dump(io::to_json(ps, sys))));
    EXPECT_EQ(back.system.name, sys.name);
    EXPECT_EQ(back.system.n_satellites, sys.n_satellites);
    EXPECT_NEAR(back.system.t2_collective, sys.t2_collective, 1e-11 * sys.t2_collective);
    ASSERT_EQ(back.series.l_values, ps.l_values);
    for (std::size_t i = 0; i < ps.l_values.size(); ++i)
      for (std::size_t k = 0; k < ps.times.size(); ++k) {
        ASSERT_EQ(back.series.amplitudes[i][k].real(), io::rounded(ps.amplitudes[i][k].real()));
        ASSERT_EQ(back.series.amplitudes[i][k].imag(), io::rounded(ps.amplitudes[i][k].imag()));
      }
    // A second pass through the text form is exact.
    EXPECT_EQ(io::dump(io::to_json(back.series, back.system)), io::dump(io::to_json(ps, sys)));
  }
}

TEST(Io, calibration_json_round_trip) {
  Calibration c;
  c.model = {22.0, 1.5e-7, 8.5e-8};
  const auto back = io::calibration_from_json(io::to_json(c));
  EXPECT_EQ(back.model.anchor_temp, 22.0);
  EXPECT_EQ(back.model.anchor_field, 1.5e-7);
  EXPECT_EQ(back.model.sensitivity, 8.5e-8);
  EXPECT_THROW(io::calibration_from_json(io::json{{"anchor_temp_c", 22}, {"anchor_field_t", 0},
                                                  {"sensitivity_t_per_c", 0}}),
               std::runtime_error);
}

TEST(Simulate, writes_one_row_per_sample_with_four_line_columns) {
  const auto out = fresh_dir("simulate");
  ASSERT_EQ(cli::cmd_simulate(context(out, "preset = pf6\nt_max = 0.002\n")), cli::ok);
  const auto lines = csv_lines(out / "pf6_peak_series.csv");
  ASSERT_EQ(lines.size(), 513u);
  EXPECT_EQ(lines[0], "time_s,re_l6,im_l6,re_l4,im_l4,re_l2,im_l2,re_l1,im_l1");
  for (std::size_t i = 1; i < lines.size(); ++i) ASSERT_EQ(split(lines[i], ',').size(), 9u);
  for (const char* f : {"pf6_peak_series.json", "pf6_peak_evolution.svg", "pf6_line_spectrum.csv",
                        "pf6_line_spectrum.json", "pf6_line_spectrum.svg"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
}

TEST(Simulate, zero_field_traces_are_constant) {
  const auto out = fresh_dir("simulate_zero");
  auto ctx = context(out, "delta = 0\ndecoherence = false\n");
  ctx.formats = {"csv"};
  ASSERT_EQ(cli::cmd_simulate(ctx), cli::ok);
  const auto lines = csv_lines(out / "pf6_peak_series.csv");
  const auto first = split(lines[1], ',');
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto row = split(lines[i], ',');
    for (std::size_t j = 1; j < row.size(); ++j) ASSERT_EQ(row[j], first[j]) << "row " << i;
  }
}

TEST(Simulate, format_selection_limits_outputs) {
  const auto out = fresh_dir("simulate_json");
  auto ctx = context(out);
  ctx.formats = {"json"};
  ASSERT_EQ(cli::cmd_simulate(ctx), cli::ok);
  for (const auto& [name, text] : snapshot(out)) EXPECT_EQ(fs::path(name).extension(), ".json");
}

TEST(Estimate, merged_presets_cover_all_lines) {
  const auto out = fresh_dir("estimate");
  auto ctx = context(out, "decoherence = false\n");
  ctx.presets = {"tmp", "pf6"};
  ASSERT_EQ(cli::cmd_estimate(ctx), cli::ok);
  const auto lines = csv_lines(out / "advantage.csv");
  ASSERT_EQ(lines.size(), 1u + 5u + 4u);
  std::set<int> ls;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto row = split(lines[i], ',');
    const int l = std::stoi(row[1]);
    ls.insert(l);
    EXPECT_NEAR(std::stod(row[2]), l, 0.03 * l) << lines[i];
  }
  EXPECT_EQ(ls, (std::set<int>{1, 2, 3, 4, 5, 6, 7, 9}));
  EXPECT_TRUE(fs::exists(out / "tmp_field_spectrum_l9.csv"));
  EXPECT_TRUE(fs::exists(out / "pf6_field_spectrum_l6.json"));
}

TEST(Estimate, reads_series_written_by_simulate) {
  const auto out = fresh_dir("estimate_input");
  auto sim = context(out, "t_max = 0.02\n");
  sim.formats = {"json"};
  ASSERT_EQ(cli::cmd_simulate(sim), cli::ok);
  auto est = context(out);
  est.formats = {"json"};
  est.inputs = {out / "pf6_peak_series.json"};
  ASSERT_EQ(cli::cmd_estimate(est), cli::ok);
  const auto rows = io::json::parse(io::read_text(out / "field_estimates.json"));
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_NEAR(r.at("delta_hat_t").get<double>(), 11.73e-6, 0.2e-6);
}

TEST(Scan, requires_a_list) {
  EXPECT_THROW(cli::cmd_scan(context(fresh_dir("scan_empty"))), ConfigError);
  EXPECT_THROW(cli::cmd_scan(context(fresh_dir("scan_empty2"), "t_max_list = ,\n")), ConfigError);
}

TEST(Scan, writes_rows_and_optima) {
  const auto out = fresh_dir("scan");
  ASSERT_EQ(cli::cmd_scan(context(out, "t_max_list = 0.002, 0.02\n")), cli::ok);
  EXPECT_EQ(csv_lines(out / "pf6_scan.csv").size(), 1u + 2u * 4u);
  EXPECT_EQ(csv_lines(out / "pf6_scan_optimum.csv").size(), 1u + 4u);
}

TEST(Thermometer, default_sweep_and_stored_calibration) {
  const auto out = fresh_dir("thermometer");
  ASSERT_EQ(cli::cmd_thermometer(context(out)), cli::ok);
  const auto lines = csv_lines(out / "thermometer.csv");
  ASSERT_EQ(lines.size(), 10u);
  EXPECT_EQ(lines[0], "set_temp_c,delta_hat_t,est_temp_c,temp_err_c");
  const auto res = io::json::parse(io::read_text(out / "thermometer.json"));
  EXPECT_NEAR(res.at("refit_slope_t_per_c").get<double>(), 85e-9, 0.05 * 85e-9);

  const auto again = fresh_dir("thermometer_reuse");
  auto ctx = context(again, "sweep_start = 26\nsweep_stop = 26\n");
  ctx.calibration_file = out / "calibration.json";
  ASSERT_EQ(cli::cmd_thermometer(ctx), cli::ok);
  EXPECT_EQ(csv_lines(again / "thermometer.csv").size(), 2u);
  EXPECT_EQ(io::read_text(again / "calibration.json"), io::read_text(out / "calibration.json"));
}

TEST(Thermometer, equal_calibration_temperatures_fail) {
  EXPECT_THROW(cli::cmd_thermometer(context(fresh_dir("thermo_bad"), "cal_temp_high = 22\n")), std::domain_error);
}

TEST(Commands, repeated_runs_are_byte_identical) {
  const std::string cfg = "noise_sigma = 0.01\nseed = 17\nt_max_list = 0.002, 0.01\n";
  using Cmd = int (*)(const cli::RunContext&);
  for (Cmd cmd : {static_cast<Cmd>(cli::cmd_simulate), static_cast<Cmd>(cli::cmd_estimate),
                  static_cast<Cmd>(cli::cmd_scan)}) {
    const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
    ASSERT_EQ(cmd(context(a, cfg)), cli::ok);
    ASSERT_EQ(cmd(context(b, cfg)), cli::ok);
    const auto sa = snapshot(a), sb = snapshot(b);
    ASSERT_FALSE(sa.empty());
    EXPECT_EQ(sa, sb);
  }
}

TEST(Binary, exit_codes) {
  const auto out = fresh_dir("binary");
  const std::string o = " --out " + out.string();
  EXPECT_EQ(run_cli("simulate --format csv" + o), 0);
  EXPECT_EQ(run_cli("simulate --preset nope" + o), 1);
  EXPECT_EQ(run_cli("simulate --set bogus=1" + o), 1);
  EXPECT_EQ(run_cli("scan" + o), 1);
  EXPECT_EQ(run_cli("estimate --set inept_gain=0" + o), 2);
  EXPECT_EQ(run_cli(""), 1);
}
