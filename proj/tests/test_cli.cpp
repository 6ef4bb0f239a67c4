#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "movsrc/artifacts.hpp"
#include "movsrc/checkpoint.hpp"
#include "movsrc/cli.hpp"

using namespace movsrc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path = fs::temp_directory_path() / ("movsrc_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path operator/(const std::string& name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// A small case 2 run: few sensors, times and grid points so chains are cheap.
json small_config(double alpha = 0.0) {
  return {{"schema_version", 1},
          {"scenario", "case2"},
          {"overrides", {{"n_sensors", 30}, {"n_times", 20}, {"latent_size", 20}}},
          {"chains", 2},
          {"samples", 60},
          {"thinning", 5},
          {"sample_export_every", 10},
          {"checkpoint_interval", 20},
          {"seed", 11},
          {"noise_alpha", alpha}};
}

void write_config(const fs::path& p, const json& doc) { std::ofstream(p) << doc.dump(2); }

int run_cli(const std::string& args) {
  const char* exe = std::getenv("MOVSRC_CLI");
  REQUIRE(exe != nullptr);
  const std::string cmd = std::string("MOVSRC_LOG_LEVEL=off \"") + exe + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(parse_run_config({{"schema_version", 1}, {"scenario", "case1"}}));
  const RunConfig defaults = parse_run_config({{"schema_version", 1}, {"scenario", "case3"}});
  CHECK(defaults.chains == 2);
  CHECK(defaults.samples == 20000);
  CHECK(defaults.document.at("delta") == 0.0025);
  CHECK(defaults.document.at("closed_curve") == false);

  auto rejects = [](json doc) { CHECK_THROWS_AS(parse_run_config(doc), ValidationError); };
  rejects(json::array());
  rejects({{"scenario", "case1"}});
  rejects({{"schema_version", 2}, {"scenario", "case1"}});
  rejects({{"schema_version", 1}});
  rejects({{"schema_version", 1}, {"scenario", "case7"}});
  rejects({{"schema_version", 1}, {"scenario", "case1"}, {"chain", 2}});
  rejects({{"schema_version", 1}, {"scenario", "case1"}, {"overrides", {{"lengthscale", 2}}}});
  rejects({{"schema_version", 1}, {"scenario", "case1"}, {"delta", 0.0}});
  rejects({{"schema_version", 1}, {"scenario", "case1"}, {"delta", 0.6}});
  rejects({{"schema_version", 1}, {"scenario", "case1"}, {"burn_in_fraction", 1.0}});
  rejects({{"schema_version", 1}, {"scenario", "case1"}, {"chains", 0}});
  rejects({{"schema_version", 1}, {"scenario", "case1"}, {"samples", -5}});
  rejects({{"schema_version", 1}, {"scenario", "case1"}, {"noise_alpha", -0.1}});
  rejects({{"schema_version", 1}, {"scenario", "case1"}, {"thinning", 10}, {"sample_export_every", 15}});
  rejects({{"schema_version", 1}, {"scenario", "case1"}, {"closed_curve", 1}});
  rejects({{"schema_version", 1}, {"scenario", "case2"}, {"overrides", {{"c", 0.1}}}});
  rejects({{"schema_version", 1}, {"scenario", "case1"}, {"overrides", {{"region", "octant"}}}});
}

TEST_CASE("config hash ignores the output directory only") {
  json doc = {{"schema_version", 1}, {"scenario", "case1"}};
  const auto base = parse_run_config(doc).hash();
  doc["output_dir"] = "/tmp/elsewhere";
  CHECK(parse_run_config(doc).hash() == base);
  doc["seed"] = 2;
  CHECK(parse_run_config(doc).hash() != base);
  // Spelling out a default does not change the normalized document.
  CHECK(parse_run_config({{"schema_version", 1}, {"scenario", "case1"}, {"chains", 2}}).hash() == base);
}

TEST_CASE("csv round trip is bit exact") {
  TempDir dir;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FieldMatrix field(7, 5);
  for (Eigen::Index i = 0; i < field.size(); ++i) field.data()[i] = u(gen) * std::pow(10.0, 20.0 * u(gen));
  field(0, 0) = 0.0;
  field(1, 1) = -0.0;
  field(2, 2) = 5e-324;
  write_field(dir / "f.csv", field);
  const FieldMatrix back = read_field(dir / "f.csv");
  REQUIRE(back.rows() == 7);
  REQUIRE(back.cols() == 5);
  CHECK(std::memcmp(back.data(), field.data(), sizeof(double) * 35) == 0);

  const CsvTable t = read_csv(dir / "f.csv");
  CHECK(t.header.front() == "sensor");
  CHECK(t.header[1] == "u_0[field]");

  std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3\n";
  CHECK_THROWS_AS(read_csv(dir / "bad.csv"), ArtifactError);
  std::ofstream(dir / "nan.csv") << "a,b\n1,x\n";
  CHECK_THROWS_AS(read_csv(dir / "nan.csv"), ArtifactError);
}

TEST_CASE("source models round trip through csv") {
  TempDir dir;
  const Scenario sc = build_case(4);
  write_source_model(dir / "m.csv", sc.truth);
  const SourceModel back = read_source_model(dir / "m.csv");
  REQUIRE(back.sources.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(back.sources[s].x.values()[7] == sc.truth.sources[s].x.values()[7]);
    CHECK(back.sources[s].intensity.values()[3] == sc.truth.sources[s].intensity.values()[3]);
    CHECK(back.sources[s].intensity(100.0) == 0.0);
    CHECK(back.sources[s].x(100.0) == back.sources[s].x.values().back());
  }
  const CsvTable t = read_csv(dir / "m.csv");
  const std::vector<std::string> expected = {"t[time]",      "x_0[length]", "y_0[length]", "q_0[intensity]",
                                             "x_1[length]", "y_1[length]", "q_1[intensity]"};
  CHECK(t.header == expected);
}

TEST_CASE("simulate writes the measurement set") {
  TempDir dir;
  const RunConfig clean = parse_run_config({{"schema_version", 1}, {"scenario", "case1"}, {"seed", 3}});
  cmd_simulate(clean, dir.path);
  const FieldMatrix f = read_field(dir / "field_clean.csv");
  CHECK(f.rows() == 424);
  CHECK(f.cols() == static_cast<Eigen::Index>(kDefaultTimeCount));
  CHECK(read_sensor_positions(dir / "sensors.csv").size() == 424);
  CHECK(read_times(dir / "times.csv").size() == kDefaultTimeCount);
  CHECK_FALSE(fs::exists(dir / "field_noisy.csv"));
  const json manifest = read_json(dir / "manifest.json");
  CHECK(manifest.at("scenario") == "case1");
  CHECK(manifest.at("format_version") == kArtifactFormatVersion);
  CHECK(manifest.at("n_sensors") == 424);

  const std::string first = slurp(dir / "field_clean.csv");
  cmd_simulate(clean, dir.path);
  CHECK(slurp(dir / "field_clean.csv") == first);

  json noisy_doc = clean.document;
  noisy_doc["noise_alpha"] = 0.05;
  const RunConfig noisy = parse_run_config(noisy_doc);
  cmd_simulate(noisy, dir.path);
  REQUIRE(fs::exists(dir / "field_noisy.csv"));
  const std::string noisy_bytes = slurp(dir / "field_noisy.csv");
  CHECK(slurp(dir / "field_clean.csv") == first);
  CHECK(noisy_bytes != first);
  cmd_simulate(noisy, dir.path);
  CHECK(slurp(dir / "field_noisy.csv") == noisy_bytes);
  // Going back to clean data removes the stale noisy file.
  cmd_simulate(clean, dir.path);
  CHECK_FALSE(fs::exists(dir / "field_noisy.csv"));

  const MeasurementArtifact art = load_measurements(dir.path);
  CHECK(art.data.sensors->radius == 3.0);
  CHECK(art.data.sensors->region == SensorRegion::Hemisphere);
  CHECK(art.truth.has_value());
}

TEST_CASE("a one-sample chain returns the prior draw in every summary") {
  TempDir data, out;
  json doc = small_config();
  doc["chains"] = 1;
  doc["samples"] = 1;
  doc["thinning"] = 1;
  doc["sample_export_every"] = 1;
  const RunConfig cfg = parse_run_config(doc);
  cmd_simulate(cfg, data.path);
  const ReconstructResult r = cmd_reconstruct(cfg, data.path, out.path);
  REQUIRE(r.complete);
  REQUIRE(r.chains.size() == 1);
  CHECK(r.chains[0].samples() == 1);
  CHECK(r.chains[0].accepted.empty());

  const std::string mean = slurp(out / "posterior_mean.csv");
  CHECK(slurp(out / "posterior_mode.csv") == mean);
  CHECK(slurp(out / "average_mode.csv") == mean);

  const LatentPriors priors = build_latent_priors(cfg.build_scenario());
  const SourceModel draw = realize_model(priors, r.chains[0].snapshots.front());
  const SourceModel stored = read_source_model(out / "posterior_mean.csv");
  for (std::size_t j = 0; j < draw.sources[0].grid().size(); ++j) {
    CHECK(stored.sources[0].x.values()[j] == draw.sources[0].x.values()[j]);
    CHECK(stored.sources[0].intensity.values()[j] == draw.sources[0].intensity.values()[j]);
  }
  const CsvTable samples = read_csv(out / "samples_chain0.csv");
  CHECK(samples.rows.size() == 20);
  CHECK(samples.rows[5][2] == draw.sources[0].x.values()[5]);
  const CsvTable trace = read_csv(out / "trace_chain0.csv");
  REQUIRE(trace.rows.size() == 1);
  CHECK(trace.rows[0][2] == 0.0);
  const json diag = read_json(out / "diagnostics.json");
  CHECK(diag.at("r_hat_log_likelihood").is_null());
}

TEST_CASE("stop and resume reproduces an uninterrupted run") {
  TempDir data, full, staged;
  const RunConfig cfg = parse_run_config(small_config(0.02));
  cmd_simulate(cfg, data.path);
  const ReconstructResult a = cmd_reconstruct(cfg, data.path, full.path);
  REQUIRE(a.complete);

  const ReconstructResult part = cmd_reconstruct(cfg, data.path, staged.path, {false, 25});
  CHECK_FALSE(part.complete);
  CHECK(part.chains[0].samples() == 25);
  CHECK_FALSE(fs::exists(staged / "posterior_mean.csv"));
  const ReconstructResult b = cmd_reconstruct(cfg, data.path, staged.path, {true, 0});
  REQUIRE(b.complete);

  for (const char* name : {"posterior_mean.csv", "posterior_mode.csv", "average_mode.csv", "trace_chain0.csv",
                           "trace_chain1.csv", "samples_chain1.csv", "field.csv"}) {
    CAPTURE(name);
    CHECK(slurp(full / name) == slurp(staged / name));
  }
  CHECK(a.diagnostics == b.diagnostics);
  CHECK(a.diagnostics.at("r_hat_log_likelihood").is_number());
}

TEST_CASE("chain results do not depend on the thread count") {
  TempDir data, one, two;
  const RunConfig cfg = parse_run_config(small_config());
  cmd_simulate(cfg, data.path);
  cmd_reconstruct(cfg, data.path, one.path, {false, 0, 1});
  cmd_reconstruct(cfg, data.path, two.path, {false, 0, 2});
  for (const char* name : {"posterior_mean.csv", "trace_chain0.csv", "trace_chain1.csv", "diagnostics.json"}) {
    CAPTURE(name);
    CHECK(slurp(one / name) == slurp(two / name));
  }
}

TEST_CASE("resume rejects checkpoints from another configuration") {
  TempDir data, out;
  const RunConfig cfg = parse_run_config(small_config());
  cmd_simulate(cfg, data.path);
  cmd_reconstruct(cfg, data.path, out.path, {false, 10});
  json other = small_config();
  other["seed"] = 12;
  CHECK_THROWS_AS(cmd_reconstruct(parse_run_config(other), data.path, out.path, {true, 0}), ValidationError);
  std::ofstream(out / "chain_0.ckpt", std::ios::binary | std::ios::trunc) << "garbage";
  CHECK_THROWS_AS(cmd_reconstruct(cfg, data.path, out.path, {true, 0}), CheckpointError);
}

TEST_CASE("reconstruct rejects data from another setup") {
  TempDir data, out;
  cmd_simulate(parse_run_config(small_config()), data.path);
  json other = small_config();
  other["overrides"]["n_sensors"] = 31;
  CHECK_THROWS_AS(cmd_reconstruct(parse_run_config(other), data.path, out.path), ValidationError);
  other = small_config();
  other["overrides"]["c"] = 2.0;
  CHECK_THROWS_AS(cmd_reconstruct(parse_run_config(other), data.path, out.path), ValidationError);
  other = small_config();
  other["scenario"] = "case1";
  CHECK_THROWS_AS(cmd_reconstruct(parse_run_config(other), data.path, out.path), ValidationError);
}

TEST_CASE("evaluate reports every summary present") {
  TempDir data, out, reports;
  const RunConfig cfg = parse_run_config(small_config());
  cmd_simulate(cfg, data.path);
  const ReconstructResult r = cmd_reconstruct(cfg, data.path, out.path);
  write_config(reports / "cfg.json", cfg.document);

  const EvaluationReport report = cmd_evaluate(out.path, (reports / "cfg.json").string(), reports / "r.json");
  CHECK(report.has_truth);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].estimator == "posterior_mean");
  CHECK(report.rows[1].estimator == "posterior_mode");
  CHECK(report.rows[2].estimator == "average_mode");
  for (const auto& row : report.rows) {
    CHECK(row.trajectory_error.has_value());
    CHECK(row.intensity_error.has_value());
  }
  // Same numbers as the diagnostics written by reconstruct.
  CHECK(report.rows[0].trajectory_error.value() ==
        r.diagnostics.at("metrics").at("posterior_mean").at("trajectory_error").get<double>());
  CHECK(read_json(reports / "r.json").at("rows").size() == 3);
  CHECK(report.table().find("trajectory error") != std::string::npos);

  // Truth as the estimate gives an all-zero row.
  fs::copy_file(out / "truth.csv", out / "posterior_mean.csv", fs::copy_options::overwrite_existing);
  const EvaluationReport exact = cmd_evaluate(out.path, (reports / "cfg.json").string(), reports / "r2.json");
  CHECK(exact.rows[0].wavefield_error == 0.0);
  CHECK(exact.rows[0].trajectory_error.value() == 0.0);
  CHECK(exact.rows[0].intensity_error.value() == 0.0);

  // Without truth only the wavefield residual remains.
  fs::remove(out / "truth.csv");
  fs::remove(out / "average_mode.csv");
  const EvaluationReport blind = cmd_evaluate(out.path, (reports / "cfg.json").string(), reports / "r3.json");
  CHECK_FALSE(blind.has_truth);
  REQUIRE(blind.rows.size() == 2);
  CHECK_FALSE(blind.rows[1].trajectory_error.has_value());
  CHECK_FALSE(blind.rows[1].intensity_error.has_value());
  CHECK(blind.table().find("trajectory error") == std::string::npos);
  CHECK_FALSE(read_json(reports / "r3.json").at("rows")[0].contains("trajectory_error"));
}

TEST_CASE("evaluate rejects mismatched grids and scenarios") {
  TempDir data, out, reports;
  const RunConfig cfg = parse_run_config(small_config());
  cmd_simulate(cfg, data.path);
  cmd_reconstruct(cfg, data.path, out.path);
  write_config(reports / "cfg.json", cfg.document);
  CHECK_THROWS_AS(cmd_evaluate(out.path, "case1", reports / "r.json"), ValidationError);

  const Scenario four = build_case(4);
  write_source_model(out / "posterior_mode.csv", four.truth);
  CHECK_THROWS_AS(cmd_evaluate(out.path, (reports / "cfg.json").string(), reports / "r.json"), ValidationError);

  TempDir empty;
  fs::copy(out.path, empty.path, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  for (const char* name : {"posterior_mean.csv", "posterior_mode.csv", "average_mode.csv"}) fs::remove(empty / name);
  CHECK_THROWS_AS(cmd_evaluate(empty.path, (reports / "cfg.json").string(), reports / "r.json"), ValidationError);
}

TEST_CASE("every built-in case runs end to end") {
  for (int id = 1; id <= 4; ++id) {
    CAPTURE(id);
    TempDir data, out, reports;
    json doc = small_config(0.05);
    doc["scenario"] = "case" + std::to_string(id);
    doc["samples"] = 20;
    if (id == 3) doc["closed_curve"] = true;
    const RunConfig cfg = parse_run_config(doc);
    cmd_simulate(cfg, data.path);
    REQUIRE(cmd_reconstruct(cfg, data.path, out.path).complete);
    write_config(reports / "cfg.json", cfg.document);
    const EvaluationReport report = cmd_evaluate(out.path, (reports / "cfg.json").string(), reports / "r.json");
    CHECK(report.rows.size() == 3);
    for (const auto& row : report.rows) CHECK(std::isfinite(row.wavefield_error));
  }
}

TEST_CASE("command line exit codes") {
  TempDir dir;
  write_config(dir / "good.json", small_config());
  json bad = small_config();
  bad["schema_version"] = 9;
  write_config(dir / "bad.json", bad);
  std::ofstream(dir / "broken.json") << "{ not json";

  const std::string data = (dir / "data").string();
  const std::string out = (dir / "out").string();
  CHECK(run_cli("simulate --config " + (dir / "good.json").string() + " --out " + data) == 0);
  CHECK(run_cli("reconstruct --config " + (dir / "good.json").string() + " --data " + data + " --out " + out) == 0);
  CHECK(run_cli("evaluate --summaries " + out + " --scenario case2 --out " + (dir / "r.json").string()) == 0);
  CHECK(fs::exists(dir / "r.json"));

  CHECK(run_cli("simulate --config " + (dir / "bad.json").string() + " --out " + data) == 1);
  CHECK(run_cli("simulate --config " + (dir / "broken.json").string() + " --out " + data) == 1);
  CHECK(run_cli("simulate --config " + (dir / "good.json").string()) == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("evaluate --summaries " + out + " --scenario case1 --out " + (dir / "r.json").string()) == 1);

  // An unreadable measurement file is a runtime failure.
  std::ofstream(fs::path(data) / "field_clean.csv", std::ios::trunc) << "sensor,u_0[field]\n0,abc\n";
  CHECK(run_cli("reconstruct --config " + (dir / "good.json").string() + " --data " + data + " --out " + out) == 2);
}
