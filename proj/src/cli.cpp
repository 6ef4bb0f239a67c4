#include "movsrc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "movsrc/artifacts.hpp"
#include "movsrc/checkpoint.hpp"
#include "movsrc/metrics.hpp"

namespace movsrc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kTopLevelKeys = {
    "schema_version", "scenario",     "overrides", "chains",   "samples",
    "burn_in_fraction", "delta",      "beta",      "seed",     "noise_alpha",
    "thinning",       "closed_curve", "checkpoint_interval",   "sample_export_every",
    "output_dir"};

const std::set<std::string> kOverrideKeys = {"c",     "T",     "T0",      "radius",  "kappa",    "ell",
                                             "kappa_p", "ell_p", "kappa_q", "ell_q", "velocity", "n_sensors",
                                             "n_times", "latent_size", "region"};

void reject_unknown(const json& object, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (!allowed.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& object, const std::string& key, const std::string& where) {
  const json& v = object.at(key);
  if (!v.is_number()) throw ValidationError(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(where + "." + key + " must be finite");
  return x;
}

std::uint64_t get_count(const json& object, const std::string& key, const std::string& where) {
  const json& v = object.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) throw ValidationError(where + "." + key + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::optional<double> opt_number(const json& object, const std::string& key, const std::string& where) {
  if (!object.contains(key)) return std::nullopt;
  return get_number(object, key, where);
}

std::optional<std::size_t> opt_count(const json& object, const std::string& key, const std::string& where) {
  if (!object.contains(key)) return std::nullopt;
  return static_cast<std::size_t>(get_count(object, key, where));
}

CaseOverrides parse_overrides(const json& o) {
  const std::string where = "overrides";
  if (!o.is_object()) throw ValidationError("overrides must be an object");
  reject_unknown(o, kOverrideKeys, where);
  CaseOverrides ov;
  ov.c = opt_number(o, "c", where);
  ov.T = opt_number(o, "T", where);
  ov.T0 = opt_number(o, "T0", where);
  ov.radius = opt_number(o, "radius", where);
  ov.kappa = opt_number(o, "kappa", where);
  ov.ell = opt_number(o, "ell", where);
  ov.kappa_p = opt_number(o, "kappa_p", where);
  ov.ell_p = opt_number(o, "ell_p", where);
  ov.kappa_q = opt_number(o, "kappa_q", where);
  ov.ell_q = opt_number(o, "ell_q", where);
  ov.n_sensors = opt_count(o, "n_sensors", where);
  ov.n_times = opt_count(o, "n_times", where);
  ov.latent_size = opt_count(o, "latent_size", where);
  for (const auto& v : {ov.kappa, ov.ell, ov.kappa_p, ov.ell_p, ov.kappa_q, ov.ell_q, ov.radius}) {
    if (v && !(*v > 0.0)) throw ValidationError("overrides: kernel parameters and radius must be positive");
  }
  if (ov.n_sensors && *ov.n_sensors < 1) throw ValidationError("overrides.n_sensors must be at least 1");
  if (ov.n_times && *ov.n_times < 2) throw ValidationError("overrides.n_times must be at least 2");
  if (o.contains("velocity")) {
    const json& v = o.at("velocity");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ValidationError("overrides.velocity must be a two-element number array");
    }
    ov.velocity = std::array<double, 2>{v[0].get<double>(), v[1].get<double>()};
  }
  if (o.contains("region")) {
    if (!o.at("region").is_string()) throw ValidationError("overrides.region must be a string");
    try {
      ov.region = sensor_region_from_string(o.at("region").get<std::string>());
    } catch (const std::exception& e) {
      throw ValidationError(std::string("overrides.region: ") + e.what());
    }
    if (*ov.region == SensorRegion::Custom) throw ValidationError("overrides.region: custom regions cannot be generated");
  }
  return ov;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, value);
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

fs::path field_file(const fs::path& dir) {
  for (const char* name : {"field.csv", "field_noisy.csv", "field_clean.csv"}) {
    if (fs::exists(dir / name)) return dir / name;
  }
  throw ArtifactError("no field file (field.csv, field_noisy.csv or field_clean.csv) in " + dir.string());
}

MeasurementSet read_measurement_files(const fs::path& dir) {
  MeasurementSet data;
  auto sensors = std::make_shared<SensorArray>();
  sensors->positions = read_sensor_positions(dir / "sensors.csv");
  data.times = read_times(dir / "times.csv");
  data.field = read_field(field_file(dir));
  if (static_cast<std::size_t>(data.field.rows()) != sensors->size() ||
      static_cast<std::size_t>(data.field.cols()) != data.times.size()) {
    throw ArtifactError("field matrix in " + dir.string() + " does not match sensors.csv x times.csv");
  }
  data.sensors = std::move(sensors);
  return data;
}

void require_match(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("measurement manifest does not match the config: " + what);
}

void check_manifest(const json& m, const Scenario& sc, const MeasurementSet& data) {
  try {
    require_match(m.at("scenario").get<std::string>() == sc.name, "scenario");
    require_match(m.at("n_sensors").get<std::size_t>() == sc.sensors.size(), "sensor count");
    require_match(m.at("n_times").get<std::size_t>() == sc.times.size(), "measurement count");
    require_match(m.at("c").get<double>() == sc.cfg.c, "wave speed");
    require_match(m.at("T").get<double>() == sc.cfg.T, "T");
    require_match(m.at("T0").get<double>() == sc.cfg.T0, "T0");
    require_match(m.at("radius").get<double>() == sc.sensors.radius, "radius");
    require_match(m.at("region").get<std::string>() == to_string(sc.sensors.region), "region");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("measurement manifest is incomplete: ") + e.what());
  }
  for (std::size_t i = 0; i < sc.sensors.size(); ++i) {
    require_match((data.sensors->positions[i] - sc.sensors.positions[i]).norm() <= 1e-9 * sc.sensors.radius,
                  "sensor positions");
  }
}

void check_checkpoint(const ChainRecord& rec, const ChainOptions& opt, const LatentPriors& priors,
                      const fs::path& path) {
  const bool ok = rec.seed == opt.seed && rec.delta == opt.delta && rec.beta == opt.beta &&
                  rec.thinning == opt.thinning && rec.target_samples == opt.n_samples &&
                  rec.current.size() == priors.dimension();
  if (!ok) throw ValidationError("checkpoint " + path.string() + " was written with a different config");
}

json estimator_metrics(const SourceModel& estimate, const MeasurementSet& data, const Scenario& sc,
                       const std::optional<SourceModel>& truth) {
  json m;
  m["wavefield_error"] = wavefield_error(estimate, data, sc.cfg);
  if (truth) {
    const auto grid = sc.latent_grid();
    m["trajectory_error"] = trajectory_error(estimate, *truth, grid);
    m["intensity_error"] = intensity_error(estimate, *truth, grid);
  }
  return m;
}

std::string chain_name(const char* stem, std::size_t k, const char* ext) {
  return std::string(stem) + std::to_string(k) + ext;
}

Scenario scenario_from_argument(const std::string& arg) {
  if (fs::is_regular_file(arg)) return load_run_config(arg).build_scenario();
  try {
    return build_case(arg);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

}  // namespace

// Config ---------------------------------------------------------------------

Scenario RunConfig::build_scenario() const {
  try {
    return build_case(scenario, overrides);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("scenario: ") + e.what());
  }
}

std::uint64_t RunConfig::hash() const {
  json hashed = document;
  hashed.erase("output_dir");
  return fnv1a64(hashed.dump());
}

RunConfig parse_run_config(const json& doc) {
  const std::string where = "config";
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  reject_unknown(doc, kTopLevelKeys, where);
  if (!doc.contains("schema_version")) throw ValidationError("config.schema_version is required");
  if (get_count(doc, "schema_version", where) != static_cast<std::uint64_t>(kConfigSchemaVersion)) {
    throw ValidationError("config.schema_version " + doc.at("schema_version").dump() + " is not supported (expected " +
                          std::to_string(kConfigSchemaVersion) + ")");
  }
  if (!doc.contains("scenario") || !doc.at("scenario").is_string()) {
    throw ValidationError("config.scenario must name a built-in case (case1..case4)");
  }

  RunConfig cfg;
  cfg.scenario = doc.at("scenario").get<std::string>();
  if (doc.contains("overrides")) cfg.overrides = parse_overrides(doc.at("overrides"));
  if (auto v = opt_count(doc, "chains", where)) cfg.chains = *v;
  if (auto v = opt_count(doc, "samples", where)) cfg.samples = *v;
  if (auto v = opt_number(doc, "burn_in_fraction", where)) cfg.burn_in_fraction = *v;
  if (doc.contains("seed")) cfg.seed = get_count(doc, "seed", where);
  if (auto v = opt_count(doc, "thinning", where)) cfg.thinning = *v;
  if (auto v = opt_count(doc, "checkpoint_interval", where)) cfg.checkpoint_interval = *v;
  if (auto v = opt_count(doc, "sample_export_every", where)) cfg.sample_export_every = *v;
  cfg.overrides.delta = opt_number(doc, "delta", where);
  cfg.overrides.beta = opt_number(doc, "beta", where);
  cfg.overrides.noise_alpha = opt_number(doc, "noise_alpha", where);
  if (doc.contains("closed_curve")) {
    if (!doc.at("closed_curve").is_boolean()) throw ValidationError("config.closed_curve must be a boolean");
    cfg.overrides.closed_curve = doc.at("closed_curve").get<bool>();
  }
  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string()) throw ValidationError("config.output_dir must be a string");
    cfg.output_dir = doc.at("output_dir").get<std::string>();
  }

  if (cfg.chains < 1) throw ValidationError("config.chains must be at least 1");
  if (cfg.samples < 1) throw ValidationError("config.samples must be at least 1");
  if (!(cfg.burn_in_fraction >= 0.0 && cfg.burn_in_fraction < 1.0)) {
    throw ValidationError("config.burn_in_fraction must lie in [0, 1)");
  }
  if (cfg.thinning < 1) throw ValidationError("config.thinning must be at least 1");
  if (cfg.sample_export_every < 1 || cfg.sample_export_every % cfg.thinning != 0) {
    throw ValidationError("config.sample_export_every must be a positive multiple of thinning");
  }
  if (cfg.overrides.delta && !(*cfg.overrides.delta > 0.0 && *cfg.overrides.delta <= 0.5)) {
    throw ValidationError("config.delta must lie in (0, 0.5]");
  }
  if (cfg.overrides.beta && !(*cfg.overrides.beta > 0.0)) throw ValidationError("config.beta must be positive");
  if (cfg.overrides.noise_alpha && !(*cfg.overrides.noise_alpha >= 0.0)) {
    throw ValidationError("config.noise_alpha must be non-negative");
  }

  // Builds the scenario once so geometry and truth errors surface before any compute.
  const Scenario sc = cfg.build_scenario();

  json norm = doc;
  norm["scenario"] = sc.name;
  norm["chains"] = cfg.chains;
  norm["samples"] = cfg.samples;
  norm["burn_in_fraction"] = cfg.burn_in_fraction;
  norm["seed"] = cfg.seed;
  norm["thinning"] = cfg.thinning;
  norm["checkpoint_interval"] = cfg.checkpoint_interval;
  norm["sample_export_every"] = cfg.sample_export_every;
  norm["delta"] = sc.hyper.delta;
  norm["beta"] = sc.hyper.beta;
  norm["noise_alpha"] = sc.noise_alpha;
  norm["closed_curve"] = sc.closed_curve;
  if (!norm.contains("overrides")) norm["overrides"] = json::object();
  cfg.document = std::move(norm);
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  json doc;
  try {
    doc = read_json(path);
  } catch (const ArtifactError& e) {
    throw ValidationError(e.what());
  }
  return parse_run_config(doc);
}

// simulate ---------------------------------------------------------------------

void cmd_simulate(const RunConfig& config, const fs::path& out) {
  const Scenario sc = config.build_scenario();
  spdlog::info("simulate {}: {} sensors, {} times", sc.name, sc.sensors.size(), sc.times.size());
  const MeasurementSet clean = simulate_measurements(sc);
  const std::uint64_t noise_seed = derive_seed(config.seed, kNoiseStream);

  fs::create_directories(out);
  write_sensors(out / "sensors.csv", sc.sensors);
  write_times(out / "times.csv", sc.times);
  write_field(out / "field_clean.csv", clean.field);
  json files = {{"sensors", "sensors.csv"}, {"times", "times.csv"}, {"field_clean", "field_clean.csv"},
                {"truth", "truth.csv"}};
  if (sc.noise_alpha > 0.0) {
    write_field(out / "field_noisy.csv", add_noise(clean, sc.noise_alpha, noise_seed).field);
    files["field_noisy"] = "field_noisy.csv";
  } else {
    fs::remove(out / "field_noisy.csv");
  }
  write_source_model(out / "truth.csv", sc.truth);

  json manifest;
  manifest["format_version"] = kArtifactFormatVersion;
  manifest["kind"] = "measurements";
  manifest["scenario"] = sc.name;
  manifest["config_hash"] = hex64(config.hash());
  manifest["seed"] = config.seed;
  manifest["noise_seed"] = noise_seed;
  manifest["noise_alpha"] = sc.noise_alpha;
  manifest["n_sensors"] = sc.sensors.size();
  manifest["n_times"] = sc.times.size();
  manifest["n_sources"] = sc.truth.sources.size();
  manifest["radius"] = sc.sensors.radius;
  manifest["region"] = to_string(sc.sensors.region);
  manifest["c"] = sc.cfg.c;
  manifest["T"] = sc.cfg.T;
  manifest["T0"] = sc.cfg.T0;
  manifest["files"] = files;
  manifest["config"] = config.document;
  manifest["created_utc"] = utc_now();
  write_json(out / "manifest.json", manifest);
}

MeasurementArtifact load_measurements(const fs::path& dir) {
  MeasurementArtifact art;
  art.manifest = read_json(dir / "manifest.json");
  if (art.manifest.value("format_version", -1) != kArtifactFormatVersion) {
    throw ValidationError("measurement manifest in " + dir.string() + " has an unsupported format_version");
  }
  art.data = read_measurement_files(dir);
  auto sensors = std::make_shared<SensorArray>(*art.data.sensors);
  try {
    sensors->radius = art.manifest.at("radius").get<double>();
    sensors->region = sensor_region_from_string(art.manifest.at("region").get<std::string>());
    art.data.noise_alpha = art.manifest.at("noise_alpha").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("measurement manifest is incomplete: ") + e.what());
  }
  art.data.sensors = std::move(sensors);
  if (fs::exists(dir / "truth.csv")) art.truth = read_source_model(dir / "truth.csv");
  return art;
}

// reconstruct ------------------------------------------------------------------

ReconstructResult cmd_reconstruct(const RunConfig& config, const fs::path& data_dir, const fs::path& out,
                                  const ReconstructOptions& options) {
  const Scenario sc = config.build_scenario();
  const MeasurementArtifact art = load_measurements(data_dir);
  check_manifest(art.manifest, sc, art.data);
  const auto data = std::make_shared<const MeasurementSet>(art.data);
  const LatentPriors priors = build_latent_priors(sc);
  fs::create_directories(out);

  auto run_one = [&](std::size_t k) {
    ChainOptions opt;
    opt.n_samples = config.samples;
    opt.delta = sc.hyper.delta;
    opt.beta = sc.hyper.beta;
    opt.seed = derive_seed(config.seed, chain_stream(k));
    opt.thinning = config.thinning;
    opt.burn_in_fraction = config.burn_in_fraction;

    GaussianLikelihood likelihood(data, sc.cfg, sc.hyper.beta);
    const LogLikelihood loglik = [&likelihood](const SourceModel& m) { return likelihood(m); };
    const fs::path ckpt = out / chain_name("chain_", k, ".ckpt");
    ChainControl control;
    control.checkpoint_every = config.checkpoint_interval;
    control.on_checkpoint = [&ckpt](const ChainRecord& r) { save_checkpoint(ckpt, r); };
    control.stop_after = options.stop_after;

    ChainRecord record;
    if (options.resume && fs::exists(ckpt)) {
      record = load_checkpoint(ckpt);
      check_checkpoint(record, opt, priors, ckpt);
      spdlog::info("chain {}: resuming at sample {} of {}", k, record.samples(), record.target_samples);
      if (!record.complete()) continue_chain(record, priors, loglik, control);
    } else {
      record = run_chain(priors, loglik, opt, control);
    }
    save_checkpoint(ckpt, record);
    spdlog::info("chain {}: {} samples, acceptance {:.3f}", k, record.samples(), record.acceptance_ratio());
    return record;
  };

  // Chains share only read-only state and each owns its checkpoint file, so
  // they run on separate threads; results do not depend on the schedule.
  std::vector<ChainRecord> records(config.chains);
  std::vector<std::exception_ptr> errors(config.chains);
  const std::size_t threads = options.threads > 0 ? options.threads : std::thread::hardware_concurrency();
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, config.chains);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < config.chains; k = next++) {
      try {
        records[k] = run_one(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ReconstructResult result;
  result.complete = std::all_of(records.begin(), records.end(), [](const ChainRecord& r) { return r.complete(); });
  result.chains = std::move(records);
  if (!result.complete) {
    spdlog::info("stopped before the target sample count; rerun with --resume to continue");
    return result;
  }

  const std::size_t burn_in = result.chains.front().burn_in;
  const SourceModel mean = posterior_mean(result.chains, priors, burn_in);
  const SourceModel mode = posterior_mode(result.chains, priors, burn_in);
  const SourceModel avg_mode = average_mode(result.chains, priors, burn_in);
  write_source_model(out / "posterior_mean.csv", mean);
  write_source_model(out / "posterior_mode.csv", mode);
  write_source_model(out / "average_mode.csv", avg_mode);

  write_sensors(out / "sensors.csv", *data->sensors);
  write_times(out / "times.csv", data->times);
  write_field(out / "field.csv", data->field);
  write_json(out / "data_manifest.json", art.manifest);
  if (art.truth) {
    write_source_model(out / "truth.csv", *art.truth);
  } else {
    fs::remove(out / "truth.csv");
  }

  json diag;
  diag["format_version"] = kArtifactFormatVersion;
  diag["scenario"] = sc.name;
  diag["config_hash"] = hex64(config.hash());
  diag["seed"] = config.seed;
  diag["samples"] = config.samples;
  diag["burn_in"] = burn_in;
  diag["thinning"] = config.thinning;
  diag["delta"] = sc.hyper.delta;
  diag["beta"] = sc.hyper.beta;
  json chains = json::array();
  std::vector<std::vector<double>> traces;
  for (std::size_t k = 0; k < result.chains.size(); ++k) {
    const ChainRecord& rec = result.chains[k];
    write_trace(out / chain_name("trace_chain", k, ".csv"), rec);
    write_samples(out / chain_name("samples_chain", k, ".csv"), rec, priors, config.sample_export_every);
    json c;
    c["index"] = k;
    c["seed"] = rec.seed;
    c["samples"] = rec.samples();
    c["acceptance_ratio"] = rec.acceptance_ratio();
    c["ess"] = chain_effective_sample_size(rec, burn_in);
    c["final_log_likelihood"] = rec.log_likelihood.back();
    c["posterior_mean"] = estimator_metrics(posterior_mean({&rec, 1}, priors, burn_in), *data, sc, art.truth);
    chains.push_back(std::move(c));
    traces.emplace_back(rec.log_likelihood.begin() + static_cast<std::ptrdiff_t>(burn_in), rec.log_likelihood.end());
  }
  diag["chains"] = std::move(chains);
  const bool finite = std::all_of(traces.begin(), traces.end(), [](const std::vector<double>& t) {
    return std::all_of(t.begin(), t.end(), [](double v) { return std::isfinite(v); });
  });
  if (traces.size() >= 2 && traces.front().size() >= 2 && finite) {
    diag["r_hat_log_likelihood"] = potential_scale_reduction(traces);
  } else {
    diag["r_hat_log_likelihood"] = nullptr;
  }
  diag["metrics"] = {{"posterior_mean", estimator_metrics(mean, *data, sc, art.truth)},
                     {"posterior_mode", estimator_metrics(mode, *data, sc, art.truth)},
                     {"average_mode", estimator_metrics(avg_mode, *data, sc, art.truth)}};
  write_json(out / "diagnostics.json", diag);
  result.diagnostics = std::move(diag);
  return result;
}

// evaluate ---------------------------------------------------------------------

json EvaluationReport::to_json() const {
  json rows_json = json::array();
  for (const EvaluationRow& r : rows) {
    json j;
    j["estimator"] = r.estimator;
    j["wavefield_error"] = r.wavefield_error;
    if (r.trajectory_error) j["trajectory_error"] = *r.trajectory_error;
    if (r.intensity_error) j["intensity_error"] = *r.intensity_error;
    rows_json.push_back(std::move(j));
  }
  return {{"format_version", kArtifactFormatVersion}, {"scenario", scenario}, {"has_truth", has_truth},
          {"rows", rows_json}};
}

std::string EvaluationReport::table() const {
  std::ostringstream out;
  const auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", *v);
    return std::string(buf);
  };
  out << std::left << std::setw(18) << "";
  for (const EvaluationRow& r : rows) out << std::setw(16) << r.estimator;
  out << '\n';
  out << std::setw(18) << "wavefield error";
  for (const EvaluationRow& r : rows) out << std::setw(16) << cell(r.wavefield_error);
  out << '\n';
  if (has_truth) {
    out << std::setw(18) << "trajectory error";
    for (const EvaluationRow& r : rows) out << std::setw(16) << cell(r.trajectory_error);
    out << '\n';
    out << std::setw(18) << "intensity error";
    for (const EvaluationRow& r : rows) out << std::setw(16) << cell(r.intensity_error);
    out << '\n';
  }
  return out.str();
}

EvaluationReport cmd_evaluate(const fs::path& summaries, const std::string& scenario, const fs::path& out) {
  const Scenario sc = scenario_from_argument(scenario);
  if (fs::exists(summaries / "data_manifest.json")) {
    const json manifest = read_json(summaries / "data_manifest.json");
    if (manifest.value("scenario", sc.name) != sc.name) {
      throw ValidationError("summaries in " + summaries.string() + " belong to " +
                            manifest.value("scenario", std::string()) + ", not " + sc.name);
    }
  }
  MeasurementSet data = read_measurement_files(summaries);
  std::optional<SourceModel> truth;
  if (fs::exists(summaries / "truth.csv")) truth = read_source_model(summaries / "truth.csv");

  EvaluationReport report;
  report.scenario = sc.name;
  report.has_truth = truth.has_value();
  for (const char* name : {"posterior_mean", "posterior_mode", "average_mode"}) {
    const fs::path file = summaries / (std::string(name) + ".csv");
    if (!fs::exists(file)) continue;
    const SourceModel estimate = read_source_model(file);
    const auto grid = estimate.sources.front().grid();
    const double tol = 1e-9 * std::max(1.0, sc.cfg.T0);
    if (std::abs(grid.front()) > tol || std::abs(grid.back() - sc.cfg.T0) > tol) {
      throw ValidationError(file.string() + ": grid mismatch, summary grid does not span [0, T0] of " + sc.name);
    }
    if (estimate.sources.size() != sc.formulas.size()) {
      throw ValidationError(file.string() + ": grid mismatch, source count differs from " + sc.name);
    }
    EvaluationRow row;
    row.estimator = name;
    row.wavefield_error = wavefield_error(estimate, data, sc.cfg);
    if (truth) {
      try {
        row.trajectory_error = trajectory_error(estimate, *truth, grid);
        row.intensity_error = intensity_error(estimate, *truth, grid);
      } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("grid mismatch: ") + e.what());
      }
    }
    report.rows.push_back(std::move(row));
  }
  if (report.rows.empty()) throw ValidationError("no posterior summaries found in " + summaries.string());
  write_json(out, report.to_json());
  return report;
}

}  // namespace movsrc
