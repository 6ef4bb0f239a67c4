#include "movsrc/artifacts.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace movsrc {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot read " + path.string());
  return in;
}

void write_row(std::ostream& out, std::span<const double> row) {
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j) out << ',';
    out << format_double(row[j]);
  }
  out << '\n';
}

void write_header(std::ostream& out, const std::vector<std::string>& header) {
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
}

double parse_double(std::string_view field, const fs::path& path, std::size_t line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\r' || field.back() == '\t')) field.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ArtifactError(path.string() + ":" + std::to_string(line) + ": not a number '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

void expect_columns(const CsvTable& table, std::size_t columns, const fs::path& path) {
  if (table.header.size() != columns) {
    throw ArtifactError(path.string() + ": expected " + std::to_string(columns) + " columns, found " +
                        std::to_string(table.header.size()));
  }
}

std::vector<std::string> function_columns(std::size_t sources) {
  std::vector<std::string> cols;
  for (std::size_t s = 0; s < sources; ++s) {
    const std::string k = std::to_string(s);
    cols.push_back("x_" + k + "[length]");
    cols.push_back("y_" + k + "[length]");
    cols.push_back("q_" + k + "[intensity]");
  }
  return cols;
}

void append_model_values(std::vector<double>& row, const SourceModel& model, std::size_t node) {
  for (const Source& src : model.sources) {
    row.push_back(src.x.values()[node]);
    row.push_back(src.y.values()[node]);
    row.push_back(src.intensity.values()[node]);
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw ArtifactError("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_out(path);
  write_header(out, header);
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw ArtifactError("write_csv: row width differs from header in " + path.string());
    write_row(out, row);
  }
  if (!out) throw ArtifactError("write failed: " + path.string());
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ArtifactError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  for (std::string_view name : split(line)) table.header.emplace_back(name);
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != table.header.size()) {
      throw ArtifactError(path.string() + ":" + std::to_string(number) + ": expected " +
                          std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::string_view f : fields) row.push_back(parse_double(f, path, number));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_sensors(const fs::path& path, const SensorArray& sensors) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const Point3& p = sensors.positions[i];
    rows.push_back({static_cast<double>(i), p.x(), p.y(), p.z()});
  }
  write_csv(path, {"sensor", "x[length]", "y[length]", "z[length]"}, rows);
}

std::vector<Point3> read_sensor_positions(const fs::path& path) {
  const CsvTable table = read_csv(path);
  expect_columns(table, 4, path);
  std::vector<Point3> out;
  for (const auto& row : table.rows) out.emplace_back(row[1], row[2], row[3]);
  return out;
}

void write_times(const fs::path& path, std::span<const double> times) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < times.size(); ++k) rows.push_back({static_cast<double>(k), times[k]});
  write_csv(path, {"index", "t[time]"}, rows);
}

std::vector<double> read_times(const fs::path& path) {
  const CsvTable table = read_csv(path);
  expect_columns(table, 2, path);
  std::vector<double> out;
  for (const auto& row : table.rows) out.push_back(row[1]);
  return out;
}

void write_field(const fs::path& path, const FieldMatrix& field) {
  std::ofstream out = open_out(path);
  std::vector<std::string> header{"sensor"};
  for (Eigen::Index k = 0; k < field.cols(); ++k) header.push_back("u_" + std::to_string(k) + "[field]");
  write_header(out, header);
  std::vector<double> row(static_cast<std::size_t>(field.cols()) + 1);
  for (Eigen::Index i = 0; i < field.rows(); ++i) {
    row[0] = static_cast<double>(i);
    for (Eigen::Index k = 0; k < field.cols(); ++k) row[static_cast<std::size_t>(k) + 1] = field(i, k);
    write_row(out, row);
  }
  if (!out) throw ArtifactError("write failed: " + path.string());
}

FieldMatrix read_field(const fs::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 2) throw ArtifactError(path.string() + ": field file has no time columns");
  FieldMatrix field(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(table.header.size() - 1));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t k = 1; k < table.header.size(); ++k) {
      field(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k - 1)) = table.rows[i][k];
    }
  }
  return field;
}

std::vector<std::string> source_model_header(std::size_t sources) {
  std::vector<std::string> header{"t[time]"};
  for (auto& c : function_columns(sources)) header.push_back(std::move(c));
  return header;
}

void write_source_model(const fs::path& path, const SourceModel& model) {
  if (model.sources.empty()) throw ArtifactError("write_source_model: model has no sources");
  const auto grid = model.sources.front().grid();
  std::vector<std::vector<double>> rows;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::vector<double> row{grid[j]};
    append_model_values(row, model, j);
    rows.push_back(std::move(row));
  }
  write_csv(path, source_model_header(model.sources.size()), rows);
}

SourceModel read_source_model(const fs::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 4 || (table.header.size() - 1) % 3 != 0) {
    throw ArtifactError(path.string() + ": expected t plus three columns per source");
  }
  if (table.rows.empty()) throw ArtifactError(path.string() + ": no grid rows");
  const std::size_t sources = (table.header.size() - 1) / 3;
  std::vector<double> grid;
  for (const auto& row : table.rows) grid.push_back(row[0]);
  SourceModel model;
  for (std::size_t s = 0; s < sources; ++s) {
    std::vector<double> xs, ys, qs;
    for (const auto& row : table.rows) {
      xs.push_back(row[1 + 3 * s]);
      ys.push_back(row[2 + 3 * s]);
      qs.push_back(row[3 + 3 * s]);
    }
    model.sources.emplace_back(SampledFunction(grid, std::move(xs), Extrapolation::Clamp),
                               SampledFunction(grid, std::move(ys), Extrapolation::Clamp),
                               SampledFunction(grid, std::move(qs), Extrapolation::Zero));
  }
  return model;
}

void write_samples(const fs::path& path, const ChainRecord& record, const LatentPriors& priors,
                   std::size_t every) {
  if (every == 0) throw ArtifactError("write_samples: export interval must be positive");
  std::ofstream out = open_out(path);
  std::vector<std::string> header{"sample[-]", "t[time]"};
  for (auto& c : function_columns(priors.source_count())) header.push_back(std::move(c));
  write_header(out, header);
  const auto& grid = priors.grid();
  std::vector<double> row;
  for (std::size_t n = 0; n < record.snapshots.size(); ++n) {
    const std::size_t index = record.snapshot_index[n];
    if (index % every != 0) continue;
    const SourceModel model = realize_model(priors, record.snapshots[n]);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      row.assign({static_cast<double>(index), grid[j]});
      append_model_values(row, model, j);
      write_row(out, row);
    }
  }
  if (!out) throw ArtifactError("write failed: " + path.string());
}

void write_trace(const fs::path& path, const ChainRecord& record) {
  std::ofstream out = open_out(path);
  write_header(out, {"sample[-]", "log_likelihood[-]", "accepted[-]"});
  for (std::size_t n = 0; n < record.samples(); ++n) {
    // The initial draw was not proposed, so it is reported as not accepted.
    const double accepted = n == 0 ? 0.0 : static_cast<double>(record.accepted[n - 1]);
    const double row[3] = {static_cast<double>(n), record.log_likelihood[n], accepted};
    write_row(out, row);
  }
  if (!out) throw ArtifactError("write failed: " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& document) {
  std::ofstream out = open_out(path);
  out << document.dump(2) << '\n';
  if (!out) throw ArtifactError("write failed: " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArtifactError(path.string() + ": " + e.what());
  }
}

}  // namespace movsrc
