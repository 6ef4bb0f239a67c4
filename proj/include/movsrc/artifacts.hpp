#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "movsrc/inference.hpp"
#include "movsrc/wavefield.hpp"

namespace movsrc {

/**
 * On-disk artifacts. Every CSV file has one header line of column names
 * with units in brackets, followed by numeric rows. Model units are
 * dimensionless (c = 1 by default), so the units name the quantity:
 *
 *   sensors.csv          sensor,x[length],y[length],z[length]
 *   times.csv            index,t[time]
 *   field_*.csv          sensor,u_0[field],...,u_{N_t-1}[field]   (column k is time k)
 *   truth.csv, posterior_*.csv, average_mode.csv
 *                        t[time],x_0[length],y_0[length],q_0[intensity],x_1[length],...
 *   samples_chain<k>.csv sample[-],t[time],x_0[length],y_0[length],q_0[intensity],...
 *   trace_chain<k>.csv   sample[-],log_likelihood[-],accepted[-]
 *
 * Doubles are written in shortest round-trip form, so reading a file back
 * reproduces the values bit for bit. Manifests and diagnostics are JSON.
 */
inline constexpr int kArtifactFormatVersion = 1;

class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string format_double(double value);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
/// Parses a numeric CSV; every row must have as many fields as the header.
CsvTable read_csv(const std::filesystem::path& path);

void write_sensors(const std::filesystem::path& path, const SensorArray& sensors);
/// Positions only; radius and region come from the manifest.
std::vector<Point3> read_sensor_positions(const std::filesystem::path& path);

void write_times(const std::filesystem::path& path, std::span<const double> times);
std::vector<double> read_times(const std::filesystem::path& path);

void write_field(const std::filesystem::path& path, const FieldMatrix& field);
FieldMatrix read_field(const std::filesystem::path& path);

std::vector<std::string> source_model_header(std::size_t sources);
void write_source_model(const std::filesystem::path& path, const SourceModel& model);
/// Trajectories clamp and intensities vanish outside the stored grid.
SourceModel read_source_model(const std::filesystem::path& path);

/// Realized snapshots whose sample index is a multiple of every.
void write_samples(const std::filesystem::path& path, const ChainRecord& record,
                   const LatentPriors& priors, std::size_t every);
void write_trace(const std::filesystem::path& path, const ChainRecord& record);

void write_json(const std::filesystem::path& path, const nlohmann::json& document);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace movsrc
