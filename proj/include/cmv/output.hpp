#pragma once

// CSV time series, JSON metadata sidecar and final-state dumps.

#include "cmv/scenario.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace cmv {

/// Header `t_day,segment,a_cm,h_cm,lambda_theta,J,p_dyn_cm2,wss_dyn_cm2,
/// sigma_inv_kPa,rho_R_<name>...,upsilon_<name>...,iters`.
std::vector<std::string> timeseries_header(const std::vector<std::string>& constituents);

class TimeSeriesWriter {
public:
    /// Throws IoError when the file cannot be created.
    TimeSeriesWriter(const std::string& path, std::vector<std::string> constituents);

    /// One row per segment at the vessel's current time.
    void write(const Vessel& v, int iterations);
    std::size_t rows() const { return rows_; }

private:
    std::string path_;
    std::vector<std::string> names_;
    std::ofstream out_;
    std::size_t rows_ = 0;
};

/// Writes `json` to `path` (pretty-printed); throws IoError.
void write_json(const std::string& path, const nlohmann::json& j);

nlohmann::json metadata(const ScenarioConfig& sc, const SimulationResult& result, double wall_seconds);

/// Full G&R history of a vessel (cohorts, deviations, targets and status).
nlohmann::json state_to_json(const Vessel& v);
/// Restores a history written by state_to_json into a vessel assembled from
/// the same configuration. Throws ConfigError on a mismatch.
void state_from_json(const nlohmann::json& j, Vessel& v);

} // namespace cmv
