#pragma once

#include "pmbm_filter.hpp"
#include "scenario.hpp"

#include <map>
#include <string>

namespace pmbm {

/// Everything the batch pipeline needs: filter parameters, the birth-grid
/// layout that seeds the undetected-object intensity, timing defaults, and
/// per-class evaluation radii.
struct PipelineConfig {
    FilterParams filter;
    double default_dt = 0.1;  // used when timestamps are absent or non-increasing
    bool parallel_classes = false;

    // Surveillance area covered by a uniform grid of birth components.
    double area_min_x = -100.0;
    double area_min_y = -100.0;
    double area_max_x = 100.0;
    double area_max_y = 100.0;
    int birth_grid_n = 8;            // grid is n x n
    double birth_total_rate = 2.0;   // expected new objects per frame, spread over the grid
    double birth_position_std = 15.0;
    double birth_velocity_std = 5.0;

    std::map<std::string, double> class_radii = {{"vehicle", 2.0}, {"pedestrian", 1.0}};
};

/// Zero-velocity birth components on a uniform grid over the configured
/// area, each carrying an equal share of the total birth rate.
std::vector<PoissonComponent> build_birth_components(const PipelineConfig& config);

/// Parse a flat key-value JSON document onto PipelineConfig. Unknown keys
/// are an error (they are almost always typos). Keys mirror the struct and
/// FilterParams field names; "measurement_noise_std" sets an isotropic R;
/// "radius_<class>" sets a per-class match radius.
PipelineConfig parse_pipeline_config(const std::string& text, const std::string& source_name);
PipelineConfig load_pipeline_config(const std::string& path);

/// Same flat-document convention for scenario generation.
ScenarioConfig parse_scenario_config(const std::string& text, const std::string& source_name);
ScenarioConfig load_scenario_config(const std::string& path);

}  // namespace pmbm
