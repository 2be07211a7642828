#pragma once

#include "metrics.hpp"
#include "records.hpp"
#include "state_models.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pmbm {

/// Confidence-score distributions for true detections and clutter; samples
/// are clamped to [0, 1].
struct ScoreModel {
    double true_mean = 0.8;
    double true_std = 0.1;
    double clutter_mean = 0.3;
    double clutter_std = 0.1;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    double area_min_x = -50.0;
    double area_min_y = -50.0;
    double area_max_x = 50.0;
    double area_max_y = 50.0;
    std::int64_t n_frames = 100;
    double dt = 0.1;

    int n_initial = 0;           // objects alive at frame 0
    double birth_rate = 0.0;     // Poisson births per frame
    double mean_lifetime = 1e9;  // frames, >= 1; effectively immortal by default
    double speed_min = 0.0;      // m/s
    double speed_max = 10.0;

    double detection_prob = 0.9;
    double position_noise_std = 0.1;  // m, isotropic
    double clutter_rate = 0.0;        // Poisson false alarms per frame
    ScoreModel score;
    std::string class_name = "vehicle";
};

struct SimDetection {
    Measurement z;
    double score = 0.0;
    std::string klass;
};

struct ScenarioOutput {
    std::vector<AnnotatedFrame> gt;                     // one entry per frame
    std::vector<std::vector<SimDetection>> detections;  // parallel to gt
    std::vector<double> timestamps;                     // frame * dt
};

/// Realize a synthetic world: constant-velocity objects with Poisson
/// births, geometric lifetimes, per-object detection dropouts, Gaussian
/// position noise, and uniform clutter. Fully determined by the seed; every
/// (frame, object) pair draws from its own counter-keyed stream, so adding
/// objects or frames never disturbs existing ones.
ScenarioOutput generate(const ScenarioConfig& config);

/// File-record views of a realized scenario: detections in draw order, and
/// ground truth as unit-existence track records (box geometry is nominal —
/// the simulation is planar).
std::vector<DetectionRecord> scenario_detection_records(const ScenarioOutput& output);
std::vector<TrackRecord> scenario_gt_records(const ScenarioOutput& output);

}  // namespace pmbm
