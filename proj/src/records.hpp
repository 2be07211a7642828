#pragma once

#include "metrics.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pmbm {

/// One detection line: a 3D box with confidence, tracked as a 2D point.
struct DetectionRecord {
    std::int64_t frame = 0;
    double timestamp = 0.0;
    std::string klass;  // serialized as "class"
    std::array<double, 3> center{{0.0, 0.0, 0.0}};
    std::array<double, 3> size{{0.0, 0.0, 0.0}};
    double yaw = 0.0;
    double score = 0.0;
};

/// One tracker-output line: a detection plus identity, existence, and the
/// estimated planar velocity.
struct TrackRecord {
    DetectionRecord det;
    std::int64_t track_id = 0;
    double existence = 0.0;
    std::array<double, 2> velocity{{0.0, 0.0}};
};

/// Planar rigid transform applied to detections at ingestion.
struct Se2Pose {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;
};

/// Read a JSON-lines detection file, grouped by frame (order preserved).
/// Malformed lines, invariant violations, and non-monotone frame indices
/// are reported with their line number.
std::vector<std::vector<DetectionRecord>> read_detections(const std::string& path);

std::vector<TrackRecord> read_tracks(const std::string& path);

/// Whole-file atomic writes (temp file + rename), one record per line.
void write_detections(const std::string& path, const std::vector<DetectionRecord>& records);
void write_tracks(const std::string& path, const std::vector<TrackRecord>& records);
void write_text_atomic(const std::string& path, const std::string& content);

/// Frame-indexed ego poses; every frame used at ingestion must be covered.
std::map<std::int64_t, Se2Pose> read_poses(const std::string& path);

/// Rotate/translate a detection's center and yaw by the frame's pose.
DetectionRecord apply_pose(const DetectionRecord& det, const Se2Pose& pose);

/// View track records as per-frame annotated objects for evaluation
/// (object id = track_id, position = planar center).
std::vector<AnnotatedFrame> tracks_to_frames(const std::vector<TrackRecord>& records);

}  // namespace pmbm
