#pragma once

#include "config.hpp"
#include "records.hpp"
#include "report.hpp"

#include <map>
#include <string>
#include <vector>

namespace pmbm {

struct PipelineOptions {
    std::string detections_path;
    std::string config_path;  // empty: built-in defaults
    std::string output_path;
    std::string gt_path;      // empty: skip evaluation
    std::string report_path;  // empty: render the report only in memory
    std::string poses_path;   // empty: detections are already in the global frame
};

struct PipelineResult {
    std::int64_t frames_processed = 0;  // distinct input frames
    std::int64_t records_emitted = 0;
    double mean_frame_seconds = 0.0;  // filter work only, averaged over frames

    bool has_metrics = false;  // true when ground truth was evaluated
    std::map<std::string, MotSummary> per_class;
    MotSummary overall;
    std::string report_text;  // rendered table + timing line
};

/// Run the batch tracker: read detections (applying ego poses when given),
/// filter each class independently (predict -> update -> reduce -> extract
/// per frame, dt taken from timestamp deltas), and atomically write the
/// merged track records. With ground truth, evaluates per class and writes
/// the report when a path is given. Errors carry the frame and stage.
PipelineResult run_pipeline(const PipelineOptions& options);

/// The per-class frame loop on in-memory data; exposed for tests.
std::vector<TrackRecord> track_one_class(const std::vector<std::vector<DetectionRecord>>& frames,
                                         const PipelineConfig& config,
                                         std::int64_t track_id_offset, double* filter_seconds);

}  // namespace pmbm
