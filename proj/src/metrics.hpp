#pragma once

#include "state_models.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pmbm {

struct AnnotatedObject {
    std::int64_t id = 0;
    Vec2 position = Vec2::Zero();
    std::string klass;
};

/// One frame of either ground truth or tracker output.
struct AnnotatedFrame {
    std::int64_t frame = 0;
    std::vector<AnnotatedObject> objects;
};

struct MotSummary {
    double mota = 1.0;  // 1 - (fp + misses + id_switches) / gt_count; 1 when gt_count = 0
    double motp = 0.0;  // mean matched center distance (m); 0 when nothing matched
    std::int64_t false_positives = 0;
    std::int64_t misses = 0;
    std::int64_t id_switches = 0;
    std::int64_t fragmentations = 0;
    std::int64_t gt_count = 0;
};

/// CLEAR-MOT over aligned sequences. Frames are joined on their index (a
/// frame absent from one side counts as empty there); correspondences from
/// the previous frame are kept while still within match_radius, remaining
/// pairs are matched by minimum total center distance. An id switch is
/// counted when a ground-truth object is matched to a different track id
/// than its last known one; a fragmentation when its tracked status resumes
/// after an interruption.
MotSummary evaluate_sequence(const std::vector<AnnotatedFrame>& gt,
                             const std::vector<AnnotatedFrame>& tracks, double match_radius);

/// Splits both sequences by class label and evaluates each class with its
/// own radius. Throws if a class present in the data has no radius.
std::map<std::string, MotSummary> evaluate_per_class(
    const std::vector<AnnotatedFrame>& gt, const std::vector<AnnotatedFrame>& tracks,
    const std::map<std::string, double>& radii);

}  // namespace pmbm
