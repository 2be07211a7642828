#include "metrics.hpp"

#include "assignment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace pmbm {

namespace {

// Cost of leaving a ground-truth object unmatched in the per-frame
// assignment. Large enough that real matches (bounded by the radius) are
// always preferred, small enough to stay finite for the solver.
constexpr double kUnmatchedCost = 1e6;

void check_frames(const std::vector<AnnotatedFrame>& frames, const char* label) {
    for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
        if (frames[i + 1].frame <= frames[i].frame) {
            throw std::invalid_argument(std::string(label) + " frames not strictly increasing at " +
                                        std::to_string(frames[i + 1].frame));
        }
    }
    for (const auto& f : frames) {
        std::set<std::int64_t> ids;
        for (const auto& o : f.objects) {
            if (!ids.insert(o.id).second) {
                throw std::invalid_argument(std::string(label) + " frame " +
                                            std::to_string(f.frame) + " repeats object id " +
                                            std::to_string(o.id));
            }
        }
    }
}

/// Per ground-truth-object tracking memory.
struct GtMemory {
    std::int64_t last_track_id = 0;
    bool ever_matched = false;
    bool interrupted = false;  // was tracked, currently lost
};

std::vector<const AnnotatedObject*> sorted_by_id(const std::vector<AnnotatedObject>& objs) {
    std::vector<const AnnotatedObject*> out;
    out.reserve(objs.size());
    for (const auto& o : objs) out.push_back(&o);
    std::sort(out.begin(), out.end(),
              [](const AnnotatedObject* a, const AnnotatedObject* b) { return a->id < b->id; });
    return out;
}

double distance(const AnnotatedObject& a, const AnnotatedObject& b) {
    return (a.position - b.position).norm();
}

}  // namespace

MotSummary evaluate_sequence(const std::vector<AnnotatedFrame>& gt,
                             const std::vector<AnnotatedFrame>& tracks, double match_radius) {
    if (!(match_radius > 0.0)) {
        throw std::invalid_argument("match_radius must be positive, got " +
                                    std::to_string(match_radius));
    }
    check_frames(gt, "ground-truth");
    check_frames(tracks, "track");

    std::map<std::int64_t, const std::vector<AnnotatedObject>*> gt_by_frame, tr_by_frame;
    for (const auto& f : gt) gt_by_frame[f.frame] = &f.objects;
    for (const auto& f : tracks) tr_by_frame[f.frame] = &f.objects;
    std::set<std::int64_t> all_frames;
    for (const auto& [f, unused] : gt_by_frame) all_frames.insert(f);
    for (const auto& [f, unused] : tr_by_frame) all_frames.insert(f);

    MotSummary sum;
    double total_distance = 0.0;
    std::int64_t total_matches = 0;
    std::unordered_map<std::int64_t, GtMemory> memory;

    static const std::vector<AnnotatedObject> kEmpty;
    for (std::int64_t frame : all_frames) {
        const auto git = gt_by_frame.find(frame);
        const auto tit = tr_by_frame.find(frame);
        const auto gts = sorted_by_id(git == gt_by_frame.end() ? kEmpty : *git->second);
        const auto trs = sorted_by_id(tit == tr_by_frame.end() ? kEmpty : *tit->second);
        sum.gt_count += static_cast<std::int64_t>(gts.size());

        std::unordered_map<std::int64_t, std::size_t> track_index;
        for (std::size_t t = 0; t < trs.size(); ++t) track_index[trs[t]->id] = t;

        std::vector<char> gt_matched(gts.size(), 0), tr_matched(trs.size(), 0);
        std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (gt index, track index)

        // Keep last frame's correspondence while it still holds.
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const auto mem = memory.find(gts[g]->id);
            if (mem == memory.end() || !mem->second.ever_matched) continue;
            const auto t = track_index.find(mem->second.last_track_id);
            if (t == track_index.end() || tr_matched[t->second]) continue;
            if (distance(*gts[g], *trs[t->second]) > match_radius) continue;
            gt_matched[g] = tr_matched[t->second] = 1;
            pairs.emplace_back(g, t->second);
        }

        // Optimal matching of the rest; a dummy column per row lets any
        // ground-truth object stay unmatched at high cost.
        std::vector<std::size_t> free_gt, free_tr;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (!gt_matched[g]) free_gt.push_back(g);
        }
        for (std::size_t t = 0; t < trs.size(); ++t) {
            if (!tr_matched[t]) free_tr.push_back(t);
        }
        if (!free_gt.empty()) {
            assignment::CostMatrix cost(free_gt.size(), free_tr.size() + free_gt.size());
            for (std::size_t i = 0; i < free_gt.size(); ++i) {
                for (std::size_t j = 0; j < free_tr.size(); ++j) {
                    const double d = distance(*gts[free_gt[i]], *trs[free_tr[j]]);
                    if (d <= match_radius) cost.at(i, j) = d;
                }
                cost.at(i, free_tr.size() + i) = kUnmatchedCost;
            }
            const assignment::Assignment solved = assignment::hungarian(cost);
            for (std::size_t i = 0; i < free_gt.size(); ++i) {
                const std::size_t col = static_cast<std::size_t>(solved.row_to_col[i]);
                if (col >= free_tr.size()) continue;  // stayed unmatched
                gt_matched[free_gt[i]] = tr_matched[free_tr[col]] = 1;
                pairs.emplace_back(free_gt[i], free_tr[col]);
            }
        }

        for (const auto& [g, t] : pairs) {
            GtMemory& mem = memory[gts[g]->id];
            if (mem.ever_matched && mem.last_track_id != trs[t]->id) ++sum.id_switches;
            if (mem.interrupted) ++sum.fragmentations;
            mem.last_track_id = trs[t]->id;
            mem.ever_matched = true;
            mem.interrupted = false;
            total_distance += distance(*gts[g], *trs[t]);
            ++total_matches;
        }
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gt_matched[g]) continue;
            ++sum.misses;
            const auto mem = memory.find(gts[g]->id);
            if (mem != memory.end() && mem->second.ever_matched) mem->second.interrupted = true;
        }
        for (std::size_t t = 0; t < trs.size(); ++t) {
            if (!tr_matched[t]) ++sum.false_positives;
        }
    }

    sum.motp = total_matches > 0 ? total_distance / static_cast<double>(total_matches) : 0.0;
    sum.mota = sum.gt_count > 0
                   ? 1.0 - static_cast<double>(sum.false_positives + sum.misses +
                                               sum.id_switches) /
                               static_cast<double>(sum.gt_count)
                   : 1.0;
    return sum;
}

std::map<std::string, MotSummary> evaluate_per_class(
    const std::vector<AnnotatedFrame>& gt, const std::vector<AnnotatedFrame>& tracks,
    const std::map<std::string, double>& radii) {
    std::set<std::string> classes;
    for (const auto& f : gt) {
        for (const auto& o : f.objects) classes.insert(o.klass);
    }
    for (const auto& f : tracks) {
        for (const auto& o : f.objects) classes.insert(o.klass);
    }

    const auto filter = [](const std::vector<AnnotatedFrame>& frames, const std::string& klass) {
        std::vector<AnnotatedFrame> out;
        for (const auto& f : frames) {
            AnnotatedFrame kept;
            kept.frame = f.frame;
            for (const auto& o : f.objects) {
                if (o.klass == klass) kept.objects.push_back(o);
            }
            out.push_back(std::move(kept));
        }
        return out;
    };

    std::map<std::string, MotSummary> out;
    for (const std::string& klass : classes) {
        const auto it = radii.find(klass);
        if (it == radii.end()) {
            throw std::invalid_argument("no match radius configured for class '" + klass + "'");
        }
        out[klass] = evaluate_sequence(filter(gt, klass), filter(tracks, klass), it->second);
    }
    return out;
}

}  // namespace pmbm
