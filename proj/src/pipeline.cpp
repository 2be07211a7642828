#include "pipeline.hpp"

#include "errors.hpp"
#include "pmbm_filter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>
#include <unordered_map>

namespace pmbm {

namespace {

/// Re-throw the current exception with "frame F, stage S" context so batch
/// failures are attributable, preserving the concrete type for callers that
/// map exceptions to exit codes.
[[noreturn]] void rethrow_with_context(std::int64_t frame, const char* stage) {
    const std::string where =
        "frame " + std::to_string(frame) + ", stage " + stage + ": ";
    try {
        throw;
    } catch (const ParseError& e) {
        throw ParseError(where + e.what(), e.line());
    } catch (const IoError& e) {
        throw IoError(where + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(where + e.what());
    } catch (const InfeasibleError& e) {
        throw InfeasibleError(where + e.what(), e.row());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(where + e.what());
    }
}

template <typename Fn>
auto at_stage(std::int64_t frame, const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (...) {
        rethrow_with_context(frame, stage);
    }
}

/// Latest associated detection per raw track id, preferring the choice of
/// the highest-weight global so the payload matches the reported estimate.
void remember_payloads(const PMBMState& state, const std::vector<DetectionRecord>& group,
                       std::unordered_map<std::int64_t, DetectionRecord>& payloads) {
    std::vector<std::size_t> order(state.globals.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return state.globals[a].log_weight > state.globals[b].log_weight;
    });
    std::unordered_map<std::int64_t, const TrackTree*> tree_of;
    for (const auto& tree : state.tracks) tree_of[tree.track_id] = &tree;

    std::set<std::int64_t> stored_this_frame;
    for (std::size_t gi : order) {
        for (const auto& [track_id, hyp_index] : state.globals[gi].selection) {
            if (stored_this_frame.count(track_id)) continue;
            const auto& hyp = tree_of.at(track_id)->hypotheses.at(hyp_index);
            if (!hyp.associated_measurement) continue;
            payloads[track_id] = group.at(*hyp.associated_measurement);
            stored_this_frame.insert(track_id);
        }
    }
}

TrackRecord make_record(const TrackEstimate& est, const DetectionRecord* payload,
                        std::int64_t frame, double timestamp, const std::string& klass,
                        std::int64_t track_id_offset) {
    TrackRecord rec;
    if (payload != nullptr) {
        rec.det = *payload;
    } else {
        rec.det.klass = klass;
        rec.det.score = est.existence;
    }
    rec.det.frame = frame;
    rec.det.timestamp = timestamp;
    rec.det.center[0] = est.state.mean(0);
    rec.det.center[1] = est.state.mean(1);
    rec.track_id = track_id_offset + est.track_id;
    rec.existence = est.existence;
    rec.velocity = {est.state.mean(2), est.state.mean(3)};
    return rec;
}

}  // namespace

std::vector<TrackRecord> track_one_class(const std::vector<std::vector<DetectionRecord>>& frames,
                                         const PipelineConfig& config,
                                         std::int64_t track_id_offset, double* filter_seconds) {
    using clock = std::chrono::steady_clock;
    std::vector<TrackRecord> records;
    if (frames.empty()) {
        if (filter_seconds != nullptr) *filter_seconds = 0.0;
        return records;
    }
    PMBMState state;
    std::unordered_map<std::int64_t, DetectionRecord> payloads;
    double previous_timestamp = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;

    for (const auto& group : frames) {
        const std::int64_t frame = group.front().frame;
        const double timestamp = group.front().timestamp;
        double dt = timestamp - previous_timestamp;
        if (!std::isfinite(dt) || dt <= 0.0) dt = config.default_dt;
        previous_timestamp = timestamp;

        std::vector<Measurement> measurements(group.size());
        std::vector<double> scores(group.size());
        for (std::size_t i = 0; i < group.size(); ++i) {
            measurements[i].z << group[i].center[0], group[i].center[1];
            scores[i] = group[i].score;
        }

        const auto start = clock::now();
        state = at_stage(frame, "predict",
                         [&] { return pmbm_predict(state, dt, config.filter); });
        state.frame = frame - 1;  // the update advances the counter to `frame`
        state = at_stage(frame, "update", [&] {
            return pmbm_update(state, measurements, scores, config.filter);
        });
        state = at_stage(frame, "reduce", [&] { return pmbm_reduce(state, config.filter); });
        FilterParams all = config.filter;
        all.extract_r_threshold = 0.0;
        const auto estimates =
            at_stage(frame, "extract", [&] { return extract_estimates(state, all); });
        seconds += std::chrono::duration<double>(clock::now() - start).count();

        remember_payloads(state, group, payloads);
        for (const auto& est : estimates) {
            if (est.existence < config.filter.extract_r_threshold) continue;
            const auto it = payloads.find(est.track_id);
            const DetectionRecord* payload = it != payloads.end() ? &it->second : nullptr;
            records.push_back(make_record(est, payload, frame, timestamp, group.front().klass,
                                          track_id_offset));
        }
    }
    if (filter_seconds != nullptr) *filter_seconds = seconds;
    return records;
}

PipelineResult run_pipeline(const PipelineOptions& options) {
    PipelineConfig config;
    if (options.config_path.empty()) {
        config.filter.birth = build_birth_components(config);
    } else {
        config = load_pipeline_config(options.config_path);
    }

    auto groups = read_detections(options.detections_path);
    if (!options.poses_path.empty()) {
        const auto poses = read_poses(options.poses_path);
        for (auto& group : groups) {
            for (auto& det : group) {
                const auto it = poses.find(det.frame);
                if (it == poses.end()) {
                    throw ParseError(options.poses_path + ": no pose for frame " +
                                     std::to_string(det.frame));
                }
                det = apply_pose(det, it->second);
            }
        }
    }

    // Split the frame groups by class, keeping per-class frame grouping.
    std::map<std::string, std::vector<std::vector<DetectionRecord>>> by_class;
    for (const auto& group : groups) {
        for (const auto& det : group) {
            auto& frames = by_class[det.klass];
            if (frames.empty() || frames.back().front().frame != det.frame) {
                frames.emplace_back();
            }
            frames.back().push_back(det);
        }
    }

    PipelineResult result;
    result.frames_processed = static_cast<std::int64_t>(groups.size());

    std::vector<TrackRecord> all_records;
    std::vector<double> class_seconds(by_class.size(), 0.0);
    {
        // Class index fixes each class's track-id block, so ids are stable
        // regardless of execution order.
        std::vector<std::pair<std::string, const std::vector<std::vector<DetectionRecord>>*>>
            classes;
        for (const auto& [klass, frames] : by_class) classes.emplace_back(klass, &frames);

        std::vector<std::vector<TrackRecord>> class_records(classes.size());
        if (config.parallel_classes && classes.size() > 1) {
            std::vector<std::exception_ptr> failures(classes.size());
            std::vector<std::thread> workers;
            workers.reserve(classes.size());
            for (std::size_t i = 0; i < classes.size(); ++i) {
                workers.emplace_back([&, i] {
                    try {
                        class_records[i] =
                            track_one_class(*classes[i].second, config,
                                            static_cast<std::int64_t>(i) * 1000000,
                                            &class_seconds[i]);
                    } catch (...) {
                        failures[i] = std::current_exception();
                    }
                });
            }
            for (auto& w : workers) w.join();
            for (const auto& failure : failures) {
                if (failure) std::rethrow_exception(failure);
            }
        } else {
            for (std::size_t i = 0; i < classes.size(); ++i) {
                class_records[i] = track_one_class(*classes[i].second, config,
                                                   static_cast<std::int64_t>(i) * 1000000,
                                                   &class_seconds[i]);
            }
        }
        for (auto& recs : class_records) {
            all_records.insert(all_records.end(), recs.begin(), recs.end());
        }
    }

    std::sort(all_records.begin(), all_records.end(),
              [](const TrackRecord& a, const TrackRecord& b) {
                  return std::tie(a.det.frame, a.track_id) < std::tie(b.det.frame, b.track_id);
              });
    write_tracks(options.output_path, all_records);
    result.records_emitted = static_cast<std::int64_t>(all_records.size());

    const double total_seconds =
        std::accumulate(class_seconds.begin(), class_seconds.end(), 0.0);
    result.mean_frame_seconds = result.frames_processed > 0
                                    ? total_seconds / static_cast<double>(result.frames_processed)
                                    : 0.0;

    if (!options.gt_path.empty()) {
        const auto gt_frames = tracks_to_frames(read_tracks(options.gt_path));
        const auto track_frames = tracks_to_frames(all_records);
        result.per_class = evaluate_per_class(gt_frames, track_frames, config.class_radii);
        result.overall = combine_summaries(result.per_class);
        result.has_metrics = true;

        std::ostringstream text;
        text << render_report_table(result.per_class, result.overall);
        text << "frames: " << result.frames_processed
             << "  tracks emitted: " << result.records_emitted << '\n';
        if (result.frames_processed > 0 && result.mean_frame_seconds > 0.0) {
            text << "mean filter time per frame: " << result.mean_frame_seconds * 1e3
                 << " ms (" << 1.0 / result.mean_frame_seconds << " frames/s)" << '\n';
        }
        result.report_text = text.str();
        if (!options.report_path.empty()) {
            emit_report(result.per_class, result.overall, options.report_path);
        }
    }
    return result;
}

}  // namespace pmbm
