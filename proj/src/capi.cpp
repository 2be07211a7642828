#include "pmbmtrack/pmbmtrack.h"

#include "config.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "pmbm_filter.hpp"
#include "records.hpp"
#include "report.hpp"
#include "scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

// The streaming handle owns the filter parameters, the posterior, and the
// estimates extracted by the most recent step.
struct pmbmtrack_filter {
    pmbm::FilterParams params;
    pmbm::PMBMState state;
    std::vector<pmbm::TrackEstimate> estimates;
};

namespace {

thread_local std::string g_last_error;

/// Heap copy released by pmbmtrack_string_free (malloc/free pairing keeps
/// the boundary safe even if the library and caller use different C++
/// runtimes).
char* duplicate(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

pmbmtrack_status fail(pmbmtrack_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

/// Run `body` and translate any escaping exception into a status code plus
/// a per-thread message. `body` returns the status for the success path.
template <typename Body>
pmbmtrack_status guarded(Body&& body) {
    try {
        g_last_error.clear();
        return body();
    } catch (const pmbm::ParseError& e) {
        return fail(PMBMTRACK_PARSE_ERROR, e.what());
    } catch (const pmbm::IoError& e) {
        return fail(PMBMTRACK_IO_ERROR, e.what());
    } catch (const pmbm::NumericalError& e) {
        return fail(PMBMTRACK_NUMERICAL_ERROR, e.what());
    } catch (const pmbm::InfeasibleError& e) {
        return fail(PMBMTRACK_INFEASIBLE, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(PMBMTRACK_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(PMBMTRACK_UNKNOWN, e.what());
    } catch (...) {
        return fail(PMBMTRACK_UNKNOWN, "unknown error");
    }
}

void fill_summary(pmbmtrack_pipeline_stats& stats, const pmbm::MotSummary& summary) {
    stats.mota = summary.mota;
    stats.motp = summary.motp;
    stats.false_positives = summary.false_positives;
    stats.misses = summary.misses;
    stats.id_switches = summary.id_switches;
    stats.fragmentations = summary.fragmentations;
    stats.gt_count = summary.gt_count;
}

/// Parse {"class": radius, ...}; every radius must be a positive finite
/// number.
std::map<std::string, double> parse_radii(const char* radii_json) {
    const auto doc = nlohmann::json::parse(radii_json, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw std::invalid_argument("radii must be a JSON object of class: radius pairs");
    }
    std::map<std::string, double> radii;
    for (const auto& [key, value] : doc.items()) {
        if (!value.is_number()) {
            throw std::invalid_argument("radius for class '" + key + "' must be a number");
        }
        const double radius = value.get<double>();
        if (!std::isfinite(radius) || radius <= 0.0) {
            throw std::invalid_argument("radius for class '" + key + "' must be positive");
        }
        radii[key] = radius;
    }
    if (radii.empty()) throw std::invalid_argument("radii must name at least one class");
    return radii;
}

}  // namespace

extern "C" {

const char* pmbmtrack_version(void) { return "0.1.0"; }

const char* pmbmtrack_last_error(void) { return g_last_error.c_str(); }

void pmbmtrack_string_free(char* text) { std::free(text); }

pmbmtrack_status pmbmtrack_run_pipeline(const char* detections_path, const char* config_path,
                                        const char* output_path, const char* gt_path,
                                        const char* report_path, const char* poses_path,
                                        pmbmtrack_pipeline_stats* stats, char** report_text) {
    return guarded([&]() -> pmbmtrack_status {
        if (detections_path == nullptr || output_path == nullptr) {
            return fail(PMBMTRACK_INVALID_ARGUMENT,
                        "detections_path and output_path are required");
        }
        pmbm::PipelineOptions options;
        options.detections_path = detections_path;
        options.config_path = config_path == nullptr ? "" : config_path;
        options.output_path = output_path;
        options.gt_path = gt_path == nullptr ? "" : gt_path;
        options.report_path = report_path == nullptr ? "" : report_path;
        options.poses_path = poses_path == nullptr ? "" : poses_path;

        const pmbm::PipelineResult result = pmbm::run_pipeline(options);
        if (stats != nullptr) {
            *stats = pmbmtrack_pipeline_stats{};
            stats->frames_processed = result.frames_processed;
            stats->records_emitted = result.records_emitted;
            stats->mean_frame_seconds = result.mean_frame_seconds;
            stats->has_metrics = result.has_metrics ? 1 : 0;
            if (result.has_metrics) fill_summary(*stats, result.overall);
        }
        if (report_text != nullptr) *report_text = duplicate(result.report_text);
        return PMBMTRACK_OK;
    });
}

pmbmtrack_status pmbmtrack_simulate(const char* config_path, const char* out_detections_path,
                                    const char* out_gt_path) {
    return guarded([&]() -> pmbmtrack_status {
        if (out_detections_path == nullptr || out_gt_path == nullptr) {
            return fail(PMBMTRACK_INVALID_ARGUMENT,
                        "out_detections_path and out_gt_path are required");
        }
        pmbm::ScenarioConfig config;
        if (config_path != nullptr && config_path[0] != '\0') {
            config = pmbm::load_scenario_config(config_path);
        }
        const pmbm::ScenarioOutput output = pmbm::generate(config);
        pmbm::write_detections(out_detections_path, pmbm::scenario_detection_records(output));
        pmbm::write_tracks(out_gt_path, pmbm::scenario_gt_records(output));
        return PMBMTRACK_OK;
    });
}

pmbmtrack_status pmbmtrack_evaluate(const char* gt_path, const char* tracks_path,
                                    const char* radii_json, const char* report_path,
                                    pmbmtrack_pipeline_stats* stats, char** report_text) {
    return guarded([&]() -> pmbmtrack_status {
        if (gt_path == nullptr || tracks_path == nullptr || radii_json == nullptr) {
            return fail(PMBMTRACK_INVALID_ARGUMENT,
                        "gt_path, tracks_path, and radii_json are required");
        }
        const auto radii = parse_radii(radii_json);
        const auto gt = pmbm::tracks_to_frames(pmbm::read_tracks(gt_path));
        const auto tracks = pmbm::tracks_to_frames(pmbm::read_tracks(tracks_path));
        const auto per_class = pmbm::evaluate_per_class(gt, tracks, radii);
        const pmbm::MotSummary overall = pmbm::combine_summaries(per_class);
        if (report_path != nullptr && report_path[0] != '\0') {
            pmbm::emit_report(per_class, overall, report_path);
        }
        if (stats != nullptr) {
            *stats = pmbmtrack_pipeline_stats{};
            stats->has_metrics = 1;
            fill_summary(*stats, overall);
        }
        if (report_text != nullptr) {
            *report_text = duplicate(pmbm::render_report_table(per_class, overall));
        }
        return PMBMTRACK_OK;
    });
}

pmbmtrack_status pmbmtrack_filter_create(const char* config_json,
                                         pmbmtrack_filter_t** out_filter) {
    return guarded([&]() -> pmbmtrack_status {
        if (out_filter == nullptr) {
            return fail(PMBMTRACK_INVALID_ARGUMENT, "out_filter is required");
        }
        pmbm::PipelineConfig config;
        if (config_json != nullptr && config_json[0] != '\0') {
            config = pmbm::parse_pipeline_config(config_json, "config");
        } else {
            config.filter.birth = pmbm::build_birth_components(config);
        }
        auto filter = std::make_unique<pmbmtrack_filter>();
        filter->params = config.filter;
        *out_filter = filter.release();
        return PMBMTRACK_OK;
    });
}

void pmbmtrack_filter_destroy(pmbmtrack_filter_t* filter) { delete filter; }

pmbmtrack_status pmbmtrack_filter_step(pmbmtrack_filter_t* filter, double dt,
                                       const pmbmtrack_measurement* measurements,
                                       size_t n_measurements, size_t* n_estimates) {
    return guarded([&]() -> pmbmtrack_status {
        if (filter == nullptr) return fail(PMBMTRACK_INVALID_ARGUMENT, "filter is required");
        if (!std::isfinite(dt) || dt <= 0.0) {
            return fail(PMBMTRACK_INVALID_ARGUMENT, "dt must be a positive finite number");
        }
        if (measurements == nullptr && n_measurements != 0) {
            return fail(PMBMTRACK_INVALID_ARGUMENT,
                        "measurements must be non-null when n_measurements > 0");
        }
        std::vector<pmbm::Measurement> zs(n_measurements);
        std::vector<double> scores(n_measurements);
        for (size_t i = 0; i < n_measurements; ++i) {
            const pmbmtrack_measurement& m = measurements[i];
            if (!std::isfinite(m.x) || !std::isfinite(m.y)) {
                return fail(PMBMTRACK_INVALID_ARGUMENT,
                            "measurement " + std::to_string(i) + " has a non-finite position");
            }
            if (!std::isfinite(m.score) || m.score < 0.0 || m.score > 1.0) {
                return fail(PMBMTRACK_INVALID_ARGUMENT, "measurement " + std::to_string(i) +
                                                            " score must be in [0, 1]");
            }
            zs[i].z = pmbm::Vec2(m.x, m.y);
            scores[i] = m.score;
        }
        const auto predicted = pmbm::pmbm_predict(filter->state, dt, filter->params);
        const auto updated = pmbm::pmbm_update(predicted, zs, scores, filter->params);
        filter->state = pmbm::pmbm_reduce(updated, filter->params);
        filter->estimates = pmbm::extract_estimates(filter->state, filter->params);
        if (n_estimates != nullptr) *n_estimates = filter->estimates.size();
        return PMBMTRACK_OK;
    });
}

pmbmtrack_status pmbmtrack_filter_estimates(const pmbmtrack_filter_t* filter,
                                            pmbmtrack_estimate* out, size_t capacity,
                                            size_t* n_written) {
    return guarded([&]() -> pmbmtrack_status {
        if (filter == nullptr || n_written == nullptr) {
            return fail(PMBMTRACK_INVALID_ARGUMENT, "filter and n_written are required");
        }
        if (out == nullptr && capacity != 0) {
            return fail(PMBMTRACK_INVALID_ARGUMENT, "out must be non-null when capacity > 0");
        }
        const size_t count = std::min(capacity, filter->estimates.size());
        for (size_t i = 0; i < count; ++i) {
            const pmbm::TrackEstimate& est = filter->estimates[i];
            out[i].track_id = est.track_id;
            out[i].x = est.state.mean(0);
            out[i].y = est.state.mean(1);
            out[i].vx = est.state.mean(2);
            out[i].vy = est.state.mean(3);
            out[i].existence = est.existence;
        }
        *n_written = count;
        return PMBMTRACK_OK;
    });
}

}  // extern "C"
