#include "config.hpp"

#include "errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

namespace pmbm {

namespace {

using nlohmann::json;

/// Tracks which keys of a flat JSON object have been consumed so that typos
/// and stale options fail loudly instead of being silently ignored.
class FlatDocument {
  public:
    FlatDocument(const std::string& text, std::string source_name)
        : source_(std::move(source_name)) {
        doc_ = json::parse(text, nullptr, false);
        if (doc_.is_discarded()) {
            throw ParseError(source_ + ": not valid JSON");
        }
        if (!doc_.is_object()) {
            throw ParseError(source_ + ": expected a JSON object at top level");
        }
    }

    bool has(const std::string& key) const { return doc_.contains(key); }

    double number(const std::string& key, double& target) {
        if (!doc_.contains(key)) return target;
        const json& value = doc_.at(key);
        if (!value.is_number()) {
            throw ParseError(source_ + ": key \"" + key + "\" must be a number");
        }
        consumed_.insert(key);
        target = value.get<double>();
        if (!std::isfinite(target)) {
            throw ParseError(source_ + ": key \"" + key + "\" must be finite");
        }
        return target;
    }

    int integer(const std::string& key, int& target) {
        if (!doc_.contains(key)) return target;
        const json& value = doc_.at(key);
        if (!value.is_number_integer()) {
            throw ParseError(source_ + ": key \"" + key + "\" must be an integer");
        }
        consumed_.insert(key);
        target = value.get<int>();
        return target;
    }

    std::int64_t integer(const std::string& key, std::int64_t& target) {
        if (!doc_.contains(key)) return target;
        const json& value = doc_.at(key);
        if (!value.is_number_integer()) {
            throw ParseError(source_ + ": key \"" + key + "\" must be an integer");
        }
        consumed_.insert(key);
        target = value.get<std::int64_t>();
        return target;
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t& target) {
        if (!doc_.contains(key)) return target;
        const json& value = doc_.at(key);
        if (!value.is_number_integer() || value.get<long long>() < 0) {
            throw ParseError(source_ + ": key \"" + key + "\" must be a non-negative integer");
        }
        consumed_.insert(key);
        target = value.get<std::uint64_t>();
        return target;
    }

    bool boolean(const std::string& key, bool& target) {
        if (!doc_.contains(key)) return target;
        const json& value = doc_.at(key);
        if (!value.is_boolean()) {
            throw ParseError(source_ + ": key \"" + key + "\" must be a boolean");
        }
        consumed_.insert(key);
        target = value.get<bool>();
        return target;
    }

    std::string text(const std::string& key, std::string& target) {
        if (!doc_.contains(key)) return target;
        const json& value = doc_.at(key);
        if (!value.is_string()) {
            throw ParseError(source_ + ": key \"" + key + "\" must be a string");
        }
        consumed_.insert(key);
        target = value.get<std::string>();
        return target;
    }

    /// Consume every "<prefix><suffix>" key whose value is a number.
    std::map<std::string, double> prefixed_numbers(const std::string& prefix) {
        std::map<std::string, double> result;
        for (const auto& [key, value] : doc_.items()) {
            if (key.rfind(prefix, 0) != 0) continue;
            const std::string suffix = key.substr(prefix.size());
            if (suffix.empty()) {
                throw ParseError(source_ + ": key \"" + key + "\" is missing a class name");
            }
            if (!value.is_number()) {
                throw ParseError(source_ + ": key \"" + key + "\" must be a number");
            }
            consumed_.insert(key);
            result[suffix] = value.get<double>();
        }
        return result;
    }

    void reject_unconsumed() const {
        for (const auto& [key, value] : doc_.items()) {
            (void)value;
            if (consumed_.count(key) == 0) {
                throw ParseError(source_ + ": unknown key \"" + key + "\"");
            }
        }
    }

  private:
    std::string source_;
    json doc_;
    std::set<std::string> consumed_;
};

std::string read_whole_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void require_positive(const std::string& source, const std::string& key, double value) {
    if (!(value > 0.0)) {
        throw ParseError(source + ": key \"" + key + "\" must be positive");
    }
}

void require_probability(const std::string& source, const std::string& key, double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ParseError(source + ": key \"" + key + "\" must be in [0, 1]");
    }
}

}  // namespace

std::vector<PoissonComponent> build_birth_components(const PipelineConfig& config) {
    if (config.birth_grid_n < 1) {
        throw std::invalid_argument("birth_grid_n must be at least 1");
    }
    if (!(config.area_max_x > config.area_min_x) || !(config.area_max_y > config.area_min_y)) {
        throw std::invalid_argument("birth area must have positive extent");
    }
    if (!(config.birth_total_rate > 0.0)) {
        throw std::invalid_argument("birth_total_rate must be positive");
    }
    const int n = config.birth_grid_n;
    const double step_x = (config.area_max_x - config.area_min_x) / n;
    const double step_y = (config.area_max_y - config.area_min_y) / n;
    const double log_weight = std::log(config.birth_total_rate / (n * n));

    Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
    cov(0, 0) = cov(1, 1) = config.birth_position_std * config.birth_position_std;
    cov(2, 2) = cov(3, 3) = config.birth_velocity_std * config.birth_velocity_std;

    std::vector<PoissonComponent> components;
    components.reserve(static_cast<size_t>(n) * n);
    for (int ix = 0; ix < n; ++ix) {
        for (int iy = 0; iy < n; ++iy) {
            StateEstimate state;
            state.mean = Eigen::Vector4d::Zero();
            state.mean(0) = config.area_min_x + (ix + 0.5) * step_x;
            state.mean(1) = config.area_min_y + (iy + 0.5) * step_y;
            state.covariance = cov;
            components.push_back({log_weight, state});
        }
    }
    return components;
}

PipelineConfig parse_pipeline_config(const std::string& text, const std::string& source_name) {
    FlatDocument doc(text, source_name);
    PipelineConfig config;

    doc.number("process_noise_intensity", config.filter.motion.process_noise_intensity);
    doc.number("survival_probability", config.filter.motion.survival_probability);

    double measurement_noise_std = std::sqrt(config.filter.meas.measurement_noise(0, 0));
    doc.number("measurement_noise_std", measurement_noise_std);
    config.filter.meas.measurement_noise = Eigen::Matrix2d::Identity() *
                                           (measurement_noise_std * measurement_noise_std);
    doc.number("detection_probability", config.filter.meas.detection_probability);
    doc.number("clutter_intensity", config.filter.meas.clutter_intensity);
    doc.number("gate_threshold", config.filter.meas.gate_threshold);

    doc.integer("k_best", config.filter.k_best);
    doc.number("prune_hypothesis_log_weight", config.filter.prune_sth_logw);
    doc.number("prune_global_log_weight", config.filter.prune_global_logw);
    doc.number("prune_poisson_log_weight", config.filter.prune_ppp_logw);
    doc.integer("max_global_hypotheses", config.filter.cap_globals);
    doc.integer("max_tracks", config.filter.cap_tracks);
    doc.number("recycle_threshold", config.filter.recycle_r_threshold);
    doc.number("extract_threshold", config.filter.extract_r_threshold);
    doc.number("detection_probability_floor", config.filter.pd_floor);
    doc.number("detection_probability_ceiling", config.filter.pd_ceiling);
    doc.integer("score_window", config.filter.score_window);
    doc.integer("terminate_after_misses", config.filter.terminate_misses);

    doc.number("default_dt", config.default_dt);
    doc.boolean("parallel_classes", config.parallel_classes);

    doc.number("area_min_x", config.area_min_x);
    doc.number("area_min_y", config.area_min_y);
    doc.number("area_max_x", config.area_max_x);
    doc.number("area_max_y", config.area_max_y);
    doc.integer("birth_grid_n", config.birth_grid_n);
    doc.number("birth_total_rate", config.birth_total_rate);
    doc.number("birth_position_std", config.birth_position_std);
    doc.number("birth_velocity_std", config.birth_velocity_std);

    auto radii = doc.prefixed_numbers("radius_");
    if (!radii.empty()) {
        config.class_radii = std::move(radii);
    }

    doc.reject_unconsumed();

    require_positive(source_name, "measurement_noise_std", measurement_noise_std);
    require_positive(source_name, "process_noise_intensity",
                     config.filter.motion.process_noise_intensity);
    require_probability(source_name, "survival_probability",
                        config.filter.motion.survival_probability);
    require_probability(source_name, "detection_probability",
                        config.filter.meas.detection_probability);
    if (config.filter.meas.clutter_intensity < 0.0) {
        throw ParseError(source_name + ": key \"clutter_intensity\" must be non-negative");
    }
    require_positive(source_name, "gate_threshold", config.filter.meas.gate_threshold);
    if (config.filter.k_best < 1) {
        throw ParseError(source_name + ": key \"k_best\" must be at least 1");
    }
    if (config.filter.cap_globals < 1) {
        throw ParseError(source_name + ": key \"max_global_hypotheses\" must be at least 1");
    }
    if (config.filter.cap_tracks < 1) {
        throw ParseError(source_name + ": key \"max_tracks\" must be at least 1");
    }
    require_probability(source_name, "recycle_threshold", config.filter.recycle_r_threshold);
    require_probability(source_name, "extract_threshold", config.filter.extract_r_threshold);
    require_probability(source_name, "detection_probability_floor", config.filter.pd_floor);
    require_probability(source_name, "detection_probability_ceiling", config.filter.pd_ceiling);
    if (config.filter.pd_floor > config.filter.pd_ceiling) {
        throw ParseError(source_name +
                         ": detection_probability_floor exceeds detection_probability_ceiling");
    }
    if (config.filter.score_window < 1) {
        throw ParseError(source_name + ": key \"score_window\" must be at least 1");
    }
    if (config.filter.terminate_misses < 1) {
        throw ParseError(source_name + ": key \"terminate_after_misses\" must be at least 1");
    }
    require_positive(source_name, "default_dt", config.default_dt);
    if (config.birth_grid_n < 1) {
        throw ParseError(source_name + ": key \"birth_grid_n\" must be at least 1");
    }
    if (!(config.area_max_x > config.area_min_x) || !(config.area_max_y > config.area_min_y)) {
        throw ParseError(source_name + ": birth area must have positive extent");
    }
    require_positive(source_name, "birth_total_rate", config.birth_total_rate);
    require_positive(source_name, "birth_position_std", config.birth_position_std);
    require_positive(source_name, "birth_velocity_std", config.birth_velocity_std);
    for (const auto& [klass, radius] : config.class_radii) {
        if (!(radius > 0.0)) {
            throw ParseError(source_name + ": key \"radius_" + klass + "\" must be positive");
        }
    }

    config.filter.birth = build_birth_components(config);
    return config;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    return parse_pipeline_config(read_whole_file(path), path);
}

ScenarioConfig parse_scenario_config(const std::string& text, const std::string& source_name) {
    FlatDocument doc(text, source_name);
    ScenarioConfig config;

    doc.unsigned_integer("seed", config.seed);
    doc.number("area_min_x", config.area_min_x);
    doc.number("area_min_y", config.area_min_y);
    doc.number("area_max_x", config.area_max_x);
    doc.number("area_max_y", config.area_max_y);
    doc.integer("n_frames", config.n_frames);
    doc.number("dt", config.dt);
    doc.integer("n_initial", config.n_initial);
    doc.number("birth_rate", config.birth_rate);
    doc.number("mean_lifetime", config.mean_lifetime);
    doc.number("speed_min", config.speed_min);
    doc.number("speed_max", config.speed_max);
    doc.number("detection_prob", config.detection_prob);
    doc.number("position_noise_std", config.position_noise_std);
    doc.number("clutter_rate", config.clutter_rate);
    doc.number("score_true_mean", config.score.true_mean);
    doc.number("score_true_std", config.score.true_std);
    doc.number("score_clutter_mean", config.score.clutter_mean);
    doc.number("score_clutter_std", config.score.clutter_std);
    doc.text("class_name", config.class_name);

    doc.reject_unconsumed();

    if (config.n_frames < 1) {
        throw ParseError(source_name + ": key \"n_frames\" must be at least 1");
    }
    return config;  // generate() validates the remaining physical constraints
}

ScenarioConfig load_scenario_config(const std::string& path) {
    return parse_scenario_config(read_whole_file(path), path);
}

}  // namespace pmbm
