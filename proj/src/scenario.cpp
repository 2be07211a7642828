#include "scenario.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pmbm {

namespace {

enum StreamTag : std::uint64_t {
    kBirthCount = 1,
    kObjectInit = 2,
    kDetection = 3,
    kClutter = 4,
};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 keyed_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t a,
                          std::uint64_t b) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(tag ^ splitmix64(a ^ splitmix64(b)))));
}

// Hand-rolled draws: the standard-library distributions are
// implementation-defined, and outputs must reproduce bit-for-bit anywhere.
double next_uniform(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

double next_normal(std::mt19937_64& g) {
    double u1 = next_uniform(g);
    const double u2 = next_uniform(g);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::int64_t next_poisson(std::mt19937_64& g, double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    std::int64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= next_uniform(g);
    } while (p > limit);
    return k - 1;
}

void validate(const ScenarioConfig& c) {
    const auto fail = [](const std::string& what) {
        throw std::invalid_argument("scenario config: " + what);
    };
    if (!(c.area_max_x > c.area_min_x) || !(c.area_max_y > c.area_min_y)) {
        fail("area is degenerate");
    }
    if (c.n_frames < 0) fail("n_frames is negative");
    if (!(c.dt > 0.0)) fail("dt must be positive");
    if (c.n_initial < 0) fail("n_initial is negative");
    if (c.birth_rate < 0.0) fail("birth_rate is negative");
    if (c.mean_lifetime < 1.0) fail("mean_lifetime must be at least one frame");
    if (c.speed_min < 0.0 || c.speed_max < c.speed_min) fail("speed range is invalid");
    if (c.detection_prob < 0.0 || c.detection_prob > 1.0) {
        fail("detection_prob outside [0, 1]");
    }
    if (c.position_noise_std < 0.0) fail("position_noise_std is negative");
    if (c.clutter_rate < 0.0) fail("clutter_rate is negative");
    if (c.score.true_std < 0.0 || c.score.clutter_std < 0.0) fail("score stds must be >= 0");
}

struct Trajectory {
    std::int64_t id = 0;
    std::int64_t birth_frame = 0;
    std::int64_t death_frame = 0;  // exclusive
    Vec2 position = Vec2::Zero();  // advanced frame by frame
    Vec2 velocity = Vec2::Zero();
};

Trajectory spawn(const ScenarioConfig& c, std::int64_t id, std::int64_t frame) {
    std::mt19937_64 g = keyed_rng(c.seed, kObjectInit, static_cast<std::uint64_t>(id), 0);
    Trajectory t;
    t.id = id;
    t.birth_frame = frame;
    t.position << c.area_min_x + next_uniform(g) * (c.area_max_x - c.area_min_x),
        c.area_min_y + next_uniform(g) * (c.area_max_y - c.area_min_y);
    const double heading = 2.0 * M_PI * next_uniform(g);
    const double speed = c.speed_min + next_uniform(g) * (c.speed_max - c.speed_min);
    t.velocity << speed * std::cos(heading), speed * std::sin(heading);

    const double p_death = 1.0 / c.mean_lifetime;
    std::int64_t lifetime = 1;
    if (p_death < 1.0) {
        const double u = next_uniform(g);
        const double draws = std::floor(std::log1p(-u) / std::log1p(-p_death));
        lifetime = 1 + static_cast<std::int64_t>(std::min(draws, 1e15));
    }
    t.death_frame = frame + lifetime;
    return t;
}

double clamped_score(double mean, double std_dev, std::mt19937_64& g) {
    return std::clamp(mean + std_dev * next_normal(g), 0.0, 1.0);
}

}  // namespace

ScenarioOutput generate(const ScenarioConfig& config) {
    validate(config);

    std::vector<Trajectory> objects;
    std::int64_t next_id = 0;
    for (int i = 0; i < config.n_initial; ++i) objects.push_back(spawn(config, next_id++, 0));
    for (std::int64_t f = 0; f < config.n_frames; ++f) {
        std::mt19937_64 g = keyed_rng(config.seed, kBirthCount, static_cast<std::uint64_t>(f), 0);
        const std::int64_t births = next_poisson(g, config.birth_rate);
        for (std::int64_t i = 0; i < births; ++i) objects.push_back(spawn(config, next_id++, f));
    }

    ScenarioOutput out;
    out.gt.resize(config.n_frames);
    out.detections.resize(config.n_frames);
    out.timestamps.resize(config.n_frames);

    for (std::int64_t f = 0; f < config.n_frames; ++f) {
        out.gt[f].frame = f;
        out.timestamps[f] = static_cast<double>(f) * config.dt;

        for (auto& obj : objects) {
            if (f > obj.birth_frame && f < obj.death_frame) {
                obj.position += obj.velocity * config.dt;  // incremental, exact CV deltas
            }
            if (f < obj.birth_frame || f >= obj.death_frame) continue;

            AnnotatedObject gt_obj;
            gt_obj.id = obj.id;
            gt_obj.position = obj.position;
            gt_obj.klass = config.class_name;
            out.gt[f].objects.push_back(gt_obj);

            std::mt19937_64 g = keyed_rng(config.seed, kDetection, static_cast<std::uint64_t>(f),
                                          static_cast<std::uint64_t>(obj.id));
            if (next_uniform(g) >= config.detection_prob) continue;
            SimDetection det;
            det.z.z = obj.position +
                      config.position_noise_std * Vec2(next_normal(g), next_normal(g));
            det.score = clamped_score(config.score.true_mean, config.score.true_std, g);
            det.klass = config.class_name;
            out.detections[f].push_back(std::move(det));
        }

        std::mt19937_64 g = keyed_rng(config.seed, kClutter, static_cast<std::uint64_t>(f), 0);
        const std::int64_t n_clutter = next_poisson(g, config.clutter_rate);
        for (std::int64_t i = 0; i < n_clutter; ++i) {
            SimDetection det;
            det.z.z << config.area_min_x + next_uniform(g) * (config.area_max_x -
                                                              config.area_min_x),
                config.area_min_y + next_uniform(g) * (config.area_max_y - config.area_min_y);
            det.score = clamped_score(config.score.clutter_mean, config.score.clutter_std, g);
            det.klass = config.class_name;
            out.detections[f].push_back(std::move(det));
        }
    }
    return out;
}

namespace {

constexpr std::array<double, 3> kNominalSize{{4.0, 2.0, 1.5}};

}  // namespace

std::vector<DetectionRecord> scenario_detection_records(const ScenarioOutput& output) {
    std::vector<DetectionRecord> records;
    for (std::size_t f = 0; f < output.detections.size(); ++f) {
        for (const SimDetection& det : output.detections[f]) {
            DetectionRecord r;
            r.frame = static_cast<std::int64_t>(f);
            r.timestamp = output.timestamps[f];
            r.klass = det.klass;
            r.center = {det.z.z(0), det.z.z(1), 0.0};
            r.size = kNominalSize;
            r.yaw = 0.0;
            r.score = det.score;
            records.push_back(std::move(r));
        }
    }
    return records;
}

std::vector<TrackRecord> scenario_gt_records(const ScenarioOutput& output) {
    std::vector<TrackRecord> records;
    for (std::size_t f = 0; f < output.gt.size(); ++f) {
        for (const AnnotatedObject& obj : output.gt[f].objects) {
            TrackRecord r;
            r.det.frame = output.gt[f].frame;
            r.det.timestamp = output.timestamps[f];
            r.det.klass = obj.klass;
            r.det.center = {obj.position(0), obj.position(1), 0.0};
            r.det.size = kNominalSize;
            r.det.yaw = 0.0;
            r.det.score = 1.0;
            r.track_id = obj.id;
            r.existence = 1.0;
            r.velocity = {0.0, 0.0};
            records.push_back(std::move(r));
        }
    }
    return records;
}

}  // namespace pmbm
