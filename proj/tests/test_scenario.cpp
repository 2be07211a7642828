#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "scenario.hpp"

#include <cmath>
#include <map>

using namespace pmbm;

namespace {

ScenarioConfig base_config() {
    ScenarioConfig c;
    c.seed = 42;
    c.n_frames = 50;
    c.n_initial = 4;
    c.speed_min = 1.0;
    c.speed_max = 5.0;
    c.detection_prob = 0.9;
    c.position_noise_std = 0.2;
    c.clutter_rate = 2.0;
    return c;
}

}  // namespace

TEST_CASE("a noiseless world reproduces ground truth exactly") {
    ScenarioConfig c = base_config();
    c.detection_prob = 1.0;
    c.position_noise_std = 0.0;
    c.clutter_rate = 0.0;

    const ScenarioOutput out = generate(c);
    REQUIRE(out.gt.size() == 50);
    for (std::size_t f = 0; f < out.gt.size(); ++f) {
        REQUIRE(out.detections[f].size() == out.gt[f].objects.size());
        for (std::size_t i = 0; i < out.gt[f].objects.size(); ++i) {
            CHECK(out.detections[f][i].z.z(0) == out.gt[f].objects[i].position(0));
            CHECK(out.detections[f][i].z.z(1) == out.gt[f].objects[i].position(1));
        }
    }
}

TEST_CASE("no births and no initial objects leave only clutter") {
    ScenarioConfig c = base_config();
    c.n_initial = 0;
    c.birth_rate = 0.0;
    c.clutter_rate = 3.0;

    const ScenarioOutput out = generate(c);
    std::size_t clutter_total = 0;
    for (std::size_t f = 0; f < out.gt.size(); ++f) {
        CHECK(out.gt[f].objects.empty());
        clutter_total += out.detections[f].size();
    }
    CHECK(clutter_total > 0);
}

TEST_CASE("the same seed reproduces the output bit for bit") {
    const ScenarioOutput a = generate(base_config());
    const ScenarioOutput b = generate(base_config());
    REQUIRE(a.gt.size() == b.gt.size());
    for (std::size_t f = 0; f < a.gt.size(); ++f) {
        REQUIRE(a.gt[f].objects.size() == b.gt[f].objects.size());
        for (std::size_t i = 0; i < a.gt[f].objects.size(); ++i) {
            CHECK(a.gt[f].objects[i].id == b.gt[f].objects[i].id);
            CHECK(a.gt[f].objects[i].position(0) == b.gt[f].objects[i].position(0));
            CHECK(a.gt[f].objects[i].position(1) == b.gt[f].objects[i].position(1));
        }
        REQUIRE(a.detections[f].size() == b.detections[f].size());
        for (std::size_t i = 0; i < a.detections[f].size(); ++i) {
            CHECK(a.detections[f][i].z.z(0) == b.detections[f][i].z.z(0));
            CHECK(a.detections[f][i].score == b.detections[f][i].score);
        }
    }

    ScenarioConfig other = base_config();
    other.seed = 43;
    const ScenarioOutput d = generate(other);
    bool any_difference = false;
    for (std::size_t f = 0; f < a.gt.size() && !any_difference; ++f) {
        if (a.detections[f].size() != d.detections[f].size()) any_difference = true;
    }
    CHECK(any_difference);
}

TEST_CASE("adding objects never disturbs existing streams") {
    ScenarioConfig small = base_config();
    small.clutter_rate = 0.0;
    small.n_initial = 2;
    ScenarioConfig large = small;
    large.n_initial = 3;

    const ScenarioOutput a = generate(small);
    const ScenarioOutput b = generate(large);
    for (std::size_t f = 0; f < a.gt.size(); ++f) {
        std::map<std::int64_t, Vec2> b_pos;
        for (const auto& o : b.gt[f].objects) b_pos[o.id] = o.position;
        for (const auto& o : a.gt[f].objects) {
            REQUIRE(b_pos.count(o.id) == 1);
            CHECK(o.position(0) == b_pos[o.id](0));  // exact: same keyed stream
            CHECK(o.position(1) == b_pos[o.id](1));
        }
    }
}

TEST_CASE("clutter counts follow the configured Poisson rate") {
    ScenarioConfig c;
    c.seed = 7;
    c.n_frames = 10000;
    c.n_initial = 0;
    c.clutter_rate = 4.0;

    const ScenarioOutput out = generate(c);
    double total = 0.0;
    for (const auto& dets : out.detections) total += static_cast<double>(dets.size());
    const double mean = total / static_cast<double>(c.n_frames);
    const double stderr3 = 3.0 * std::sqrt(c.clutter_rate / static_cast<double>(c.n_frames));
    CHECK(std::abs(mean - c.clutter_rate) < stderr3);
}

TEST_CASE("detection dropouts follow the configured probability") {
    ScenarioConfig c;
    c.seed = 11;
    c.n_frames = 10000;
    c.n_initial = 5;
    c.speed_min = c.speed_max = 0.0;
    c.detection_prob = 0.8;
    c.clutter_rate = 0.0;

    const ScenarioOutput out = generate(c);
    double live = 0.0, detected = 0.0;
    for (std::size_t f = 0; f < out.gt.size(); ++f) {
        live += static_cast<double>(out.gt[f].objects.size());
        detected += static_cast<double>(out.detections[f].size());
    }
    REQUIRE(live == doctest::Approx(5.0 * 10000.0));  // immortal by default
    const double rate = detected / live;
    const double stderr3 = 3.0 * std::sqrt(0.8 * 0.2 / live);
    CHECK(std::abs(rate - 0.8) < stderr3);
}

TEST_CASE("trajectories obey constant-velocity kinematics") {
    ScenarioConfig c = base_config();
    c.birth_rate = 0.5;
    c.mean_lifetime = 30.0;
    const ScenarioOutput out = generate(c);

    std::map<std::int64_t, std::vector<Vec2>> paths;
    for (const auto& frame : out.gt) {
        for (const auto& o : frame.objects) paths[o.id].push_back(o.position);
    }
    REQUIRE(paths.size() > 4);
    for (const auto& [id, path] : paths) {
        for (std::size_t i = 2; i < path.size(); ++i) {
            const Vec2 first = path[i - 1] - path[i - 2];
            const Vec2 second = path[i] - path[i - 1];
            CHECK((second - first).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("invalid configurations are rejected with a named field") {
    ScenarioConfig c = base_config();
    c.area_max_x = c.area_min_x;
    CHECK_THROWS_AS(generate(c), std::invalid_argument);

    c = base_config();
    c.dt = 0.0;
    CHECK_THROWS_AS(generate(c), std::invalid_argument);

    c = base_config();
    c.detection_prob = 1.5;
    CHECK_THROWS_AS(generate(c), std::invalid_argument);

    c = base_config();
    c.mean_lifetime = 0.5;
    CHECK_THROWS_AS(generate(c), std::invalid_argument);

    c = base_config();
    c.clutter_rate = -1.0;
    CHECK_THROWS_AS(generate(c), std::invalid_argument);

    c = base_config();
    c.speed_max = c.speed_min - 1.0;
    CHECK_THROWS_AS(generate(c), std::invalid_argument);
}

TEST_CASE("scores stay inside the unit interval") {
    ScenarioConfig c = base_config();
    c.score.true_mean = 0.95;
    c.score.true_std = 0.3;
    c.score.clutter_mean = 0.05;
    c.score.clutter_std = 0.3;
    const ScenarioOutput out = generate(c);
    for (const auto& dets : out.detections) {
        for (const auto& d : dets) {
            CHECK(d.score >= 0.0);
            CHECK(d.score <= 1.0);
        }
    }
}
