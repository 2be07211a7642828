#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "metrics.hpp"

#include <algorithm>
#include <random>

using namespace pmbm;

namespace {

AnnotatedObject obj(std::int64_t id, double x, double y, std::string klass = "vehicle") {
    AnnotatedObject o;
    o.id = id;
    o.position << x, y;
    o.klass = std::move(klass);
    return o;
}

/// One ground-truth object with id 1 moving along x, frames 0..9.
std::vector<AnnotatedFrame> straight_line_gt() {
    std::vector<AnnotatedFrame> gt;
    for (std::int64_t f = 0; f < 10; ++f) {
        gt.push_back({f, {obj(1, static_cast<double>(f), 0.0)}});
    }
    return gt;
}

MotSummary verify_identity(const MotSummary& s) {
    if (s.gt_count > 0) {
        const double expected =
            1.0 - static_cast<double>(s.false_positives + s.misses + s.id_switches) /
                      static_cast<double>(s.gt_count);
        CHECK(s.mota == doctest::Approx(expected).epsilon(1e-12));
    }
    return s;
}

}  // namespace

TEST_CASE("a perfect tracker scores MOTA one with no errors") {
    const auto gt = straight_line_gt();
    const MotSummary s = verify_identity(evaluate_sequence(gt, gt, 2.0));
    CHECK(s.mota == doctest::Approx(1.0));
    CHECK(s.motp == doctest::Approx(0.0));
    CHECK(s.false_positives == 0);
    CHECK(s.misses == 0);
    CHECK(s.id_switches == 0);
    CHECK(s.fragmentations == 0);
    CHECK(s.gt_count == 10);
}

TEST_CASE("two interior misses and one stray track give MOTA 0.7 and one fragmentation") {
    const auto gt = straight_line_gt();
    std::vector<AnnotatedFrame> tracks;
    for (std::int64_t f = 0; f < 10; ++f) {
        AnnotatedFrame frame{f, {}};
        if (f != 4 && f != 5) frame.objects.push_back(obj(100, static_cast<double>(f), 0.0));
        if (f == 2) frame.objects.push_back(obj(200, 50.0, 50.0));  // never matches anything
        tracks.push_back(frame);
    }

    const MotSummary s = verify_identity(evaluate_sequence(gt, tracks, 2.0));
    CHECK(s.misses == 2);
    CHECK(s.false_positives == 1);
    CHECK(s.id_switches == 0);
    CHECK(s.fragmentations == 1);
    CHECK(s.mota == doctest::Approx(0.7));
    CHECK(s.motp == doctest::Approx(0.0));
}

TEST_CASE("an empty tracker output scores zero MOTA with every object missed") {
    const MotSummary s = verify_identity(evaluate_sequence(straight_line_gt(), {}, 2.0));
    CHECK(s.misses == 10);
    CHECK(s.false_positives == 0);
    CHECK(s.mota == doctest::Approx(0.0));
}

TEST_CASE("handing a trajectory to a new track id costs one id switch") {
    const auto gt = straight_line_gt();
    std::vector<AnnotatedFrame> tracks;
    for (std::int64_t f = 0; f < 10; ++f) {
        tracks.push_back({f, {obj(f < 5 ? 100 : 101, static_cast<double>(f), 0.0)}});
    }
    const MotSummary s = verify_identity(evaluate_sequence(gt, tracks, 2.0));
    CHECK(s.id_switches == 1);
    CHECK(s.fragmentations == 0);
    CHECK(s.mota == doctest::Approx(0.9));
}

TEST_CASE("an existing correspondence is kept even when a closer track appears") {
    std::vector<AnnotatedFrame> gt{{0, {obj(1, 0.0, 0.0)}}, {1, {obj(1, 0.0, 0.0)}}};
    std::vector<AnnotatedFrame> tracks{
        {0, {obj(100, 0.5, 0.0)}},
        {1, {obj(100, 0.9, 0.0), obj(101, 0.05, 0.0)}},
    };
    const MotSummary s = verify_identity(evaluate_sequence(gt, tracks, 2.0));
    CHECK(s.id_switches == 0);
    CHECK(s.motp == doctest::Approx((0.5 + 0.9) / 2.0));
    CHECK(s.false_positives == 1);  // the closer newcomer stays unmatched
}

TEST_CASE("matches beyond the radius are not made") {
    std::vector<AnnotatedFrame> gt{{0, {obj(1, 0.0, 0.0)}}};
    std::vector<AnnotatedFrame> tracks{{0, {obj(100, 3.0, 0.0)}}};
    const MotSummary s = verify_identity(evaluate_sequence(gt, tracks, 2.0));
    CHECK(s.misses == 1);
    CHECK(s.false_positives == 1);
}

TEST_CASE("input validation rejects bad radii, frames, and duplicate ids") {
    const auto gt = straight_line_gt();
    CHECK_THROWS_AS(evaluate_sequence(gt, gt, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(evaluate_sequence(gt, gt, -1.0), std::invalid_argument);

    auto unordered = gt;
    std::swap(unordered[2], unordered[3]);
    CHECK_THROWS_AS(evaluate_sequence(unordered, gt, 2.0), std::invalid_argument);

    std::vector<AnnotatedFrame> dupes{{0, {obj(1, 0.0, 0.0), obj(1, 5.0, 0.0)}}};
    CHECK_THROWS_AS(evaluate_sequence(dupes, {}, 2.0), std::invalid_argument);
}

TEST_CASE("single-class evaluation matches the per-class split") {
    const auto gt = straight_line_gt();
    const auto whole = evaluate_sequence(gt, gt, 2.0);
    const auto split = evaluate_per_class(gt, gt, {{"vehicle", 2.0}});
    REQUIRE(split.size() == 1);
    CHECK(split.at("vehicle").mota == whole.mota);
    CHECK(split.at("vehicle").gt_count == whole.gt_count);
}

TEST_CASE("disjoint classes are evaluated independently") {
    std::vector<AnnotatedFrame> gt, tracks;
    for (std::int64_t f = 0; f < 20; ++f) {
        gt.push_back({f,
                      {obj(1, static_cast<double>(f), 0.0, "vehicle"),
                       obj(2, 0.0, static_cast<double>(f), "pedestrian")}});
        AnnotatedFrame t{f, {obj(100, static_cast<double>(f) + 0.5, 0.0, "vehicle")}};
        if (f % 2 == 0) t.objects.push_back(obj(200, 0.3, static_cast<double>(f), "pedestrian"));
        tracks.push_back(t);
    }
    const auto both = evaluate_per_class(gt, tracks, {{"vehicle", 2.0}, {"pedestrian", 1.0}});

    // Composed run equals running each class on its own filtered data.
    const auto filter = [&](const std::vector<AnnotatedFrame>& in, const std::string& k) {
        std::vector<AnnotatedFrame> out;
        for (const auto& f : in) {
            AnnotatedFrame kept{f.frame, {}};
            for (const auto& o : f.objects) {
                if (o.klass == k) kept.objects.push_back(o);
            }
            out.push_back(kept);
        }
        return out;
    };
    for (const auto& [klass, radius] : std::map<std::string, double>{{"vehicle", 2.0},
                                                                     {"pedestrian", 1.0}}) {
        const auto alone = evaluate_sequence(filter(gt, klass), filter(tracks, klass), radius);
        CHECK(both.at(klass).mota == alone.mota);
        CHECK(both.at(klass).motp == alone.motp);
        CHECK(both.at(klass).false_positives == alone.false_positives);
        CHECK(both.at(klass).misses == alone.misses);
        CHECK(both.at(klass).gt_count == alone.gt_count);
    }
    CHECK_THROWS_AS(evaluate_per_class(gt, tracks, {{"vehicle", 2.0}}), std::invalid_argument);
}

namespace {

/// Randomized multi-object world with jittered tracker output.
void random_world(std::mt19937& rng, std::vector<AnnotatedFrame>& gt,
                  std::vector<AnnotatedFrame>& tracks) {
    std::uniform_real_distribution<double> jitter(-0.4, 0.4);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    gt.clear();
    tracks.clear();
    for (std::int64_t f = 0; f < 30; ++f) {
        AnnotatedFrame g{f, {}}, t{f, {}};
        for (std::int64_t o = 0; o < 6; ++o) {
            const double x = static_cast<double>(o) * 10.0 + static_cast<double>(f) * 0.3;
            const double y = static_cast<double>(o);
            g.objects.push_back(obj(o, x, y));
            if (coin(rng) < 0.85) {
                t.objects.push_back(obj(1000 + o, x + jitter(rng), y + jitter(rng)));
            }
        }
        gt.push_back(g);
        tracks.push_back(t);
    }
}

}  // namespace

TEST_CASE("globally relabeling track ids changes no metric") {
    std::mt19937 rng(2718);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<AnnotatedFrame> gt, tracks;
        random_world(rng, gt, tracks);
        auto relabeled = tracks;
        for (auto& f : relabeled) {
            for (auto& o : f.objects) o.id = 9999 - o.id;  // consistent bijection
        }
        const MotSummary a = verify_identity(evaluate_sequence(gt, tracks, 2.0));
        const MotSummary b = verify_identity(evaluate_sequence(gt, relabeled, 2.0));
        CHECK(a.mota == b.mota);
        CHECK(a.motp == b.motp);
        CHECK(a.false_positives == b.false_positives);
        CHECK(a.misses == b.misses);
        CHECK(a.id_switches == b.id_switches);
        CHECK(a.fragmentations == b.fragmentations);
    }
}

TEST_CASE("one spurious never-matching track per frame adds exactly that many false positives") {
    std::mt19937 rng(3141);
    std::vector<AnnotatedFrame> gt, tracks;
    random_world(rng, gt, tracks);
    auto polluted = tracks;
    for (auto& f : polluted) f.objects.push_back(obj(31337, 500.0, 500.0));

    const MotSummary a = verify_identity(evaluate_sequence(gt, tracks, 2.0));
    const MotSummary b = verify_identity(evaluate_sequence(gt, polluted, 2.0));
    CHECK(b.false_positives == a.false_positives + static_cast<std::int64_t>(tracks.size()));
    CHECK(b.misses == a.misses);
    CHECK(b.id_switches == a.id_switches);
    CHECK(b.fragmentations == a.fragmentations);
    CHECK(b.motp == doctest::Approx(a.motp));
}

TEST_CASE("object order within a frame does not affect the evaluation") {
    std::mt19937 rng(1618);
    std::vector<AnnotatedFrame> gt, tracks;
    random_world(rng, gt, tracks);
    auto shuffled_gt = gt;
    auto shuffled_tracks = tracks;
    for (auto& f : shuffled_gt) std::shuffle(f.objects.begin(), f.objects.end(), rng);
    for (auto& f : shuffled_tracks) std::shuffle(f.objects.begin(), f.objects.end(), rng);

    const MotSummary a = evaluate_sequence(gt, tracks, 2.0);
    const MotSummary b = evaluate_sequence(shuffled_gt, shuffled_tracks, 2.0);
    CHECK(a.mota == b.mota);
    CHECK(a.motp == b.motp);
    CHECK(a.false_positives == b.false_positives);
    CHECK(a.misses == b.misses);
    CHECK(a.id_switches == b.id_switches);
    CHECK(a.fragmentations == b.fragmentations);
}
