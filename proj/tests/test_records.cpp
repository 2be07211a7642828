#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "errors.hpp"
#include "records.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace pmbm;
namespace fs = std::filesystem;

namespace {

/// Unique scratch directory, removed on destruction.
struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = fs::temp_directory_path() /
               ("records_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    REQUIRE(static_cast<bool>(out));
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(static_cast<bool>(in));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string detection_line(std::int64_t frame, double x, double y, double score,
                           const std::string& klass = "vehicle") {
    std::ostringstream out;
    out << R"({"frame": )" << frame << R"(, "timestamp": )" << 0.1 * frame
        << R"(, "class": ")" << klass << R"(", "center": [)" << x << ", " << y
        << R"(, 0.5], "size": [4.0, 2.0, 1.5], "yaw": 0.3, "score": )" << score << "}";
    return out.str();
}

DetectionRecord sample_detection(std::mt19937_64& gen, std::int64_t frame) {
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    DetectionRecord r;
    r.frame = frame;
    r.timestamp = frame * 0.1 + unit(gen) * 1e-3;
    r.klass = (gen() % 2 == 0) ? "vehicle" : "pedestrian";
    r.center = {u(gen), u(gen), u(gen)};
    r.size = {std::abs(u(gen)) * 0.1, std::abs(u(gen)) * 0.1, std::abs(u(gen)) * 0.1};
    r.yaw = u(gen) * 0.01;
    r.score = unit(gen);
    return r;
}

bool same_detection(const DetectionRecord& a, const DetectionRecord& b) {
    return a.frame == b.frame && a.timestamp == b.timestamp && a.klass == b.klass &&
           a.center == b.center && a.size == b.size && a.yaw == b.yaw && a.score == b.score;
}

}  // namespace

TEST_CASE("empty detections file yields zero frames") {
    TempDir dir;
    const std::string path = dir.file("empty.jsonl");
    write_file(path, "");
    CHECK(read_detections(path).empty());
}

TEST_CASE("records sharing a frame form one group, order preserved") {
    TempDir dir;
    const std::string path = dir.file("dets.jsonl");
    write_file(path, detection_line(0, 1.0, 0.0, 0.9) + "\n" +
                         detection_line(0, 2.0, 0.0, 0.8) + "\n" +
                         detection_line(0, 3.0, 0.0, 0.7) + "\n" +
                         detection_line(2, 4.0, 0.0, 0.6) + "\n");
    const auto groups = read_detections(path);
    REQUIRE(groups.size() == 2);
    REQUIRE(groups[0].size() == 3);
    CHECK(groups[0][0].center[0] == 1.0);
    CHECK(groups[0][1].center[0] == 2.0);
    CHECK(groups[0][2].center[0] == 3.0);
    REQUIRE(groups[1].size() == 1);
    CHECK(groups[1][0].frame == 2);
}

TEST_CASE("blank lines are skipped") {
    TempDir dir;
    const std::string path = dir.file("gaps.jsonl");
    write_file(path, "\n" + detection_line(0, 1.0, 0.0, 0.9) + "\n\n" +
                         detection_line(1, 2.0, 0.0, 0.8) + "\n\n");
    CHECK(read_detections(path).size() == 2);
}

TEST_CASE("out-of-range score is rejected naming the field and line") {
    TempDir dir;
    const std::string path = dir.file("bad_score.jsonl");
    write_file(path, detection_line(0, 1.0, 0.0, 0.9) + "\n" +
                         detection_line(1, 2.0, 0.0, 1.5) + "\n");
    try {
        read_detections(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string what = e.what();
        CHECK(what.find("score") != std::string::npos);
        CHECK(what.find(":2:") != std::string::npos);
        CHECK(e.line() == 2);
    }
}

TEST_CASE("malformed JSON is rejected with its line number") {
    TempDir dir;
    const std::string path = dir.file("broken.jsonl");
    write_file(path, detection_line(0, 1.0, 0.0, 0.9) + "\n" + "{not json\n");
    try {
        read_detections(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
}

TEST_CASE("non-monotone frames are a format error") {
    TempDir dir;
    const std::string path = dir.file("shuffled.jsonl");
    write_file(path, detection_line(3, 1.0, 0.0, 0.9) + "\n" +
                         detection_line(1, 2.0, 0.0, 0.8) + "\n");
    CHECK_THROWS_AS(read_detections(path), ParseError);
}

TEST_CASE("missing and ill-typed fields are named") {
    TempDir dir;
    const std::string path = dir.file("fields.jsonl");

    write_file(path, R"({"frame": 0, "timestamp": 0.0, "class": "vehicle"})" "\n");
    CHECK_THROWS_WITH_AS(read_detections(path),
                         doctest::Contains("center"), ParseError);

    write_file(path,
               R"({"frame": 0, "timestamp": 0.0, "class": 7, "center": [0,0,0],)"
               R"( "size": [1,1,1], "yaw": 0.0, "score": 0.5})" "\n");
    CHECK_THROWS_WITH_AS(read_detections(path), doctest::Contains("class"), ParseError);

    write_file(path,
               R"({"frame": 0, "timestamp": 0.0, "class": "vehicle", "center": [0,0],)"
               R"( "size": [1,1,1], "yaw": 0.0, "score": 0.5})" "\n");
    CHECK_THROWS_WITH_AS(read_detections(path), doctest::Contains("center"), ParseError);

    write_file(path,
               R"({"frame": 0, "timestamp": 0.0, "class": "vehicle", "center": [0,0,null],)"
               R"( "size": [1,1,1], "yaw": 0.0, "score": 0.5})" "\n");
    CHECK_THROWS_WITH_AS(read_detections(path), doctest::Contains("center"), ParseError);
}

TEST_CASE("missing file raises an I/O error") {
    CHECK_THROWS_AS(read_detections("/nonexistent/nowhere.jsonl"), IoError);
    CHECK_THROWS_AS(read_tracks("/nonexistent/nowhere.jsonl"), IoError);
    CHECK_THROWS_AS(read_poses("/nonexistent/nowhere.jsonl"), IoError);
}

TEST_CASE("detection write/read round trip is lossless") {
    TempDir dir;
    const std::string path = dir.file("roundtrip.jsonl");
    std::mt19937_64 gen(7);
    std::vector<DetectionRecord> records;
    for (std::int64_t frame = 0; frame < 20; ++frame) {
        const int count = 1 + static_cast<int>(gen() % 4);
        for (int i = 0; i < count; ++i) records.push_back(sample_detection(gen, frame));
    }
    write_detections(path, records);

    const auto groups = read_detections(path);
    std::size_t seen = 0;
    for (const auto& group : groups) {
        for (const auto& r : group) {
            REQUIRE(seen < records.size());
            CHECK(same_detection(r, records[seen]));
            ++seen;
        }
    }
    CHECK(seen == records.size());

    // A second write of the same data is byte-identical, and no temp file
    // is left behind.
    const std::string first = read_file(path);
    write_detections(path, records);
    CHECK(read_file(path) == first);
    CHECK(!fs::exists(path + ".tmp"));
}

TEST_CASE("track write/read round trip is lossless") {
    TempDir dir;
    const std::string path = dir.file("tracks.jsonl");
    std::mt19937_64 gen(11);
    std::vector<TrackRecord> records;
    for (std::int64_t frame = 0; frame < 15; ++frame) {
        for (std::int64_t id = 0; id < 3; ++id) {
            TrackRecord r;
            r.det = sample_detection(gen, frame);
            r.track_id = id;
            r.existence = 0.5 + 0.5 * (id / 3.0);
            r.velocity = {1.25 * id, -0.5};
            records.push_back(r);
        }
    }
    write_tracks(path, records);
    const auto loaded = read_tracks(path);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(same_detection(loaded[i].det, records[i].det));
        CHECK(loaded[i].track_id == records[i].track_id);
        CHECK(loaded[i].existence == records[i].existence);
        CHECK(loaded[i].velocity == records[i].velocity);
    }
}

TEST_CASE("track-specific fields are validated") {
    TempDir dir;
    const std::string path = dir.file("badtracks.jsonl");
    const std::string base =
        R"("timestamp": 0.0, "class": "vehicle", "center": [0,0,0], "size": [1,1,1],)"
        R"( "yaw": 0.0, "score": 0.5)";

    write_file(path, R"({"frame": 0, )" + base +
                         R"(, "track_id": -1, "existence": 0.5, "velocity": [0,0]})" "\n");
    CHECK_THROWS_WITH_AS(read_tracks(path), doctest::Contains("track_id"), ParseError);

    write_file(path, R"({"frame": 0, )" + base +
                         R"(, "track_id": 1, "existence": 1.5, "velocity": [0,0]})" "\n");
    CHECK_THROWS_WITH_AS(read_tracks(path), doctest::Contains("existence"), ParseError);

    write_file(path, R"({"frame": 0, )" + base +
                         R"(, "track_id": 1, "existence": 0.5, "velocity": [0,0,0]})" "\n");
    CHECK_THROWS_WITH_AS(read_tracks(path), doctest::Contains("velocity"), ParseError);
}

TEST_CASE("pose sidecar parses and rejects duplicate frames") {
    TempDir dir;
    const std::string path = dir.file("poses.jsonl");
    write_file(path, R"({"frame": 0, "x": 1.0, "y": 2.0, "yaw": 0.0})" "\n"
                     R"({"frame": 1, "x": 1.5, "y": 2.5, "yaw": 0.1})" "\n");
    const auto poses = read_poses(path);
    REQUIRE(poses.size() == 2);
    CHECK(poses.at(0).x == 1.0);
    CHECK(poses.at(1).yaw == 0.1);

    write_file(path, R"({"frame": 0, "x": 1.0, "y": 2.0, "yaw": 0.0})" "\n"
                     R"({"frame": 0, "x": 9.0, "y": 9.0, "yaw": 0.9})" "\n");
    CHECK_THROWS_AS(read_poses(path), ParseError);
}

TEST_CASE("pose application rotates then translates") {
    DetectionRecord det;
    det.center = {1.0, 0.0, 0.7};
    det.yaw = 0.25;
    Se2Pose pose;
    pose.x = 1.0;
    pose.y = 2.0;
    pose.yaw = M_PI / 2.0;

    const DetectionRecord moved = apply_pose(det, pose);
    CHECK(moved.center[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(moved.center[1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(moved.center[2] == 0.7);  // planar transform leaves z alone
    CHECK(moved.yaw == doctest::Approx(0.25 + M_PI / 2.0));

    Se2Pose identity;
    const DetectionRecord same = apply_pose(det, identity);
    CHECK(same.center == det.center);
    CHECK(same.yaw == det.yaw);
}

TEST_CASE("track records group into annotated frames") {
    std::vector<TrackRecord> records;
    for (std::int64_t frame : {0, 0, 2}) {
        TrackRecord r;
        r.det.frame = frame;
        r.det.klass = frame == 2 ? "pedestrian" : "vehicle";
        r.det.center = {double(frame), 1.0, 0.0};
        r.track_id = 10 + frame;
        records.push_back(r);
    }
    const auto frames = tracks_to_frames(records);
    REQUIRE(frames.size() == 2);
    CHECK(frames[0].frame == 0);
    REQUIRE(frames[0].objects.size() == 2);
    CHECK(frames[0].objects[0].id == 10);
    CHECK(frames[0].objects[0].klass == "vehicle");
    CHECK(frames[1].frame == 2);
    REQUIRE(frames[1].objects.size() == 1);
    CHECK(frames[1].objects[0].id == 12);
    CHECK(frames[1].objects[0].position(0) == 2.0);
}
