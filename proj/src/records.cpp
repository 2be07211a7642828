#include "records.hpp"

#include "errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace pmbm {

namespace {

using nlohmann::json;

[[noreturn]] void fail_line(const std::string& path, long line, const std::string& what) {
    throw ParseError(path + ":" + std::to_string(line) + ": " + what, line);
}

double finite_number(const json& j, const char* field, const std::string& path, long line) {
    const auto it = j.find(field);
    if (it == j.end() || !it->is_number()) {
        fail_line(path, line, std::string("missing or non-numeric field '") + field + "'");
    }
    const double v = it->get<double>();
    if (!std::isfinite(v)) fail_line(path, line, std::string("field '") + field + "' not finite");
    return v;
}

std::int64_t integer_field(const json& j, const char* field, const std::string& path, long line) {
    const auto it = j.find(field);
    if (it == j.end() || !it->is_number_integer()) {
        fail_line(path, line, std::string("missing or non-integer field '") + field + "'");
    }
    return it->get<std::int64_t>();
}

std::string string_field(const json& j, const char* field, const std::string& path, long line) {
    const auto it = j.find(field);
    if (it == j.end() || !it->is_string()) {
        fail_line(path, line, std::string("missing or non-string field '") + field + "'");
    }
    return it->get<std::string>();
}

template <std::size_t N>
std::array<double, N> vector_field(const json& j, const char* field, const std::string& path,
                                   long line) {
    const auto it = j.find(field);
    if (it == j.end() || !it->is_array() || it->size() != N) {
        fail_line(path, line,
                  std::string("field '") + field + "' must be an array of " + std::to_string(N));
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        if (!(*it)[i].is_number() || !std::isfinite((*it)[i].template get<double>())) {
            fail_line(path, line, std::string("field '") + field + "' has a non-finite entry");
        }
        out[i] = (*it)[i].template get<double>();
    }
    return out;
}

double unit_interval_field(const json& j, const char* field, const std::string& path, long line) {
    const double v = finite_number(j, field, path, line);
    if (v < 0.0 || v > 1.0) {
        std::ostringstream msg;
        msg << "field '" << field << "' out of range [0,1]: " << v;
        fail_line(path, line, msg.str());
    }
    return v;
}

DetectionRecord parse_detection(const json& j, const std::string& path, long line) {
    DetectionRecord r;
    r.frame = integer_field(j, "frame", path, line);
    r.timestamp = finite_number(j, "timestamp", path, line);
    r.klass = string_field(j, "class", path, line);
    r.center = vector_field<3>(j, "center", path, line);
    r.size = vector_field<3>(j, "size", path, line);
    r.yaw = finite_number(j, "yaw", path, line);
    r.score = unit_interval_field(j, "score", path, line);
    return r;
}

json detection_json(const DetectionRecord& r) {
    json j;
    j["frame"] = r.frame;
    j["timestamp"] = r.timestamp;
    j["class"] = r.klass;
    j["center"] = r.center;
    j["size"] = r.size;
    j["yaw"] = r.yaw;
    j["score"] = r.score;
    return j;
}

json parse_line(const std::string& text, const std::string& path, long line) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail_line(path, line, "not a JSON object");
    return j;
}

/// Iterate non-empty lines of a JSONL file, tracking frame monotonicity.
template <typename Fn>
void for_each_record(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string text;
    long line = 0;
    std::int64_t prev_frame = INT64_MIN;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        const json j = parse_line(text, path, line);
        const std::int64_t frame = integer_field(j, "frame", path, line);
        if (frame < prev_frame) {
            fail_line(path, line,
                      "frame " + std::to_string(frame) + " after frame " +
                          std::to_string(prev_frame) + " (frames must be nondecreasing)");
        }
        prev_frame = frame;
        fn(j, line, frame);
    }
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out << content;
        if (!out.flush()) throw IoError("write to '" + tmp + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

std::vector<std::vector<DetectionRecord>> read_detections(const std::string& path) {
    std::vector<std::vector<DetectionRecord>> groups;
    for_each_record(path, [&](const json& j, long line, std::int64_t frame) {
        DetectionRecord r = parse_detection(j, path, line);
        if (groups.empty() || groups.back().front().frame != frame) {
            groups.emplace_back();
        }
        groups.back().push_back(std::move(r));
    });
    return groups;
}

std::vector<TrackRecord> read_tracks(const std::string& path) {
    std::vector<TrackRecord> records;
    for_each_record(path, [&](const json& j, long line, std::int64_t) {
        TrackRecord r;
        r.det = parse_detection(j, path, line);
        r.track_id = integer_field(j, "track_id", path, line);
        if (r.track_id < 0) fail_line(path, line, "field 'track_id' is negative");
        r.existence = unit_interval_field(j, "existence", path, line);
        r.velocity = vector_field<2>(j, "velocity", path, line);
        records.push_back(std::move(r));
    });
    return records;
}

void write_detections(const std::string& path, const std::vector<DetectionRecord>& records) {
    std::string content;
    for (const auto& r : records) {
        content += detection_json(r).dump();
        content += '\n';
    }
    write_text_atomic(path, content);
}

void write_tracks(const std::string& path, const std::vector<TrackRecord>& records) {
    std::string content;
    for (const auto& r : records) {
        json j = detection_json(r.det);
        j["track_id"] = r.track_id;
        j["existence"] = r.existence;
        j["velocity"] = r.velocity;
        content += j.dump();
        content += '\n';
    }
    write_text_atomic(path, content);
}

std::map<std::int64_t, Se2Pose> read_poses(const std::string& path) {
    std::map<std::int64_t, Se2Pose> poses;
    for_each_record(path, [&](const json& j, long line, std::int64_t frame) {
        if (poses.count(frame)) fail_line(path, line, "duplicate pose for frame");
        Se2Pose p;
        p.x = finite_number(j, "x", path, line);
        p.y = finite_number(j, "y", path, line);
        p.yaw = finite_number(j, "yaw", path, line);
        poses[frame] = p;
    });
    return poses;
}

DetectionRecord apply_pose(const DetectionRecord& det, const Se2Pose& pose) {
    DetectionRecord out = det;
    const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
    out.center[0] = pose.x + c * det.center[0] - s * det.center[1];
    out.center[1] = pose.y + s * det.center[0] + c * det.center[1];
    out.yaw = det.yaw + pose.yaw;
    return out;
}

std::vector<AnnotatedFrame> tracks_to_frames(const std::vector<TrackRecord>& records) {
    std::map<std::int64_t, AnnotatedFrame> by_frame;
    for (const auto& r : records) {
        AnnotatedFrame& f = by_frame[r.det.frame];
        f.frame = r.det.frame;
        AnnotatedObject o;
        o.id = r.track_id;
        o.position << r.det.center[0], r.det.center[1];
        o.klass = r.det.klass;
        f.objects.push_back(std::move(o));
    }
    std::vector<AnnotatedFrame> out;
    out.reserve(by_frame.size());
    for (auto& [frame, group] : by_frame) out.push_back(std::move(group));
    return out;
}

}  // namespace pmbm
