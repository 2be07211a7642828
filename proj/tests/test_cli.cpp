#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

// Drives the installed command-line binary as a subprocess; CLI_BINARY is
// injected by the build so the test never guesses at paths.

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = fs::temp_directory_path() /
               ("pmbm_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr interleaved
};

RunResult run_cli(const std::string& args, const TempDir& dir) {
    const std::string capture = dir.file("capture.txt");
    const std::string command = std::string(CLI_BINARY) + " " + args + " > " + capture + " 2>&1";
    const int raw = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(capture);
    std::ostringstream text;
    text << in.rdbuf();
    result.output = text.str();
    return result;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("simulate, track, and evaluate round trip") {
    TempDir dir;
    write_file(dir.file("scenario.json"),
               R"({"seed": 3, "n_frames": 30, "n_initial": 3,
                   "detection_prob": 0.95, "position_noise_std": 0.2, "clutter_rate": 2.0})");

    auto sim = run_cli("simulate --config " + dir.file("scenario.json") + " --out-dets " +
                           dir.file("d.jsonl") + " --out-gt " + dir.file("g.jsonl"),
                       dir);
    REQUIRE(sim.exit_code == 0);
    CHECK(fs::exists(dir.file("d.jsonl")));
    CHECK(fs::exists(dir.file("g.jsonl")));

    auto track = run_cli("track " + dir.file("d.jsonl") + " --out " + dir.file("t.jsonl") +
                             " --gt " + dir.file("g.jsonl") + " --report " + dir.file("rep.txt"),
                         dir);
    REQUIRE(track.exit_code == 0);
    CHECK(track.output.find("overall") != std::string::npos);
    CHECK(track.output.find("frames: 30") != std::string::npos);
    CHECK(fs::exists(dir.file("t.jsonl")));
    CHECK(fs::exists(dir.file("rep.txt")));
    CHECK(fs::exists(dir.file("rep.txt.json")));

    auto eval = run_cli("evaluate --gt " + dir.file("g.jsonl") + " --tracks " + dir.file("t.jsonl") +
                            " --radius-vehicle 2.0 --radius-pedestrian 1.0",
                        dir);
    REQUIRE(eval.exit_code == 0);
    CHECK(eval.output.find("vehicle") != std::string::npos);
    CHECK(eval.output.find("mota") != std::string::npos);
}

TEST_CASE("track without ground truth stays quiet and succeeds") {
    TempDir dir;
    write_file(dir.file("scenario.json"), R"({"seed": 9, "n_frames": 10, "n_initial": 2})");
    REQUIRE(run_cli("simulate --config " + dir.file("scenario.json") + " --out-dets " +
                        dir.file("d.jsonl") + " --out-gt " + dir.file("g.jsonl"),
                    dir)
                .exit_code == 0);
    auto track = run_cli("track " + dir.file("d.jsonl") + " --out " + dir.file("t.jsonl"), dir);
    CHECK(track.exit_code == 0);
    CHECK(fs::exists(dir.file("t.jsonl")));
}

TEST_CASE("failures exit nonzero with a diagnostic") {
    TempDir dir;
    auto missing = run_cli("track " + dir.file("absent.jsonl") + " --out " + dir.file("t.jsonl"), dir);
    CHECK(missing.exit_code == 1);
    CHECK(missing.output.find("error:") != std::string::npos);
    CHECK(missing.output.find("absent.jsonl") != std::string::npos);

    write_file(dir.file("bad.jsonl"), "{broken\n");
    auto parse = run_cli("track " + dir.file("bad.jsonl") + " --out " + dir.file("t.jsonl"), dir);
    CHECK(parse.exit_code == 1);
    CHECK(parse.output.find(":1:") != std::string::npos);

    auto usage = run_cli("track", dir);
    CHECK(usage.exit_code != 0);

    auto unknown = run_cli("frobnicate", dir);
    CHECK(unknown.exit_code != 0);
}

TEST_CASE("help lists the three subcommands") {
    TempDir dir;
    auto help = run_cli("--help", dir);
    CHECK(help.exit_code == 0);
    CHECK(help.output.find("track") != std::string::npos);
    CHECK(help.output.find("simulate") != std::string::npos);
    CHECK(help.output.find("evaluate") != std::string::npos);
}
