// Command-line front end for the pmbmtrack engine. Deliberately a thin
// shell over the C API: every code path a CLI user exercises is the same
// one an embedding application gets.

#include <pmbmtrack/pmbmtrack.h>

#include <CLI11.hpp>

#include <cstdio>
#include <cstring>
#include <string>

namespace {

const char* optional_path(const std::string& path) {
    return path.empty() ? nullptr : path.c_str();
}

/// Print the rendered report (when present) on success, or the library's
/// diagnostic on failure, and translate the status into an exit code.
int finish(pmbmtrack_status status, char* report_text) {
    if (status != PMBMTRACK_OK) {
        std::fprintf(stderr, "error: %s\n", pmbmtrack_last_error());
        pmbmtrack_string_free(report_text);
        return 1;
    }
    if (report_text != nullptr && report_text[0] != '\0') {
        std::fputs(report_text, stdout);
        if (report_text[std::strlen(report_text) - 1] != '\n') std::fputc('\n', stdout);
    }
    pmbmtrack_string_free(report_text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pmbmtrack: multi-object tracking over JSON-lines detection files"};
    app.require_subcommand(1);

    // track <detections> --config <cfg> --out <tracks>
    //       [--gt <gt>] [--report <path>] [--poses <poses>]
    std::string detections, config, out, gt, report, poses;
    CLI::App* track = app.add_subcommand("track", "Track a detection file and write track records");
    track->add_option("detections", detections, "Input detections (JSON lines)")->required();
    track->add_option("--config", config, "Tracker configuration (flat JSON; defaults if omitted)");
    track->add_option("--out", out, "Output track file")->required();
    track->add_option("--gt", gt, "Ground-truth track file; enables evaluation");
    track->add_option("--report", report, "Write the metrics report here (and JSON at <path>.json)");
    track->add_option("--poses", poses, "Per-frame ego poses applied to detections at ingestion");

    // simulate --config <scenario> --out-dets <d> --out-gt <g>
    std::string sim_config, out_dets, out_gt;
    CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic scenario");
    simulate->add_option("--config", sim_config,
                         "Scenario configuration (flat JSON; defaults if omitted)");
    simulate->add_option("--out-dets", out_dets, "Output detection file")->required();
    simulate->add_option("--out-gt", out_gt, "Output ground-truth track file")->required();

    // evaluate --gt <g> --tracks <t> --radius-vehicle 2.0 --radius-pedestrian 1.0
    std::string eval_gt, eval_tracks, eval_report;
    double radius_vehicle = 2.0;
    double radius_pedestrian = 1.0;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Score a track file against ground truth");
    evaluate->add_option("--gt", eval_gt, "Ground-truth track file")->required();
    evaluate->add_option("--tracks", eval_tracks, "Tracker output file")->required();
    evaluate->add_option("--radius-vehicle", radius_vehicle, "Vehicle match radius (m)");
    evaluate->add_option("--radius-pedestrian", radius_pedestrian, "Pedestrian match radius (m)");
    evaluate->add_option("--report", eval_report,
                         "Write the metrics report here (and JSON at <path>.json)");

    CLI11_PARSE(app, argc, argv);

    if (track->parsed()) {
        char* report_text = nullptr;
        const pmbmtrack_status status = pmbmtrack_run_pipeline(
            detections.c_str(), optional_path(config), out.c_str(), optional_path(gt),
            optional_path(report), optional_path(poses), nullptr, &report_text);
        return finish(status, report_text);
    }
    if (simulate->parsed()) {
        return finish(
            pmbmtrack_simulate(optional_path(sim_config), out_dets.c_str(), out_gt.c_str()),
            nullptr);
    }
    // evaluate
    const std::string radii = "{\"vehicle\": " + std::to_string(radius_vehicle) +
                              ", \"pedestrian\": " + std::to_string(radius_pedestrian) + "}";
    char* report_text = nullptr;
    const pmbmtrack_status status =
        pmbmtrack_evaluate(eval_gt.c_str(), eval_tracks.c_str(), radii.c_str(),
                           optional_path(eval_report), nullptr, &report_text);
    return finish(status, report_text);
}
