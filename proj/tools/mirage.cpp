// mirage: reflection-noise removal for terrestrial laser scans.
//
// Subcommands compose via files; `pipeline` runs the whole chain in one
// process. Exit codes: 0 success, 2 config error, 3 I/O error, 4 stage
// failure.

#include "mirage/filters.hpp"
#include "mirage/io.hpp"
#include "mirage/metrics.hpp"
#include "mirage/pipeline.hpp"
#include "mirage/planes.hpp"
#include "mirage/radiometry.hpp"
#include "mirage/scoring.hpp"
#include "mirage/simulator.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace mirage;

constexpr int kOk = 0, kConfigError = 2, kIoError = 3, kStageError = 4;

PipelineConfig make_config(const std::string& config_path, std::optional<unsigned> threads,
                           std::optional<std::uint64_t> seed) {
    PipelineConfig cfg = config_path.empty() ? default_pipeline_config()
                                             : load_pipeline_config(config_path);
    if (threads) cfg.threads = *threads;
    if (seed) cfg.seed = *seed;
    cfg.planes.threads = cfg.threads;
    cfg.scoring.threads = cfg.threads;
    cfg.planes.seed = cfg.seed;
    return cfg;
}

int cmd_simulate(const std::string& preset, const std::string& scene_path,
                 const std::string& output, std::optional<std::uint64_t> seed,
                 std::optional<double> step, std::optional<double> noise_sigma,
                 std::optional<double> thickness, const std::string& calibration_out,
                 const std::string& planes_out, const std::string& scene_out) {
    SceneSpec spec = scene_path.empty() ? scene_presets(preset) : load_scene_json(scene_path);
    if (seed) spec.seed = *seed;
    if (step) spec.grid.step_deg = *step;
    if (noise_sigma) spec.noise_sigma = *noise_sigma;
    if (thickness)
        for (auto& g : spec.glasses) g.thickness = *thickness;

    const SimulationResult sim = trace_scene(spec);
    save_cloud(sim.cloud, output, CloudFormat::PlyBinary);
    std::cout << "simulated " << sim.cloud.points.size() << " points -> " << output << "\n";
    if (!calibration_out.empty())
        save_calibration_csv(scene_calibration_samples(spec), calibration_out);
    if (!planes_out.empty()) save_planes_json(scene_glass_planes(spec), planes_out);
    if (!scene_out.empty()) save_scene_json(spec, scene_out);
    return kOk;
}

int cmd_correct(const PipelineConfig& cfg, const std::string& input, const std::string& output,
                const std::string& model_out) {
    PointCloud cloud = load_cloud_auto(input);
    SpatialIndex index(cloud);
    const auto geom = incidence_geometry(cloud, index, cfg.normal_k, cfg.threads);

    CorrectionModel model;
    if (!cfg.model_json.empty()) {
        model = load_model_json(cfg.model_json);
    } else if (!cfg.calibration_csv.empty()) {
        model = fit_correction(load_calibration_csv(cfg.calibration_csv), cfg.angle_degree,
                               cfg.range_degree, 1.0, cfg.ref_range);
    } else {
        model = self_calibrate(cloud, geom, cfg.angle_degree, cfg.range_degree, cfg.ref_range);
    }
    const std::size_t bad = correct_intensity(cloud, geom, model, cfg.threads);
    save_cloud(cloud, output, CloudFormat::PlyBinary);
    if (!model_out.empty()) save_model_json(model, model_out);
    std::cout << "corrected " << cloud.points.size() - bad << " points (" << bad
              << " uncorrectable) -> " << output << "\n";
    return kOk;
}

int cmd_detect_planes(const PipelineConfig& cfg, const std::string& input,
                      const std::string& output) {
    const PointCloud cloud = load_cloud_auto(input);
    const auto candidates = extract_reflective_candidates(cloud, cfg.threshold);
    const PlaneSet planes = detect_reflective_planes(cloud, candidates, cfg.planes);
    save_planes_json(planes, output);
    std::cout << "detected " << planes.size() << " reflective plane(s) from "
              << candidates.size() << " candidates -> " << output << "\n";
    return kOk;
}

int cmd_score(const PipelineConfig& cfg, const std::string& input, const std::string& planes_path,
              const std::string& output) {
    const PointCloud cloud = load_cloud_auto(input);
    const PlaneSet planes = load_planes_json(planes_path);
    SpatialIndex index(cloud);
    NormalCache normals(cloud, index, cfg.scoring.descriptor.normal_k, cfg.threads);
    const auto scores = score_cloud(cloud, index, normals, planes, cfg.scoring);
    save_scores_csv(scores, output);
    std::cout << "scored " << scores.size() << " points -> " << output << "\n";
    return kOk;
}

int cmd_remove(const PipelineConfig& cfg, const std::string& input, const std::string& scores_path,
               const std::string& output, const std::string& labeled_out) {
    PointCloud cloud = load_cloud_auto(input);
    const auto scores = load_scores_csv(scores_path);
    const PointCloud cleaned = remove_virtual(cloud, scores, cfg.scoring.removal_threshold);
    save_cloud(cleaned, output, CloudFormat::PlyBinary);
    if (!labeled_out.empty()) save_cloud(cloud, labeled_out, CloudFormat::PlyBinary);
    std::cout << "kept " << cleaned.points.size() << " of " << cloud.points.size()
              << " points -> " << output << "\n";
    return kOk;
}

int cmd_eval(const std::string& input, std::optional<std::uint64_t> tp,
             std::optional<std::uint64_t> fp, std::optional<std::uint64_t> tn,
             std::optional<std::uint64_t> fn) {
    ConfusionCounts c;
    if (tp || fp || tn || fn) {
        c.tp = tp.value_or(0);
        c.fp = fp.value_or(0);
        c.tn = tn.value_or(0);
        c.fn = fn.value_or(0);
    } else {
        const PointCloud cloud = load_cloud_auto(input);
        std::vector<GtLabel> gt;
        std::vector<PredLabel> pred;
        for (const auto& p : cloud.points) {
            gt.push_back(p.gt_label);
            pred.push_back(p.pred_label);
        }
        c = confusion(gt, pred);
        if (c.total() == 0) {
            std::cout << "metrics: unavailable (no ground-truth labels)\n";
            return kOk;
        }
    }
    std::cout << format_report(c);
    const auto s = snr(c);
    std::cout << "snr_db: " << (s ? std::to_string(*s) : "undefined") << "\n";
    return kOk;
}

int cmd_pipeline(PipelineConfig cfg, const std::string& input, const std::string& output_dir) {
    if (!input.empty()) cfg.input = input;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    const PipelineResult result = run_pipeline(cfg);
    std::cout << pipeline_report_text(cfg, result);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mirage: removes reflection-induced virtual points from TLS point clouds"};
    app.require_subcommand(1);

    std::string config_path, input, output, output_dir;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "pipeline JSON config")->configurable(false);
    app.add_option("--threads", threads, "worker thread cap (0 = all cores)");
    app.add_option("--seed", seed, "random seed override");

    bool print_default = false;
    app.add_flag("--print-default-config", print_default,
                 "print the default pipeline config as JSON and exit");

    auto* sim = app.add_subcommand("simulate", "ray-trace a synthetic scene with glass walls");
    std::string preset = "one-wall", scene_path, calib_out, planes_out, scene_out;
    std::optional<double> step, noise_sigma, thickness;
    sim->add_option("--preset", preset,
                    "one-wall | two-wall | three-wall | four-wall-courtyard | indoor-tile");
    sim->add_option("--scene", scene_path, "scene JSON (overrides --preset)");
    sim->add_option("--output", output, "output PLY")->required();
    sim->add_option("--step", step, "beam angular step in degrees");
    sim->add_option("--noise-sigma", noise_sigma, "range noise sigma in meters");
    sim->add_option("--thickness", thickness, "glass thickness in meters (ghost returns)");
    sim->add_option("--calibration-out", calib_out, "write calibration CSV");
    sim->add_option("--planes-out", planes_out, "write ground-truth glass planes JSON");
    sim->add_option("--scene-out", scene_out, "write the resolved scene JSON");

    auto* cor = app.add_subcommand("correct", "radiometric intensity correction");
    std::string model_out;
    cor->add_option("--input", input, "input cloud")->required();
    cor->add_option("--output", output, "output PLY with intensity_corrected")->required();
    cor->add_option("--model-out", model_out, "write the fitted model JSON");

    auto* det = app.add_subcommand("detect-planes", "detect reflective planes");
    det->add_option("--input", input, "corrected input cloud")->required();
    det->add_option("--output", output, "output planes JSON")->required();

    auto* sco = app.add_subcommand("score", "virtual-point scoring");
    std::string planes_path, scores_path, labeled_out;
    sco->add_option("--input", input, "corrected input cloud")->required();
    sco->add_option("--planes", planes_path, "planes JSON")->required();
    sco->add_option("--output", output, "output scores CSV")->required();

    auto* rem = app.add_subcommand("remove", "remove points scored as virtual");
    rem->add_option("--input", input, "input cloud")->required();
    rem->add_option("--scores", scores_path, "scores CSV")->required();
    rem->add_option("--output", output, "cleaned output PLY")->required();
    rem->add_option("--labeled-out", labeled_out, "full cloud with predicted labels");

    auto* eva = app.add_subcommand("eval", "confusion metrics from labels or raw counts");
    std::optional<std::uint64_t> tp, fp, tn, fn;
    eva->add_option("--input", input, "cloud with gt and predicted labels");
    eva->add_option("--tp", tp, "true positives (real kept)");
    eva->add_option("--fp", fp, "false positives (virtual kept)");
    eva->add_option("--tn", tn, "true negatives (virtual removed)");
    eva->add_option("--fn", fn, "false negatives (real removed)");

    auto* pip = app.add_subcommand("pipeline", "full correction/detection/removal pipeline");
    pip->add_option("--input", input, "input cloud (overrides config)");
    pip->add_option("--output-dir", output_dir, "artifact directory (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (print_default) {
            std::cout << pipeline_config_json(default_pipeline_config());
            return kOk;
        }
        if (sim->parsed())
            return cmd_simulate(preset, scene_path, output, seed, step, noise_sigma, thickness,
                                calib_out, planes_out, scene_out);

        const PipelineConfig cfg = make_config(config_path, threads, seed);
        if (cor->parsed()) return cmd_correct(cfg, input, output, model_out);
        if (det->parsed()) return cmd_detect_planes(cfg, input, output);
        if (sco->parsed()) return cmd_score(cfg, input, planes_path, output);
        if (rem->parsed()) return cmd_remove(cfg, input, scores_path, output, labeled_out);
        if (eva->parsed()) return cmd_eval(input, tp, fp, tn, fn);
        if (pip->parsed()) return cmd_pipeline(cfg, input, output_dir);
        std::cerr << "error: no subcommand\n";
        return kConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ParseError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const StageError& e) {
        std::cerr << "stage failure in " << e.stage() << ": " << e.what() << "\n";
        return kStageError;
    } catch (const std::exception& e) {
        std::cerr << "stage failure: " << e.what() << "\n";
        return kStageError;
    }
}
