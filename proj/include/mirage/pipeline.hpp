#pragma once

#include "mirage/metrics.hpp"
#include "mirage/planes.hpp"
#include "mirage/radiometry.hpp"
#include "mirage/scoring.hpp"
#include "mirage/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mirage {

/// Raised when a pipeline stage fails; carries the stage name so the CLI
/// can print a stage-scoped diagnostic.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// Every tunable of the pipeline. Serialized as JSON with exhaustive
/// validation: unknown keys and out-of-range values are rejected before
/// any I/O happens.
struct PipelineConfig {
    std::string input;
    std::string output_dir = "out";
    unsigned threads = 0;  // 0: hardware concurrency
    std::uint64_t seed = 1;

    // preprocess
    bool radius_filter_enabled = false;
    double radius_filter_radius = 0.2;
    std::size_t radius_filter_min_neighbors = 5;
    double voxel_size = 0.0;  // 0 disables downsampling

    // radiometry
    std::string calibration_csv;  // fit from external samples when set
    std::string model_json;       // pre-fitted model wins over everything
    int angle_degree = 3;
    int range_degree = 2;
    double ref_range = 10.0;
    // Incidence angles need normals from a neighborhood wide enough that
    // per-point position noise does not dominate the plane fit.
    std::size_t normal_k = 40;
    ThresholdSpec threshold;  // candidate extraction

    PlaneDetectionConfig planes;
    ScoringConfig scoring;
};

struct PipelineResult {
    PointCloud labeled;  // full input cloud with pred_label filled
    PointCloud cleaned;
    CorrectionModel model;
    PlaneSet planes;
    std::vector<ScoreRecord> scores;
    std::optional<ConfusionCounts> confusion;
    std::optional<Rates> rates;
    std::optional<double> snr_before;
    std::optional<double> snr_after;
};

PipelineConfig default_pipeline_config();

/// Correction model fitted from the cloud's own first/single-echo returns
/// (stable normals, away from grazing incidence), with median-based
/// trimming so minority surfaces of a different reflectance do not skew
/// the dominant-population fit.
CorrectionModel self_calibrate(const PointCloud& cloud, const std::vector<ReturnGeometry>& geom,
                               int deg_angle, int deg_range, double ref_range);

/// Strict parse: every key must be known, every value in range.
PipelineConfig parse_pipeline_config(const std::string& json_text);
PipelineConfig load_pipeline_config(const std::string& path);
std::string pipeline_config_json(const PipelineConfig& config);

/// load -> optional radius filter / voxel downsample -> radiometric
/// correction -> plane detection -> scoring -> removal -> metrics (when
/// ground-truth labels are present). Writes resolved_config.json,
/// model.json, planes.json, scores.csv, labeled.ply, cleaned.ply,
/// report.json and report.txt under config.output_dir.
PipelineResult run_pipeline(const PipelineConfig& config);

/// The same stages on an in-memory cloud, without any file output.
PipelineResult run_pipeline_on(const PointCloud& input, const PipelineConfig& config);

std::string pipeline_report_text(const PipelineConfig& config, const PipelineResult& result);
std::string pipeline_report_json(const PipelineConfig& config, const PipelineResult& result);

}  // namespace mirage
