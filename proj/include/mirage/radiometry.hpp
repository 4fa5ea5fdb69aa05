#pragma once

#include "mirage/normals.hpp"
#include "mirage/spatial_index.hpp"
#include "mirage/types.hpp"

#include <string>
#include <vector>

namespace mirage {

/// Range/incidence factors of one return. cos_incidence is 1 with the
/// degenerate flag set when the local neighborhood has rank < 2.
struct ReturnGeometry {
    double range = 0.0;
    double cos_incidence = 1.0;
    bool degenerate = false;
};

/// Fitted intensity normalization model. The angle factor is a polynomial
/// in cos(alpha); the range factor is a polynomial in 1/R, which is what a
/// low-degree polynomial needs to capture the R^-2 falloff of the LiDAR
/// equation over realistic scan ranges.
struct CorrectionModel {
    std::vector<double> beta;   // angle polynomial, beta[k] * cos^k(alpha)
    std::vector<double> gamma;  // range polynomial, gamma[k] * (1/R)^k
    double ref_angle_cos = 1.0;
    double ref_range = 10.0;
    double fit_rms = 0.0;

    double f2(double cos_alpha) const;
    double f3(double range) const;
};

struct CalibrationSample {
    double intensity = 0.0;
    double cos_alpha = 1.0;
    double range = 1.0;
};

struct ThresholdSpec {
    enum class Kind { Absolute, Percentile } kind = Kind::Percentile;
    double value = 85.0;
};

std::vector<ReturnGeometry> incidence_geometry(const PointCloud& cloud, const SpatialIndex& index,
                                               std::size_t normal_k, unsigned threads = 0);

/// Same, reusing an existing normal cache (built with the same k).
std::vector<ReturnGeometry> incidence_geometry(const PointCloud& cloud, const NormalCache& normals,
                                               unsigned threads = 0);

/// Sequential least-squares fit: the angle polynomial first over a
/// near-constant-range bin, then the range polynomial over angle-corrected
/// intensities, followed by alternating refinement sweeps.
CorrectionModel fit_correction(const std::vector<CalibrationSample>& samples, int deg_angle,
                               int deg_range, double ref_angle_cos, double ref_range);

/// Fills intensity_corrected in place; uncorrectable points (vanishing
/// denominator) keep NaN. Returns the number of uncorrectable points.
std::size_t correct_intensity(PointCloud& cloud, const std::vector<ReturnGeometry>& geom,
                              const CorrectionModel& model, unsigned threads = 0);

/// First/single-echo points whose corrected intensity clears the threshold.
/// A percentile spec selects exactly ceil((1-q/100)*n_eligible) top points,
/// ties broken by lower id.
std::vector<std::uint32_t> extract_reflective_candidates(const PointCloud& cloud,
                                                         const ThresholdSpec& threshold);

std::vector<CalibrationSample> load_calibration_csv(const std::string& path);
void save_calibration_csv(const std::vector<CalibrationSample>& samples, const std::string& path);
CorrectionModel load_model_json(const std::string& path);
void save_model_json(const CorrectionModel& model, const std::string& path);

}  // namespace mirage
