#include "mirage/radiometry.hpp"

#include "mirage/parallel.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mirage {

namespace {

double eval_poly(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
    return acc;
}

/// Least-squares polynomial fit y ~ sum_k c_k x^k.
std::vector<double> polyfit(const std::vector<double>& xs, const std::vector<double>& ys, int deg,
                            const std::string& factor_name) {
    const int cols = deg + 1;
    std::set<double> distinct(xs.begin(), xs.end());
    if (static_cast<int>(distinct.size()) < cols)
        throw std::invalid_argument("fit_correction: design matrix for the " + factor_name +
                                    " factor is rank-deficient (" +
                                    std::to_string(distinct.size()) + " distinct abscissae for degree " +
                                    std::to_string(deg) + ")");
    Eigen::MatrixXd design(xs.size(), cols);
    Eigen::VectorXd rhs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double p = 1.0;
        for (int k = 0; k < cols; ++k) {
            design(static_cast<Eigen::Index>(i), k) = p;
            p *= xs[i];
        }
        rhs(static_cast<Eigen::Index>(i)) = ys[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < cols)
        throw std::invalid_argument("fit_correction: design matrix for the " + factor_name +
                                    " factor is rank-deficient");
    const Eigen::VectorXd sol = qr.solve(rhs);
    return {sol.data(), sol.data() + sol.size()};
}

}  // namespace

double CorrectionModel::f2(double cos_alpha) const { return eval_poly(beta, cos_alpha); }
double CorrectionModel::f3(double range) const { return eval_poly(gamma, 1.0 / range); }

std::vector<ReturnGeometry> incidence_geometry(const PointCloud& cloud, const SpatialIndex& index,
                                               std::size_t normal_k, unsigned threads) {
    if (normal_k < 3) throw std::invalid_argument("incidence_geometry: normal_k must be >= 3");
    if (cloud.size() < normal_k)
        throw std::invalid_argument("incidence_geometry: cloud smaller than normal_k");
    NormalCache cache(cloud, index, normal_k, threads);
    return incidence_geometry(cloud, cache, threads);
}

std::vector<ReturnGeometry> incidence_geometry(const PointCloud& cloud, const NormalCache& normals,
                                               unsigned threads) {
    std::vector<ReturnGeometry> out(cloud.size());
    parallel_for(cloud.size(), threads, [&](std::size_t i) {
        ReturnGeometry g;
        const Vec3 to_point = cloud[i].position - cloud.scanner_origin;
        g.range = to_point.norm();
        const NormalEstimate& n = normals.at(static_cast<std::uint32_t>(i));
        if (n.degenerate || g.range <= 0.0) {
            g.cos_incidence = 1.0;
            g.degenerate = true;
        } else {
            g.cos_incidence = std::min(1.0, std::abs(n.normal.dot(to_point / g.range)));
        }
        out[i] = g;
    });
    return out;
}

CorrectionModel fit_correction(const std::vector<CalibrationSample>& samples, int deg_angle,
                               int deg_range, double ref_angle_cos, double ref_range) {
    if (deg_angle < 0 || deg_range < 0)
        throw std::invalid_argument("fit_correction: negative polynomial degree");
    if (samples.size() < static_cast<std::size_t>(std::max(deg_angle, deg_range)) + 1)
        throw std::invalid_argument("fit_correction: not enough samples");
    for (const auto& s : samples)
        if (s.range <= 0.0) throw std::invalid_argument("fit_correction: nonpositive range sample");

    CorrectionModel model;
    model.ref_angle_cos = ref_angle_cos;
    model.ref_range = ref_range;

    // Pass 1: angle factor from the most populated near-constant-range bin.
    const auto [rmin_it, rmax_it] = std::minmax_element(
        samples.begin(), samples.end(),
        [](const CalibrationSample& a, const CalibrationSample& b) { return a.range < b.range; });
    const double rmin = rmin_it->range, rmax = rmax_it->range;
    constexpr int kRangeBins = 16;
    std::vector<std::vector<std::size_t>> bins(kRangeBins);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        int b = rmax > rmin
                    ? std::min(kRangeBins - 1,
                               int((samples[i].range - rmin) / (rmax - rmin) * kRangeBins))
                    : 0;
        bins[static_cast<std::size_t>(b)].push_back(i);
    }
    std::size_t best_bin = 0;
    for (std::size_t b = 1; b < bins.size(); ++b)
        if (bins[b].size() > bins[best_bin].size()) best_bin = b;

    auto fit_angle = [&](const std::vector<std::size_t>& idx, const CorrectionModel& m,
                         bool divide_range) {
        std::vector<double> xs, ys;
        xs.reserve(idx.size());
        ys.reserve(idx.size());
        for (std::size_t i : idx) {
            const double denom = divide_range ? m.f3(samples[i].range) : 1.0;
            if (std::abs(denom) < 1e-12) continue;
            xs.push_back(samples[i].cos_alpha);
            ys.push_back(samples[i].intensity / denom);
        }
        return polyfit(xs, ys, deg_angle, "angle");
    };
    auto fit_range = [&](const CorrectionModel& m) {
        std::vector<double> xs, ys;
        xs.reserve(samples.size());
        ys.reserve(samples.size());
        for (const auto& s : samples) {
            const double denom = m.f2(s.cos_alpha);
            if (std::abs(denom) < 1e-12) continue;
            xs.push_back(1.0 / s.range);
            ys.push_back(s.intensity / denom);
        }
        return polyfit(xs, ys, deg_range, "range");
    };

    model.beta = fit_angle(bins[best_bin], model, false);
    model.gamma = fit_range(model);

    // Alternating refinement removes the residual range variation of the
    // seed bin; converges in a few sweeps on separable data.
    std::vector<std::size_t> all(samples.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (int sweep = 0; sweep < 3; ++sweep) {
        model.beta = fit_angle(all, model, true);
        model.gamma = fit_range(model);
    }

    double sq = 0.0;
    for (const auto& s : samples) {
        const double r = s.intensity - model.f2(s.cos_alpha) * model.f3(s.range);
        sq += r * r;
    }
    model.fit_rms = std::sqrt(sq / double(samples.size()));

    if (std::abs(model.f2(model.ref_angle_cos)) < 1e-12 ||
        std::abs(model.f3(model.ref_range)) < 1e-12)
        throw std::invalid_argument("fit_correction: model vanishes at the reference condition");
    return model;
}

std::size_t correct_intensity(PointCloud& cloud, const std::vector<ReturnGeometry>& geom,
                              const CorrectionModel& model, unsigned threads) {
    if (geom.size() != cloud.size())
        throw std::invalid_argument("correct_intensity: geometry size mismatch");
    const double ref = model.f2(model.ref_angle_cos) * model.f3(model.ref_range);
    std::vector<std::uint8_t> bad(cloud.size(), 0);
    parallel_for(cloud.size(), threads, [&](std::size_t i) {
        const double denom = model.f2(geom[i].cos_incidence) * model.f3(geom[i].range);
        if (std::abs(denom) < 1e-12) {
            cloud[i].intensity_corrected = std::numeric_limits<float>::quiet_NaN();
            bad[i] = 1;
        } else {
            cloud[i].intensity_corrected =
                static_cast<float>(double(cloud[i].intensity_raw) * ref / denom);
        }
    });
    cloud.has_corrected_field = true;
    return static_cast<std::size_t>(std::accumulate(bad.begin(), bad.end(), std::size_t{0}));
}

std::vector<std::uint32_t> extract_reflective_candidates(const PointCloud& cloud,
                                                         const ThresholdSpec& threshold) {
    std::vector<std::uint32_t> eligible;
    for (std::uint32_t i = 0; i < cloud.size(); ++i)
        if (cloud[i].echo_index == 1 && cloud[i].has_corrected()) eligible.push_back(i);
    if (eligible.empty())
        throw std::invalid_argument("extract_reflective_candidates: no corrected intensities");

    if (threshold.kind == ThresholdSpec::Kind::Absolute) {
        std::vector<std::uint32_t> out;
        for (std::uint32_t id : eligible)
            if (cloud[id].intensity_corrected >= threshold.value) out.push_back(id);
        return out;
    }
    const double q = threshold.value;
    if (q < 0.0 || q > 100.0)
        throw std::invalid_argument("extract_reflective_candidates: percentile out of range");
    const std::size_t keep = static_cast<std::size_t>(
        std::ceil((1.0 - q / 100.0) * double(eligible.size()) - 1e-9));
    std::sort(eligible.begin(), eligible.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (cloud[a].intensity_corrected != cloud[b].intensity_corrected)
            return cloud[a].intensity_corrected > cloud[b].intensity_corrected;
        return a < b;
    });
    eligible.resize(std::min(keep, eligible.size()));
    std::sort(eligible.begin(), eligible.end());
    return eligible;
}

std::vector<CalibrationSample> load_calibration_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("calibration CSV: empty file " + path);
    std::vector<CalibrationSample> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        CalibrationSample s;
        char c1 = 0, c2 = 0;
        if (!(ls >> s.intensity >> c1 >> s.cos_alpha >> c2 >> s.range) || c1 != ',' || c2 != ',')
            throw ParseError("calibration CSV: malformed line " + std::to_string(line_no));
        samples.push_back(s);
    }
    return samples;
}

void save_calibration_csv(const std::vector<CalibrationSample>& samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "intensity,cos_alpha,range\n";
    char buf[128];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", s.intensity, s.cos_alpha, s.range);
        out << buf;
    }
}

CorrectionModel load_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("model JSON: " + std::string(e.what()));
    }
    CorrectionModel m;
    m.beta = j.at("beta").get<std::vector<double>>();
    m.gamma = j.at("gamma").get<std::vector<double>>();
    m.ref_angle_cos = j.at("ref_angle_cos").get<double>();
    m.ref_range = j.at("ref_range").get<double>();
    if (j.contains("fit_rms")) m.fit_rms = j["fit_rms"].get<double>();
    return m;
}

void save_model_json(const CorrectionModel& model, const std::string& path) {
    nlohmann::ordered_json j;
    j["beta"] = model.beta;
    j["gamma"] = model.gamma;
    j["ref_angle_cos"] = model.ref_angle_cos;
    j["ref_range"] = model.ref_range;
    j["fit_rms"] = model.fit_rms;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace mirage
