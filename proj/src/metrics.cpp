#include "mirage/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mirage {

ConfusionCounts confusion(const std::vector<GtLabel>& gt, const std::vector<PredLabel>& pred) {
    if (gt.size() != pred.size())
        throw std::invalid_argument("confusion: label vectors differ in length");
    ConfusionCounts c;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt[i] == GtLabel::Unknown) continue;
        const bool is_real = gt[i] == GtLabel::Real;
        const bool kept = pred[i] != PredLabel::Virtual;
        if (is_real) {
            kept ? ++c.tp : ++c.fn;
        } else {
            kept ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

Rates rates(const ConfusionCounts& c) {
    Rates r;
    const double tp = double(c.tp), fp = double(c.fp), tn = double(c.tn), fn = double(c.fn);
    if (c.fp + c.tn > 0) {
        r.odr = tn / (fp + tn);
        r.fnr = fp / (fp + tn);
    }
    if (c.tp + c.fn > 0) {
        r.idr = tp / (tp + fn);
        r.fpr = fn / (tp + fn);
    }
    if (c.total() > 0) r.accuracy = (tp + tn) / double(c.total());
    return r;
}

std::optional<double> snr(const ConfusionCounts& c) {
    if (c.fp + c.fn == 0) return std::nullopt;
    return 10.0 * std::log10(double(c.tp + c.fn) / double(c.fp + c.fn));
}

Prf detection_prf(const std::set<std::uint32_t>& gt_ids, const std::set<std::uint32_t>& pred_ids) {
    std::vector<std::uint32_t> inter;
    std::set_intersection(gt_ids.begin(), gt_ids.end(), pred_ids.begin(), pred_ids.end(),
                          std::back_inserter(inter));
    Prf out;
    if (!pred_ids.empty()) out.precision = double(inter.size()) / double(pred_ids.size());
    if (!gt_ids.empty()) out.recall = double(inter.size()) / double(gt_ids.size());
    if (out.precision && out.recall && (*out.precision + *out.recall) > 0.0)
        out.f_measure = 2.0 * *out.precision * *out.recall / (*out.precision + *out.recall);
    return out;
}

namespace {
std::string pct(const std::optional<double>& v) {
    if (!v) return "    n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%6.2f%%", 100.0 * *v);
    return buf;
}
}  // namespace

std::string format_report(const ConfusionCounts& c) {
    const Rates r = rates(c);
    const auto s = snr(c);
    char buf[512];
    std::string snr_s = "inf";
    if (s) {
        char b2[32];
        std::snprintf(b2, sizeof(b2), "%.2f dB", *s);
        snr_s = b2;
    }
    std::snprintf(buf, sizeof(buf),
                  "counts   TP %llu  FN %llu  TN %llu  FP %llu\n"
                  "rates    ODR %s  IDR %s  FPR %s  FNR %s\n"
                  "quality  accuracy %s  SNR %s\n",
                  (unsigned long long)c.tp, (unsigned long long)c.fn, (unsigned long long)c.tn,
                  (unsigned long long)c.fp, pct(r.odr).c_str(), pct(r.idr).c_str(),
                  pct(r.fpr).c_str(), pct(r.fnr).c_str(), pct(r.accuracy).c_str(), snr_s.c_str());
    return buf;
}

}  // namespace mirage
