#pragma once

#include "mirage/types.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mirage {

/// Positive class = real point kept, negative class = virtual point:
/// TP real kept, FN real removed, TN virtual removed, FP virtual kept.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

/// Rates left empty when their denominator is zero; never silently 0 or 1.
struct Rates {
    std::optional<double> odr;       // TN / (FP + TN)
    std::optional<double> idr;       // TP / (TP + FN)
    std::optional<double> fpr;       // FN / (TP + FN)
    std::optional<double> fnr;       // FP / (FP + TN)
    std::optional<double> accuracy;  // (TP + TN) / total
};

struct Prf {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f_measure;
};

/// Tally labels aligned by point id. Unknown ground truth is excluded;
/// Unscored predictions count as kept.
ConfusionCounts confusion(const std::vector<GtLabel>& gt, const std::vector<PredLabel>& pred);

Rates rates(const ConfusionCounts& c);

/// 10*log10((TP+FN)/(FP+FN)); empty when FP+FN == 0 (infinite).
std::optional<double> snr(const ConfusionCounts& c);

Prf detection_prf(const std::set<std::uint32_t>& gt_ids, const std::set<std::uint32_t>& pred_ids);

/// Plain-text one-scan report block used by the CLI.
std::string format_report(const ConfusionCounts& c);

}  // namespace mirage
