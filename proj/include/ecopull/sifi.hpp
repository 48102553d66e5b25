#pragma once

#include <span>

namespace ecopull {

struct ImageRecord {
    double true_similarity = 0.0;      // beta
    double observed_similarity = 0.0;  // s = beta + noise
    bool relevant = false;             // s >= V_th
    bool actual_relevant = false;      // beta >= delta
    bool delivered = false;            // transmitted without collision
};

/// Normalised perceptual distance of a reconstruction at r bpp, 0.0725^r.
/// Throws std::invalid_argument for negative r.
double fidelity_distance(double rate);

/// SiFi of one finished round. Each actually relevant image scores its
/// fidelity distance if delivered and the penalty otherwise; the result is
/// one minus the mean score, or 1 when no image is actually relevant.
double realized_sifi(std::span<const ImageRecord> records, double penalty, double rate);

}  // namespace ecopull
