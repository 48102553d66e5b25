#include "ecopull/sifi.hpp"

#include <cmath>
#include <stdexcept>

namespace ecopull {

double fidelity_distance(double rate) {
    if (rate < 0.0) throw std::invalid_argument("fidelity_distance: rate must be >= 0");
    return std::pow(0.0725, rate);
}

double realized_sifi(std::span<const ImageRecord> records, double penalty, double rate) {
    const double distance = fidelity_distance(rate);
    double loss = 0.0;
    int actual = 0;
    for (const auto& rec : records) {
        if (!rec.actual_relevant) continue;
        ++actual;
        loss += rec.delivered ? distance : penalty;
    }
    if (actual == 0) return 1.0;
    return 1.0 - loss / actual;
}

}  // namespace ecopull
