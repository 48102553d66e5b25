#include "ecopull/truth_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecopull/config.hpp"

namespace ecopull {

double UniformTruth::density(double beta) const {
    return (beta >= 0.0 && beta <= 1.0) ? 1.0 : 0.0;
}

double UniformTruth::cdf(double beta) const {
    return std::clamp(beta, 0.0, 1.0);
}

double UniformTruth::sample(std::mt19937_64& rng) const {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

nlohmann::json UniformTruth::to_json() const {
    return {{"kind", "uniform"}};
}

PiecewiseConstantTruth::PiecewiseConstantTruth(std::vector<double> weights)
    : weights_(std::move(weights)), mass_(weights_) {
    if (mass_.empty()) {
        throw ConfigError("truth_distribution.weights: must be nonempty");
    }
    for (double w : mass_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ConfigError("truth_distribution.weights: entries must be finite and >= 0");
        }
    }
    const double total = std::accumulate(mass_.begin(), mass_.end(), 0.0);
    if (total <= 0.0) {
        throw ConfigError("truth_distribution.weights: total mass must be > 0");
    }
    for (double& w : mass_) w /= total;
    cumulative_.resize(mass_.size() + 1, 0.0);
    std::partial_sum(mass_.begin(), mass_.end(), cumulative_.begin() + 1);
    cumulative_.back() = 1.0;
}

double PiecewiseConstantTruth::density(double beta) const {
    if (beta < 0.0 || beta > 1.0) return 0.0;
    const auto bins = mass_.size();
    const auto i = std::min(static_cast<std::size_t>(beta * bins), bins - 1);
    return mass_[i] * static_cast<double>(bins);
}

double PiecewiseConstantTruth::cdf(double beta) const {
    if (beta <= 0.0) return 0.0;
    if (beta >= 1.0) return 1.0;
    const auto bins = static_cast<double>(mass_.size());
    const auto i = static_cast<std::size_t>(beta * bins);
    const double frac = beta * bins - static_cast<double>(i);
    return cumulative_[i] + frac * mass_[i];
}

double PiecewiseConstantTruth::sample(std::mt19937_64& rng) const {
    // Inverse cdf.
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    std::size_t i = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
    i = std::min(i, mass_.size() - 1);
    while (mass_[i] == 0.0 && i + 1 < mass_.size()) ++i;
    const double frac = (u - cumulative_[i]) / mass_[i];
    return (static_cast<double>(i) + std::clamp(frac, 0.0, 1.0)) / static_cast<double>(mass_.size());
}

std::vector<double> PiecewiseConstantTruth::breakpoints() const {
    std::vector<double> pts;
    for (std::size_t i = 1; i < mass_.size(); ++i) {
        pts.push_back(static_cast<double>(i) / static_cast<double>(mass_.size()));
    }
    return pts;
}

nlohmann::json PiecewiseConstantTruth::to_json() const {
    return {{"kind", "piecewise"}, {"weights", weights_}};
}

TruthModel::TruthModel() : dist_(std::make_shared<UniformTruth>()) {}

TruthModel::TruthModel(std::shared_ptr<const TruthDistribution> dist)
    : dist_(std::move(dist)) {
    if (!dist_) dist_ = std::make_shared<UniformTruth>();
}

TruthModel truth_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw ConfigError("truth_distribution.kind: required string field");
    }
    const auto kind = j["kind"].get<std::string>();
    if (kind == "uniform") {
        return TruthModel(std::make_shared<UniformTruth>());
    }
    if (kind == "piecewise") {
        if (!j.contains("weights") || !j["weights"].is_array()) {
            throw ConfigError("truth_distribution.weights: required array for kind 'piecewise'");
        }
        return TruthModel(std::make_shared<PiecewiseConstantTruth>(
            j["weights"].get<std::vector<double>>()));
    }
    throw ConfigError("truth_distribution.kind: unknown kind '" + kind +
                      "' (expected uniform | piecewise)");
}

}  // namespace ecopull
