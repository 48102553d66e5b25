#pragma once

#include <memory>
#include <random>
#include <vector>

#include <json.hpp>

namespace ecopull {

/// Density of the true similarity score on [0, 1].
///
/// Implementations are immutable; one instance is shared by every worker
/// through `TruthModel`.
class TruthDistribution {
public:
    virtual ~TruthDistribution() = default;

    virtual double density(double beta) const = 0;
    virtual double cdf(double beta) const = 0;
    virtual double sample(std::mt19937_64& rng) const = 0;

    /// Points in (0, 1) where the density is not smooth. Quadrature splits there.
    virtual std::vector<double> breakpoints() const { return {}; }

    virtual nlohmann::json to_json() const = 0;
};

class UniformTruth final : public TruthDistribution {
public:
    double density(double beta) const override;
    double cdf(double beta) const override;
    double sample(std::mt19937_64& rng) const override;
    nlohmann::json to_json() const override;
};

/// Histogram density with equal-width bins over [0, 1]. Weights are
/// normalised at construction.
class PiecewiseConstantTruth final : public TruthDistribution {
public:
    explicit PiecewiseConstantTruth(std::vector<double> weights);

    double density(double beta) const override;
    double cdf(double beta) const override;
    double sample(std::mt19937_64& rng) const override;
    std::vector<double> breakpoints() const override;
    nlohmann::json to_json() const override;

private:
    std::vector<double> weights_;     // as given
    std::vector<double> mass_;        // per-bin probability
    std::vector<double> cumulative_;  // cumulative_[i] = P(beta < i / bins)
};

/// Value-semantic handle around a shared immutable distribution. Two
/// handles compare equal when their serialised forms match.
class TruthModel {
public:
    TruthModel();
    explicit TruthModel(std::shared_ptr<const TruthDistribution> dist);

    const TruthDistribution& operator*() const { return *dist_; }
    const TruthDistribution* operator->() const { return dist_.get(); }

    friend bool operator==(const TruthModel& a, const TruthModel& b) {
        return a.dist_ == b.dist_ || a.dist_->to_json() == b.dist_->to_json();
    }

private:
    std::shared_ptr<const TruthDistribution> dist_;
};

/// Builds a distribution from `{"kind": "uniform"}` or
/// `{"kind": "piecewise", "weights": [...]}`. Throws ConfigError otherwise.
TruthModel truth_from_json(const nlohmann::json& j);

}  // namespace ecopull
