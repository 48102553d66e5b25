#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ecopull/config.hpp"

namespace ecopull {

/// Composition psi = (q_0, ..., q_N): q_nu devices hold exactly nu relevant images.
class Realization {
public:
    explicit Realization(std::vector<int> counts);

    /// Devices assigned round-robin over nu = 0..N until all are placed.
    static Realization fair(int devices, int max_images);

    /// Builds psi from per-device relevant counts (any order).
    static Realization from_device_counts(std::span<const int> per_device, int max_images);

    int max_images() const { return static_cast<int>(q_.size()) - 1; }
    int devices() const;
    int total_relevant() const;
    int operator[](int nu) const { return q_[static_cast<std::size_t>(nu)]; }
    std::span<const int> counts() const { return q_; }

    /// Per-device relevant counts in ascending order.
    std::vector<int> device_counts() const;

    /// Sum of counts equals `devices` and every count is nonnegative.
    bool valid(int devices) const;

    bool operator==(const Realization&) const = default;

private:
    std::vector<int> q_;
};

/// Multinomial probability of psi when each device's relevant count is
/// Binomial(N, P_th). Zero unless the counts sum to K. Evaluated in log space.
double realization_pmf(const Realization& psi, int images, int devices, double p_th);
double log_realization_pmf(const Realization& psi, int images, int devices, double p_th);

/// W_f, devices still transmitting in frame f (1-based). Throws
/// std::out_of_range unless 1 <= f <= N.
int active_devices(const Realization& psi, int frame);

/// n_w, the largest nu with q_nu > 0.
int frames_needed(const Realization& psi);

/// Per-frame average of (1 - 1/L)^(W_f - 1) over the n_w frames; 1 when n_w = 0.
double success_probability(const Realization& psi, int slots);

/// Expected number of collision-free deliveries, sum over f of W_f (1 - 1/L)^(W_f - 1).
/// Frames past `frame_limit` (when > 0) deliver nothing.
double expected_deliveries(const Realization& psi, int slots, int frame_limit = 0);

/// Tail mass of g_T above delta.
double p_delta(double delta, const TruthDistribution& truth);

/// P_A: success probability times the chance an actually relevant image
/// passes the relevance test. Throws std::domain_error when P_delta = 0.
double p_actual_collect(const Realization& psi, const ScenarioConfig& cfg);

/// E[Z] = (1 - k_d) P_A + (1 - P_A)(1 - Gamma).
double expected_z(const Realization& psi, const ScenarioConfig& cfg);

/// Per-configuration constants for repeated SiFi evaluation over realizations.
///
/// `frame_average()` is P_Omega E[Z] + (1 - P_Omega). `conditional()` is the exact
/// E[SiFi | psi]: given the per-device counts, each relevant image is actually
/// relevant with probability alpha = P(beta >= delta | s >= V_th), each other
/// image with beta' = P(beta >= delta | s < V_th), and the 1/|Omega| average
/// is taken through E[1/(1+X)] = int_0^1 E[t^X] dt.
///
/// Caches lazily; not safe to share between threads.
class SifiModel {
public:
    explicit SifiModel(const ScenarioConfig& cfg);

    double p_th() const { return p_th_; }
    double p_delta() const { return p_delta_; }
    double p_omega() const { return p_omega_; }
    /// P(s >= V_th | beta >= delta).
    double relevant_given_actual() const { return relevant_given_actual_; }

    double operator()(const Realization& psi) const;
    double frame_average(const Realization& psi) const;
    double conditional(const Realization& psi) const;

    /// Same evaluations from ascending per-device counts.
    double evaluate_sorted(std::span<const int> sorted_counts) const;
    double frame_average_sorted(std::span<const int> sorted_counts) const;
    double conditional_sorted(std::span<const int> sorted_counts) const;

    /// log P_Rel(nu); -inf where the binomial has no mass.
    double log_p_rel(int nu) const { return log_p_rel_(nu); }

    const ScenarioConfig& config() const { return cfg_; }

private:
    double inverse_omega_moment(int relevant_exponent, int other_exponent) const;

    ScenarioConfig cfg_;
    int slots_;
    double keep_;  // 1 - 1/L
    double distance_;
    double p_th_;
    double p_delta_;
    double p_omega_;
    double relevant_given_actual_;
    double alpha_;
    double beta_;
    Eigen::ArrayXd log_p_rel_;
    Eigen::ArrayXd log_alpha_base_;
    Eigen::ArrayXd log_beta_base_;
    Eigen::ArrayXd weights_;
    mutable std::vector<double> moment_with_relevant_;  // indexed by total relevant count
    mutable std::vector<double> moment_with_other_;
};

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// C(K + N, N), saturated at the int64 maximum.
std::int64_t composition_count(int devices, int max_images);

/// Visits every realization as ascending per-device counts.
void for_each_sorted_profile(int devices, int max_images,
                             const std::function<void(std::span<const int>)>& visit);

/// Sum over all realizations of pmf(psi) * SiFi(psi). Throws BudgetExceeded
/// when the number of realizations exceeds `budget`.
double expected_sifi_exact(const ScenarioConfig& cfg, std::int64_t budget = 10'000'000);

struct McmcResult {
    double estimate = 0.0;
    double acceptance_rate = 0.0;
    std::int64_t samples = 0;
    std::vector<double> trace;  // u^(t), only when requested
};

struct McmcRunOptions {
    bool keep_trace = false;
    /// Called with every recorded state.
    std::function<void(const Realization&)> on_state;
};

/// Metropolis chain over realizations from the fair initial state.
/// Proposal: move one device from a uniformly chosen occupied bin to a
/// uniformly chosen different bin. Acceptance uses P(Y')/P(Y), times the
/// occupied-bin ratio when `cfg.mcmc.hastings` is set. Returns the mean of
/// the SiFi evaluation over the T recorded states after burn-in.
McmcResult expected_sifi_mcmc(const ScenarioConfig& cfg, std::int64_t samples, std::uint64_t seed,
                              const McmcRunOptions& options = {});

}  // namespace ecopull
