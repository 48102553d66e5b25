#include "ecopull/analytic.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ecopull/device_energy.hpp"
#include "ecopull/quadrature.hpp"
#include "ecopull/sifi.hpp"

namespace ecopull {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// q * log(p) - log(q!), with the q = 0 term exactly zero even when p = 0.
double log_term(int q, double log_p) {
    if (q == 0) return 0.0;
    return q * log_p - std::lgamma(q + 1.0);
}

// sum over frames of W (1 - 1/L)^(W - 1) from ascending device counts.
double deliveries_sorted(std::span<const int> sorted, double keep, int frame_limit) {
    const int k = static_cast<int>(sorted.size());
    double total = 0.0;
    int previous = 0;
    for (int j = 0; j < k; ++j) {
        int upto = sorted[j];
        if (frame_limit > 0) upto = std::min(upto, frame_limit);
        const int frames = upto - previous;
        if (frames > 0) {
            const int active = k - j;
            total += frames * active * std::pow(keep, active - 1);
            previous = upto;
        }
    }
    return total;
}

double success_probability_sorted(std::span<const int> sorted, double keep) {
    const int k = static_cast<int>(sorted.size());
    const int horizon = k == 0 ? 0 : sorted.back();
    if (horizon == 0) return 1.0;
    double total = 0.0;
    int previous = 0;
    for (int j = 0; j < k; ++j) {
        const int frames = sorted[j] - previous;
        if (frames > 0) {
            total += frames * std::pow(keep, k - j - 1);
            previous = sorted[j];
        }
    }
    return total / horizon;
}

double keep_probability(int slots) {
    if (slots < 1) throw std::invalid_argument("slots per frame must be >= 1");
    return 1.0 - 1.0 / slots;
}

}  // namespace

Realization::Realization(std::vector<int> counts) : q_(std::move(counts)) {
    if (q_.empty()) throw std::invalid_argument("Realization: needs at least the q_0 bin");
}

Realization Realization::fair(int devices, int max_images) {
    std::vector<int> q(static_cast<std::size_t>(max_images) + 1, 0);
    for (int d = 0; d < devices; ++d) ++q[static_cast<std::size_t>(d % (max_images + 1))];
    return Realization(std::move(q));
}

Realization Realization::from_device_counts(std::span<const int> per_device, int max_images) {
    std::vector<int> q(static_cast<std::size_t>(max_images) + 1, 0);
    for (int s : per_device) {
        if (s < 0 || s > max_images) throw std::out_of_range("Realization: device count outside [0, N]");
        ++q[static_cast<std::size_t>(s)];
    }
    return Realization(std::move(q));
}

int Realization::devices() const {
    return std::accumulate(q_.begin(), q_.end(), 0);
}

int Realization::total_relevant() const {
    int total = 0;
    for (std::size_t nu = 0; nu < q_.size(); ++nu) total += static_cast<int>(nu) * q_[nu];
    return total;
}

std::vector<int> Realization::device_counts() const {
    std::vector<int> out;
    for (std::size_t nu = 0; nu < q_.size(); ++nu) {
        for (int i = 0; i < q_[nu]; ++i) out.push_back(static_cast<int>(nu));
    }
    return out;
}

bool Realization::valid(int devices) const {
    return std::all_of(q_.begin(), q_.end(), [](int q) { return q >= 0; }) && this->devices() == devices;
}

double log_realization_pmf(const Realization& psi, int images, int devices, double p_th) {
    if (psi.max_images() != images || !psi.valid(devices)) return kNegInf;
    double log_p = std::lgamma(devices + 1.0);
    for (int nu = 0; nu <= images; ++nu) {
        const double p = p_rel(nu, images, p_th);
        if (psi[nu] > 0 && p == 0.0) return kNegInf;
        log_p += log_term(psi[nu], p > 0.0 ? std::log(p) : kNegInf);
    }
    return log_p;
}

double realization_pmf(const Realization& psi, int images, int devices, double p_th) {
    return std::exp(log_realization_pmf(psi, images, devices, p_th));
}

int active_devices(const Realization& psi, int frame) {
    if (frame < 1 || frame > psi.max_images()) throw std::out_of_range("active_devices: frame outside [1, N]");
    int total = 0;
    for (int j = frame; j <= psi.max_images(); ++j) total += psi[j];
    return total;
}

int frames_needed(const Realization& psi) {
    for (int nu = psi.max_images(); nu >= 1; --nu) {
        if (psi[nu] > 0) return nu;
    }
    return 0;
}

double success_probability(const Realization& psi, int slots) {
    const int horizon = frames_needed(psi);
    if (horizon == 0) return 1.0;
    const double keep = keep_probability(slots);
    double sum = 0.0;
    for (int f = 1; f <= horizon; ++f) sum += std::pow(keep, active_devices(psi, f) - 1);
    return sum / horizon;
}

double expected_deliveries(const Realization& psi, int slots, int frame_limit) {
    const auto sorted = psi.device_counts();
    return deliveries_sorted(sorted, keep_probability(slots), frame_limit);
}

double p_delta(double delta, const TruthDistribution& truth) {
    return 1.0 - truth.cdf(delta);
}

double p_actual_collect(const Realization& psi, const ScenarioConfig& cfg) {
    const double pd = p_delta(cfg.truth_threshold, *cfg.truth);
    if (pd <= 0.0) throw std::domain_error("p_actual_collect: P_delta is zero");
    const double mass = relevance_mass(cfg.relevance_threshold, cfg.sigma_ml(), *cfg.truth, cfg.truth_threshold);
    return success_probability(psi, cfg.slots()) * mass / pd;
}

double expected_z(const Realization& psi, const ScenarioConfig& cfg) {
    const double pa = p_actual_collect(psi, cfg);
    return (1.0 - fidelity_distance(cfg.compression_rate)) * pa + (1.0 - pa) * (1.0 - cfg.penalty);
}

SifiModel::SifiModel(const ScenarioConfig& cfg)
    : cfg_(cfg),
      slots_(cfg.slots()),
      keep_(keep_probability(slots_)),
      distance_(fidelity_distance(cfg.compression_rate)) {
    const int n = cfg.images_per_device;
    const int pool = cfg.devices * n;
    p_th_ = ecopull::p_th(cfg);
    p_delta_ = ecopull::p_delta(cfg.truth_threshold, *cfg.truth);
    p_omega_ = 1.0 - std::pow(1.0 - p_delta_, pool);
    const double both = p_delta_ > 0.0
        ? relevance_mass(cfg.relevance_threshold, cfg.sigma_ml(), *cfg.truth, cfg.truth_threshold)
        : 0.0;
    relevant_given_actual_ = p_delta_ > 0.0 ? std::clamp(both / p_delta_, 0.0, 1.0) : 0.0;
    alpha_ = p_th_ > 0.0 ? std::clamp(both / p_th_, 0.0, 1.0) : 0.0;
    beta_ = p_th_ < 1.0 ? std::clamp((p_delta_ - both) / (1.0 - p_th_), 0.0, 1.0) : 0.0;

    log_p_rel_.resize(n + 1);
    for (int nu = 0; nu <= n; ++nu) {
        const double p = p_rel(nu, n, p_th_);
        log_p_rel_(nu) = p > 0.0 ? std::log(p) : kNegInf;
    }

    // Integrands are polynomials of degree <= K N - 1 in t; this rule is exact.
    const auto rule = gauss_legendre_unit(std::max(1, pool / 2 + 1));
    log_alpha_base_ = (1.0 - alpha_ + alpha_ * rule.nodes).log();
    log_beta_base_ = (1.0 - beta_ + beta_ * rule.nodes).log();
    weights_ = rule.weights;
    moment_with_relevant_.assign(static_cast<std::size_t>(pool) + 1, std::numeric_limits<double>::quiet_NaN());
    moment_with_other_.assign(static_cast<std::size_t>(pool) + 1, std::numeric_limits<double>::quiet_NaN());
}

double SifiModel::inverse_omega_moment(int relevant_exponent, int other_exponent) const {
    // int_0^1 (1 - a + a t)^m1 (1 - b + b t)^m2 dt
    Eigen::ArrayXd exponent = Eigen::ArrayXd::Zero(weights_.size());
    if (relevant_exponent > 0) exponent += relevant_exponent * log_alpha_base_;
    if (other_exponent > 0) exponent += other_exponent * log_beta_base_;
    return (weights_ * exponent.exp()).sum();
}

double SifiModel::operator()(const Realization& psi) const {
    return cfg_.analysis == AnalysisModel::FrameAverage ? frame_average(psi) : conditional(psi);
}

double SifiModel::frame_average(const Realization& psi) const {
    const auto sorted = psi.device_counts();
    return frame_average_sorted(sorted);
}

double SifiModel::conditional(const Realization& psi) const {
    const auto sorted = psi.device_counts();
    return conditional_sorted(sorted);
}

double SifiModel::evaluate_sorted(std::span<const int> sorted_counts) const {
    return cfg_.analysis == AnalysisModel::FrameAverage ? frame_average_sorted(sorted_counts)
                                                 : conditional_sorted(sorted_counts);
}

double SifiModel::frame_average_sorted(std::span<const int> sorted_counts) const {
    if (p_omega_ <= 0.0) return 1.0;
    const double pa = success_probability_sorted(sorted_counts, keep_) * relevant_given_actual_;
    const double z = (1.0 - distance_) * pa + (1.0 - pa) * (1.0 - cfg_.penalty);
    return p_omega_ * z + (1.0 - p_omega_);
}

double SifiModel::conditional_sorted(std::span<const int> sorted_counts) const {
    const int pool = cfg_.devices * cfg_.images_per_device;
    const int relevant = std::accumulate(sorted_counts.begin(), sorted_counts.end(), 0);
    const int other = pool - relevant;
    const double gamma_score = 1.0 - cfg_.penalty;

    auto pow_or_one = [](double base, int e) { return e == 0 ? 1.0 : std::pow(base, e); };
    double value = pow_or_one(1.0 - alpha_, relevant) * pow_or_one(1.0 - beta_, other);

    if (relevant > 0 && alpha_ > 0.0) {
        double& m = moment_with_relevant_[static_cast<std::size_t>(relevant)];
        if (std::isnan(m)) m = inverse_omega_moment(relevant - 1, other);
        const double delivered = deliveries_sorted(sorted_counts, keep_, cfg_.frame_horizon);
        value += alpha_ * ((1.0 - distance_) * delivered + gamma_score * (relevant - delivered)) * m;
    }
    if (other > 0 && beta_ > 0.0 && gamma_score != 0.0) {
        double& m = moment_with_other_[static_cast<std::size_t>(relevant)];
        if (std::isnan(m)) m = inverse_omega_moment(relevant, other - 1);
        value += other * beta_ * gamma_score * m;
    }
    return std::clamp(value, 0.0, 1.0);
}

std::int64_t composition_count(int devices, int max_images) {
    // C(K + N, min(K, N)) by the multiplicative formula.
    const int k = std::min(devices, max_images);
    const int n = devices + max_images;
    long double c = 1.0L;
    for (int i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
        if (c > static_cast<long double>(std::numeric_limits<std::int64_t>::max())) {
            return std::numeric_limits<std::int64_t>::max();
        }
    }
    return static_cast<std::int64_t>(std::llround(c));
}

void for_each_sorted_profile(int devices, int max_images,
                             const std::function<void(std::span<const int>)>& visit) {
    std::vector<int> profile(static_cast<std::size_t>(devices), 0);
    if (devices == 0) {
        visit(profile);
        return;
    }
    // Odometer over nondecreasing sequences in [0, N].
    while (true) {
        visit(profile);
        int j = devices - 1;
        while (j >= 0 && profile[j] == max_images) --j;
        if (j < 0) return;
        const int next = profile[j] + 1;
        for (int i = j; i < devices; ++i) profile[i] = next;
    }
}

double expected_sifi_exact(const ScenarioConfig& cfg, std::int64_t budget) {
    const int k = cfg.devices;
    const int n = cfg.images_per_device;
    const auto count = composition_count(k, n);
    if (count > budget) {
        throw BudgetExceeded("expected_sifi_exact: " + std::to_string(count) +
                             " realizations exceed the budget of " + std::to_string(budget));
    }
    const SifiModel model(cfg);
    const double log_k_factorial = std::lgamma(k + 1.0);
    double total = 0.0;
    for_each_sorted_profile(k, n, [&](std::span<const int> profile) {
        double log_p = log_k_factorial;
        int run = 1;
        for (int i = 0; i < k; ++i) {
            log_p += model.log_p_rel(profile[i]);
            // Divide by q_nu! through the run lengths of equal counts.
            if (i > 0 && profile[i] == profile[i - 1]) {
                ++run;
                log_p -= std::log(static_cast<double>(run));
            } else {
                run = 1;
            }
        }
        if (log_p == kNegInf) return;
        total += std::exp(log_p) * model.evaluate_sorted(profile);
    });
    return total;
}

McmcResult expected_sifi_mcmc(const ScenarioConfig& cfg, std::int64_t samples, std::uint64_t seed,
                              const McmcRunOptions& options) {
    if (samples < 1) throw std::invalid_argument("expected_sifi_mcmc: samples must be >= 1");
    const int k = cfg.devices;
    const int n = cfg.images_per_device;
    const SifiModel model(cfg);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // State kept as ascending per-device counts; psi is their histogram.
    std::vector<int> state = Realization::fair(k, n).device_counts();
    std::vector<int> proposal(state.size());
    std::vector<int> occupied;

    auto log_pmf = [&](std::span<const int> sorted) {
        double lp = std::lgamma(k + 1.0);
        int run = 1;
        for (int i = 0; i < k; ++i) {
            lp += model.log_p_rel(sorted[i]);
            if (i > 0 && sorted[i] == sorted[i - 1]) {
                ++run;
                lp -= std::log(static_cast<double>(run));
            } else {
                run = 1;
            }
        }
        return lp;
    };
    auto distinct = [](std::span<const int> sorted, std::vector<int>& out) {
        out.clear();
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (i == 0 || sorted[i] != sorted[i - 1]) out.push_back(sorted[i]);
        }
    };

    double log_p = log_pmf(state);
    McmcResult result;
    result.samples = samples;
    if (options.keep_trace) result.trace.reserve(static_cast<std::size_t>(samples));
    std::int64_t accepted = 0;
    double sum = 0.0;
    const std::int64_t steps = cfg.mcmc.burn_in + samples;

    for (std::int64_t t = 0; t < steps; ++t) {
        if (n > 0) {
            distinct(state, occupied);
            const int forward_choices = static_cast<int>(occupied.size());
            const int from = occupied[std::uniform_int_distribution<int>(0, forward_choices - 1)(rng)];
            int to = std::uniform_int_distribution<int>(0, n - 1)(rng);
            if (to >= from) ++to;

            // Move one device from `from` to `to`, keeping the profile sorted.
            proposal = state;
            auto pos = std::upper_bound(proposal.begin(), proposal.end(), from) - 1;
            proposal.erase(pos);
            proposal.insert(std::upper_bound(proposal.begin(), proposal.end(), to), to);

            const double log_q = log_pmf(proposal);
            double log_ratio;
            if (log_p == kNegInf) {
                log_ratio = 0.0;  // leave a zero-probability start unconditionally
            } else {
                log_ratio = log_q - log_p;
                if (cfg.mcmc.hastings) {
                    distinct(proposal, occupied);
                    log_ratio += std::log(static_cast<double>(forward_choices)) -
                                 std::log(static_cast<double>(occupied.size()));
                }
            }
            const double u = 1.0 - unit(rng);  // (0, 1]
            if (log_ratio >= 0.0 || std::log(u) <= log_ratio) {
                state.swap(proposal);
                log_p = log_q;
                if (t >= cfg.mcmc.burn_in) ++accepted;
            }
        }
        assert(static_cast<int>(state.size()) == k);
        if (t < cfg.mcmc.burn_in) continue;

        const double value = model.evaluate_sorted(state);
        sum += value;
        if (options.keep_trace) result.trace.push_back(value);
        if (options.on_state) options.on_state(Realization::from_device_counts(state, n));
    }
    result.estimate = sum / static_cast<double>(samples);
    result.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(samples);
    return result;
}

}  // namespace ecopull
