#include "ecopull/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "ecopull/analytic.hpp"
#include "ecopull/baselines.hpp"
#include "ecopull/device_energy.hpp"
#include "ecopull/mac_sim.hpp"

namespace ecopull {
namespace {

// Runs body(i) for i in [0, n) on up to hardware_concurrency threads. The
// first exception thrown is rethrown once all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

int slots_for_rate(double rate, int coefficient, double max_rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("slots_for_rate: rate must be > 0");
    if (coefficient < 1) throw std::invalid_argument("slots_for_rate: coefficient must be >= 1");
    const double ratio = max_rate / rate;
    const double nearest = std::round(ratio);
    const double ceiling = std::abs(ratio - nearest) < 1e-9 ? nearest : std::ceil(ratio);
    return coefficient * static_cast<int>(std::max(1.0, ceiling));
}

std::vector<double> grid_range(double lo, double hi, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("grid_range: step must be > 0");
    if (hi < lo) throw std::invalid_argument("grid_range: hi < lo");
    std::vector<double> out;
    for (int i = 0;; ++i) {
        const double v = lo + i * step;
        if (v > hi + 1e-9) break;
        out.push_back(v);
    }
    return out;
}

EvalMode parse_eval_mode(const std::string& name) {
    if (name == "simulate") return EvalMode::Simulate;
    if (name == "exact") return EvalMode::Exact;
    if (name == "mcmc") return EvalMode::Mcmc;
    throw std::invalid_argument("unknown evaluation mode '" + name + "' (simulate | exact | mcmc)");
}

std::string to_string(EvalMode mode) {
    switch (mode) {
        case EvalMode::Simulate: return "simulate";
        case EvalMode::Exact: return "exact";
        case EvalMode::Mcmc: return "mcmc";
    }
    return "unknown";
}

ScenarioConfig with_parameter(const ScenarioConfig& base, const std::string& path, double value) {
    auto doc = to_json(base);
    nlohmann::json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->is_object() || !node->contains(key)) {
            throw ConfigError(path + ": not a configuration field");
        }
        if (dot == std::string::npos) {
            auto& leaf = (*node)[key];
            const bool integer_slot = key == "slots_per_frame" || key == "slot_coefficient" || key == "parallelism";
            if (leaf.is_number_integer() || (leaf.is_null() && integer_slot)) {
                leaf = static_cast<std::int64_t>(std::llround(value));
            } else {
                leaf = value;
            }
            break;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
    // Setting one slot field explicitly clears the other.
    if (path == "slots_per_frame") doc["slot_coefficient"] = nullptr;
    if (path == "slot_coefficient") doc["slots_per_frame"] = nullptr;
    return load_config(doc);
}

std::vector<SweepRow> sweep(const SweepSpec& spec) {
    if (spec.grid.empty()) throw std::invalid_argument("sweep: grid must be nonempty");
    if (std::adjacent_find(spec.grid.begin(), spec.grid.end(), std::greater_equal<>()) != spec.grid.end()) {
        throw std::invalid_argument("sweep: grid must be strictly increasing");
    }
    std::vector<SweepRow> rows(spec.grid.size());
    parallel_for(spec.grid.size(), [&](std::size_t i) {
        const double v = spec.grid[i];
        const auto cfg = with_parameter(spec.base, spec.parameter, v);
        SweepRow& row = rows[i];
        row.value = v;
        row.slots = cfg.slots();
        for (auto mode : spec.modes) {
            switch (mode) {
                case EvalMode::Mcmc:
                    row.mcmc = expected_sifi_mcmc(cfg, spec.mcmc_samples, spec.seed).estimate;
                    break;
                case EvalMode::Exact:
                    row.exact = expected_sifi_exact(cfg);
                    break;
                case EvalMode::Simulate: {
                    const auto s = simulate(cfg, spec.rounds, spec.seed);
                    row.simulated = s.mean_sifi;
                    row.simulated_stderr = s.sifi_stderr;
                    break;
                }
            }
        }
    });
    return rows;
}

std::vector<SweepRow> sweep_sifi_vs_rate(SweepSpec spec) {
    spec.parameter = "compression_rate";
    return sweep(spec);
}

OptimizationResult optimize(const ScenarioConfig& base, int images, double sifi_target,
                            const OptimizeOptions& options) {
    // Targets above 1 are allowed and simply infeasible.
    if (!(sifi_target >= 0.0)) throw std::invalid_argument("optimize: SiFi target must be >= 0");

    const auto thresholds = grid_range(options.threshold_lo, options.threshold_hi, options.threshold_step);
    const auto rates = grid_range(options.rate_lo, options.rate_hi, options.rate_step);

    ScenarioConfig cfg = base;
    cfg.images_per_device = images;
    validate(cfg);

    OptimizationResult result;
    std::vector<ScenarioConfig> configs;
    for (double v : thresholds) {
        for (double r : rates) {
            ScenarioConfig point = cfg;
            point.relevance_threshold = v;
            point.compression_rate = r;
            OptimizationPoint p;
            p.threshold = v;
            p.rate = r;
            p.slots = point.slots();
            p.energy = expected_total_energy(point);
            result.grid.push_back(p);
            configs.push_back(point);
        }
    }

    auto evaluate = [&](std::size_t i) {
        auto& p = result.grid[i];
        if (p.sifi) return;
        p.sifi = expected_sifi_mcmc(configs[i], options.mcmc_samples, options.seed).estimate;
        p.feasible = *p.sifi >= sifi_target;
    };

    std::vector<std::size_t> order(result.grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Energy ascending, then the tie-break keys that do not need SiFi.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& pa = result.grid[a];
        const auto& pb = result.grid[b];
        return std::tie(pa.energy, pa.rate, pa.threshold) < std::tie(pb.energy, pb.rate, pb.threshold);
    });

    std::optional<std::size_t> best;
    auto better = [&](std::size_t a, std::size_t b) {
        const auto& pa = result.grid[a];
        const auto& pb = result.grid[b];
        if (pa.energy != pb.energy) return pa.energy < pb.energy;
        if (*pa.sifi != *pb.sifi) return *pa.sifi > *pb.sifi;
        if (pa.rate != pb.rate) return pa.rate < pb.rate;
        return pa.threshold < pb.threshold;
    };
    for (std::size_t idx : order) {
        if (best && !options.exhaustive && result.grid[idx].energy > result.grid[*best].energy) break;
        evaluate(idx);
        if (!result.grid[idx].feasible) continue;
        if (!best || better(idx, *best)) best = idx;
    }

    result.feasible = best.has_value();
    if (best) result.best = result.grid[*best];
    return result;
}

std::vector<ComparisonRow> compare_schemes(const ScenarioConfig& base, const std::vector<int>& images,
                                           double sifi_target, const OptimizeOptions& options) {
    std::vector<ComparisonRow> rows(images.size());
    parallel_for(images.size(), [&](std::size_t i) {
        const int n = images[i];
        ComparisonRow& row = rows[i];
        row.images = n;
        const auto opt = optimize(base, n, sifi_target, options);
        ScenarioConfig cfg = base;
        cfg.images_per_device = n;
        row.baseline_energy = baseline_energy(cfg);
        row.tinyairnet_energy = tinyairnet_energy(cfg);
        row.eta_tinyairnet = energy_saving_ratio(row.tinyairnet_energy, row.baseline_energy);
        row.feasible = opt.feasible;
        if (opt.feasible) {
            cfg.relevance_threshold = opt.best.threshold;
            cfg.compression_rate = opt.best.rate;
            row.threshold = opt.best.threshold;
            row.rate = opt.best.rate;
            row.slots = opt.best.slots;
            row.sifi = *opt.best.sifi;
            row.ecopull_energy = opt.best.energy;
            row.eta_ecopull = energy_saving_ratio(row.ecopull_energy, row.baseline_energy);
        } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.threshold = row.rate = row.sifi = nan;
            row.ecopull_energy = row.eta_ecopull = nan;
        }
    });
    return rows;
}

}  // namespace ecopull
