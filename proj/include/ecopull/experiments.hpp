#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecopull/config.hpp"

namespace ecopull {

/// L = c_L * ceil(r_max / r). A ratio within 1e-9 of an integer counts as
/// that integer.
int slots_for_rate(double rate, int coefficient, double max_rate = 4.86);

/// lo, lo + step, ... up to hi (inclusive within 1e-9).
std::vector<double> grid_range(double lo, double hi, double step);

enum class EvalMode { Simulate, Exact, Mcmc };

EvalMode parse_eval_mode(const std::string& name);
std::string to_string(EvalMode mode);

struct SweepSpec {
    std::string parameter = "compression_rate";  // dotted config path
    std::vector<double> grid;                     // nonempty, strictly increasing
    ScenarioConfig base;
    std::vector<EvalMode> modes{EvalMode::Mcmc};
    std::int64_t rounds = 10000;
    std::int64_t mcmc_samples = 10000;
    std::uint64_t seed = 1;
};

struct SweepRow {
    double value = 0.0;
    int slots = 0;
    std::optional<double> mcmc;
    std::optional<double> simulated;
    std::optional<double> simulated_stderr;
    std::optional<double> exact;
};

/// Config with one field replaced through its dotted path; revalidated.
ScenarioConfig with_parameter(const ScenarioConfig& base, const std::string& path, double value);

/// One row per grid value, L re-derived from the point's config. Every
/// point reuses the same seed.
std::vector<SweepRow> sweep(const SweepSpec& spec);

/// `sweep` with the parameter fixed to the compression rate.
std::vector<SweepRow> sweep_sifi_vs_rate(SweepSpec spec);

struct OptimizeOptions {
    double threshold_lo = 0.50;
    double threshold_hi = 0.80;
    double threshold_step = 0.01;
    double rate_lo = 1.0;
    double rate_hi = 2.0;
    double rate_step = 0.0667;
    std::int64_t mcmc_samples = 10000;
    std::uint64_t seed = 1;
    // Evaluate SiFi on every grid point instead of stopping at the cheapest
    // feasible one. The chosen point is the same either way.
    bool exhaustive = false;
};

struct OptimizationPoint {
    double threshold = 0.0;
    double rate = 0.0;
    int slots = 0;
    double energy = 0.0;
    std::optional<double> sifi;
    bool feasible = false;
};

struct OptimizationResult {
    bool feasible = false;
    OptimizationPoint best;
    std::vector<OptimizationPoint> grid;  // threshold-major order
};

/// Minimum expected device energy over the (V_th, r) grid subject to
/// MCMC-estimated SiFi >= sifi_target. Ties: lower energy, higher SiFi,
/// smaller r, smaller V_th.
OptimizationResult optimize(const ScenarioConfig& base, int images, double sifi_target,
                            const OptimizeOptions& options = {});

struct ComparisonRow {
    int images = 0;
    bool feasible = false;
    double threshold = 0.0;
    double rate = 0.0;
    int slots = 0;
    double sifi = 0.0;
    double ecopull_energy = 0.0;
    double tinyairnet_energy = 0.0;
    double baseline_energy = 0.0;
    double eta_ecopull = 0.0;
    double eta_tinyairnet = 0.0;
};

/// For each N: optimise EcoPull, price TinyAirNet at the template's
/// threshold (see BaselineOptions) and the PNG baseline, and report both
/// ratios to the baseline.
std::vector<ComparisonRow> compare_schemes(const ScenarioConfig& base, const std::vector<int>& images,
                                           double sifi_target, const OptimizeOptions& options = {});

}  // namespace ecopull
