#pragma once

#include "ecopull/config.hpp"
#include "ecopull/truth_distribution.hpp"

namespace ecopull {

struct EnergyBreakdown {
    double computation = 0.0;
    double communication = 0.0;
    double total = 0.0;

    static EnergyBreakdown of(double computation, double communication) {
        return {computation, communication, computation + communication};
    }
};

/// Cost of loading both models from DRAM into SRAM once per query.
double model_load_energy(const ScenarioConfig& cfg);

/// Behaviour-model reception plus query-vector reception, in joules.
double reception_energy(const ScenarioConfig& cfg);

/// Energy to transmit one compressed image.
double image_transmit_energy(const ScenarioConfig& cfg);

/// N behaviour inferences, S compressor inferences, and the model load.
/// Throws std::invalid_argument when S is outside [0, N].
double computation_energy(const ScenarioConfig& cfg, int relevant_count);

/// Reception of model and query plus transmission of S packets.
double communication_energy(const ScenarioConfig& cfg, int relevant_count);

EnergyBreakdown device_energy(const ScenarioConfig& cfg, int relevant_count);

/// Probability that one image passes the relevance threshold,
/// integral over [0, 1] of Q((V_th - beta) / sigma) g_T(beta).
double p_th(double threshold, double sigma, const TruthDistribution& truth);
double p_th(const ScenarioConfig& cfg);

/// Integral over [lo, 1] of Q((V_th - beta) / sigma) g_T(beta); p_th is lo = 0.
double relevance_mass(double threshold, double sigma, const TruthDistribution& truth, double lo);

/// Binomial probability that a device holds `relevant` relevant images out of N.
double p_rel(int relevant, int images, double p);

/// The part of the expected device energy that does not scale with S.
double fixed_energy(const ScenarioConfig& cfg);

/// Marginal expected cost of one relevant image: compressor inference plus uplink.
double per_relevant_image_energy(const ScenarioConfig& cfg);

/// Expected per-device energy as an explicit sum over the relevant count.
double expected_total_energy(const ScenarioConfig& cfg);

/// Same quantity through the binomial mean, N P_th (per-image cost) + epsilon.
double expected_total_energy_closed_form(const ScenarioConfig& cfg);

}  // namespace ecopull
