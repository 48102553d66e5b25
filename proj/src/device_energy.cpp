#include "ecopull/device_energy.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ecopull/hardware_energy.hpp"
#include "ecopull/quadrature.hpp"

namespace ecopull {

double model_load_energy(const ScenarioConfig& cfg) {
    const auto& b = cfg.behavior_hw;
    const auto& c = cfg.compressor_hw;
    const double b_precision = static_cast<double>(b.full_precision_bits) / b.sram_bits;
    if (cfg.load_term == LoadTerm::Shared) {
        return e_dram_access(b) * (cfg.behavior_model.size + cfg.compressor_model.size) * b_precision;
    }
    const double c_precision = static_cast<double>(c.full_precision_bits) / c.sram_bits;
    return e_dram_access(b) * cfg.behavior_model.size * b_precision +
           e_dram_access(c) * cfg.compressor_model.size * c_precision;
}

double reception_energy(const ScenarioConfig& cfg) {
    const double bits = cfg.behavior_model.size * cfg.behavior_weight_bits +
                        static_cast<double>(cfg.query_length) * cfg.behavior_hw.sram_bits;
    return cfg.radio.rx_power * bits / cfg.radio.rate;
}

double image_transmit_energy(const ScenarioConfig& cfg) {
    return cfg.radio.tx_power * packet_bits(cfg) / cfg.radio.rate;
}

double computation_energy(const ScenarioConfig& cfg, int relevant_count) {
    if (relevant_count < 0 || relevant_count > cfg.images_per_device) {
        throw std::invalid_argument("computation_energy: relevant count outside [0, N]");
    }
    const double behavior = inference_energy(cfg.behavior_hw, cfg.behavior_model, cfg.image);
    const double compressor = inference_energy(cfg.compressor_hw, cfg.compressor_model, cfg.image);
    return cfg.images_per_device * behavior + relevant_count * compressor + model_load_energy(cfg);
}

double communication_energy(const ScenarioConfig& cfg, int relevant_count) {
    if (relevant_count < 0) {
        throw std::invalid_argument("communication_energy: relevant count must be >= 0");
    }
    return reception_energy(cfg) + relevant_count * image_transmit_energy(cfg);
}

EnergyBreakdown device_energy(const ScenarioConfig& cfg, int relevant_count) {
    return EnergyBreakdown::of(computation_energy(cfg, relevant_count),
                               communication_energy(cfg, relevant_count));
}

double relevance_mass(double threshold, double sigma, const TruthDistribution& truth, double lo) {
    if (!(sigma > 0.0)) throw std::invalid_argument("relevance_mass: sigma must be > 0");
    if (lo >= 1.0) return 0.0;
    auto integrand = [&](double beta) {
        return q_function((threshold - beta) / sigma) * truth.density(beta);
    };
    // The Q factor turns over within a few sigma of the threshold.
    std::vector<double> cuts = truth.breakpoints();
    for (double k : {-8.0, -4.0, -1.0, 0.0, 1.0, 4.0, 8.0}) cuts.push_back(threshold + k * sigma);
    return integrate(integrand, lo, 1.0, cuts, 1e-10).value;
}

double p_th(double threshold, double sigma, const TruthDistribution& truth) {
    return relevance_mass(threshold, sigma, truth, 0.0);
}

double p_th(const ScenarioConfig& cfg) {
    return p_th(cfg.relevance_threshold, cfg.sigma_ml(), *cfg.truth);
}

double p_rel(int relevant, int images, double p) {
    if (images < 0 || relevant < 0 || relevant > images) {
        throw std::invalid_argument("p_rel: relevant count outside [0, N]");
    }
    if (p <= 0.0) return relevant == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return relevant == images ? 1.0 : 0.0;
    const double log_choose = std::lgamma(images + 1.0) - std::lgamma(relevant + 1.0) -
                              std::lgamma(images - relevant + 1.0);
    return std::exp(log_choose + relevant * std::log(p) + (images - relevant) * std::log1p(-p));
}

double fixed_energy(const ScenarioConfig& cfg) {
    return cfg.images_per_device * inference_energy(cfg.behavior_hw, cfg.behavior_model, cfg.image) +
           model_load_energy(cfg) + reception_energy(cfg);
}

double per_relevant_image_energy(const ScenarioConfig& cfg) {
    return inference_energy(cfg.compressor_hw, cfg.compressor_model, cfg.image) +
           image_transmit_energy(cfg);
}

double expected_total_energy(const ScenarioConfig& cfg) {
    const double p = p_th(cfg);
    const double cost = per_relevant_image_energy(cfg);
    double sum = 0.0;
    for (int nu = 0; nu <= cfg.images_per_device; ++nu) {
        sum += nu * cost * p_rel(nu, cfg.images_per_device, p);
    }
    return sum + fixed_energy(cfg);
}

double expected_total_energy_closed_form(const ScenarioConfig& cfg) {
    return cfg.images_per_device * p_th(cfg) * per_relevant_image_energy(cfg) + fixed_energy(cfg);
}

}  // namespace ecopull
