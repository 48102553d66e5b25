#include "ecopull/baselines.hpp"

#include <stdexcept>

#include "ecopull/device_energy.hpp"
#include "ecopull/hardware_energy.hpp"

namespace ecopull {
namespace {

double png_transmit_energy(const ScenarioConfig& cfg) {
    return cfg.radio.tx_power * cfg.baselines.png_rate * static_cast<double>(cfg.image.pixels()) /
           cfg.radio.rate;
}

}  // namespace

std::string_view to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::EcoPull: return "ecopull";
        case SchemeKind::TinyAirNet: return "tinyairnet";
        case SchemeKind::Baseline: return "baseline";
    }
    return "unknown";
}

double baseline_energy(const ScenarioConfig& cfg) {
    double energy = cfg.images_per_device * png_transmit_energy(cfg);
    if (cfg.baselines.baseline_query_reception) {
        energy += cfg.radio.rx_power * cfg.query_length * cfg.behavior_hw.sram_bits / cfg.radio.rate;
    }
    return energy;
}

double tinyairnet_energy(const ScenarioConfig& cfg) {
    const auto& opt = cfg.baselines;
    const auto& hw = cfg.behavior_hw;
    double energy = 0.0;
    if (opt.tinyairnet_inference) {
        energy += cfg.images_per_device * inference_energy(hw, cfg.behavior_model, cfg.image);
    }
    if (opt.tinyairnet_model_load) {
        energy += e_dram_access(hw) * cfg.behavior_model.size *
                  (static_cast<double>(hw.full_precision_bits) / hw.sram_bits);
    }
    if (opt.tinyairnet_model_reception) {
        energy += reception_energy(cfg);
    }
    const double threshold = opt.tinyairnet_threshold.value_or(cfg.relevance_threshold);
    const double pass = p_th(threshold, cfg.sigma_ml(), *cfg.truth);
    energy += cfg.images_per_device * pass * png_transmit_energy(cfg);
    return energy;
}

double scheme_energy(SchemeKind kind, const ScenarioConfig& cfg) {
    switch (kind) {
        case SchemeKind::EcoPull: return expected_total_energy(cfg);
        case SchemeKind::TinyAirNet: return tinyairnet_energy(cfg);
        case SchemeKind::Baseline: return baseline_energy(cfg);
    }
    throw std::invalid_argument("scheme_energy: unknown scheme");
}

double energy_saving_ratio(double scheme_energy, double baseline_energy) {
    if (baseline_energy == 0.0) throw std::invalid_argument("energy_saving_ratio: zero baseline energy");
    return scheme_energy / baseline_energy;
}

}  // namespace ecopull
