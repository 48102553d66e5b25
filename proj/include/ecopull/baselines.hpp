#pragma once

#include <string_view>

#include "ecopull/config.hpp"

namespace ecopull {

enum class SchemeKind { EcoPull, TinyAirNet, Baseline };

std::string_view to_string(SchemeKind kind);

/// PNG baseline: every image sent at the PNG rate in a reserved slot, no ML.
double baseline_energy(const ScenarioConfig& cfg);

/// Behaviour-model filtering only; relevant images go out PNG-compressed.
double tinyairnet_energy(const ScenarioConfig& cfg);

/// Expected per-device energy of the given scheme under `cfg`.
double scheme_energy(SchemeKind kind, const ScenarioConfig& cfg);

/// eta = scheme / baseline. Throws std::invalid_argument for a zero baseline.
double energy_saving_ratio(double scheme_energy, double baseline_energy);

}  // namespace ecopull
