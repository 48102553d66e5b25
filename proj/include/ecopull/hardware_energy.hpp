#pragma once

#include "ecopull/config.hpp"

namespace ecopull {

inline constexpr double kPicojoule = 1e-12;

/// Energy of one MUAC operation: 3.7 (b_q / b_MUAC)^1.25 pJ, in joules.
double e_muac(const HardwareProfile& hw);

/// Energy of one b_q-bit DRAM access: 128 * 3.7 (b_q / b_MUAC) pJ, in joules.
double e_dram_access(const HardwareProfile& hw);

/// Per-term decomposition of one inference.
struct InferenceBreakdown {
    double dram = 0.0;         // input fetch from DRAM
    double compute = 0.0;      // E_C
    double weights = 0.0;      // E_W
    double activations = 0.0;  // E_A

    double hardware() const { return compute + weights + activations; }
    double total() const { return dram + hardware(); }
};

InferenceBreakdown inference_breakdown(const HardwareProfile& hw, const ModelCost& model,
                                       const ImageGeometry& input);

/// E_inf = E_DRAM + E_HW for one input.
double inference_energy(const HardwareProfile& hw, const ModelCost& model,
                        const ImageGeometry& input);

}  // namespace ecopull
