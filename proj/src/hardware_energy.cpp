#include "ecopull/hardware_energy.hpp"

#include <cmath>

namespace ecopull {

double e_muac(const HardwareProfile& hw) {
    const double ratio = static_cast<double>(hw.sram_bits) / hw.muac_bits;
    return 3.7 * std::pow(ratio, 1.25) * kPicojoule;
}

double e_dram_access(const HardwareProfile& hw) {
    const double ratio = static_cast<double>(hw.sram_bits) / hw.muac_bits;
    return 128.0 * 3.7 * ratio * kPicojoule;
}

InferenceBreakdown inference_breakdown(const HardwareProfile& hw, const ModelCost& model,
                                       const ImageGeometry& input) {
    const double muac = e_muac(hw);
    const double local = muac;       // E_L
    const double main = 2.0 * muac;  // E_M
    const double reuse = model.complexity / std::sqrt(static_cast<double>(hw.effective_parallelism()));
    const double precision = static_cast<double>(hw.full_precision_bits) / hw.sram_bits;

    InferenceBreakdown out;
    out.dram = e_dram_access(hw) * static_cast<double>(input.elements()) * precision;
    out.compute = muac * (model.complexity + 3.0 * model.activations);
    out.weights = main * model.size + local * reuse;
    out.activations = 2.0 * main * model.activations + local * reuse;
    return out;
}

double inference_energy(const HardwareProfile& hw, const ModelCost& model,
                        const ImageGeometry& input) {
    return inference_breakdown(hw, model, input).total();
}

}  // namespace ecopull
