#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecopull/truth_distribution.hpp"

namespace ecopull {

/// Raised for malformed or out-of-range configuration input. The message
/// names the offending field and its bound.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ImageGeometry {
    int channels = 3;
    int height = 640;
    int width = 480;

    std::int64_t pixels() const { return std::int64_t{height} * width; }
    std::int64_t elements() const { return std::int64_t{channels} * pixels(); }

    bool operator==(const ImageGeometry&) const = default;
};

struct RadioProfile {
    double tx_power = 0.108;    // W
    double rx_power = 0.0669;   // W
    double rate = 1e5;          // bit/s, shared by uplink and downlink
    // Bookkeeping only; when unset the slot lasts one packet at `rate`.
    std::optional<double> slot_duration;

    bool operator==(const RadioProfile&) const = default;
};

/// Fixed-point accelerator description.
struct HardwareProfile {
    int full_precision_bits = 16;  // b_max, DRAM precision
    int sram_bits = 8;             // b_q
    int muac_bits = 16;            // b_MUAC
    // Number of MUAC units; defaults to 64 * b_MUAC / b_q.
    std::optional<int> parallelism;

    int effective_parallelism() const {
        return parallelism.value_or(64 * muac_bits / sram_bits);
    }

    bool operator==(const HardwareProfile&) const = default;
};

/// Network cost triple: MUAC operations, weights and biases, activations.
struct ModelCost {
    double complexity = 0.0;
    double size = 0.0;
    double activations = 0.0;

    bool operator==(const ModelCost&) const = default;
};

/// How the model-load term of the computation energy charges DRAM reads.
enum class LoadTerm {
    PerModel,  // each model's own E_D and b_q on its own weights
    Shared,    // one E_D and b_q (behaviour model's) on W_B + W_C
};

/// Which per-realization SiFi expression the analytic evaluators use.
enum class AnalysisModel {
    Conditional,  // exact E[SiFi | psi] accounting for how relevance and slots interact
    FrameAverage, // P_Omega * E[Z] + (1 - P_Omega) with frame-averaged success probability
};

struct McmcOptions {
    std::int64_t samples = 10000;
    std::int64_t burn_in = 0;
    // Corrects for the occupied-bin proposal asymmetry; off uses P(Y')/P(Y) alone.
    bool hastings = true;

    bool operator==(const McmcOptions&) const = default;
};

/// Assumption toggles for the PNG baseline and TinyAirNet energy models.
struct BaselineOptions {
    double png_rate = 4.86;  // bpp of the PNG-compressed images
    bool baseline_query_reception = false;
    bool tinyairnet_model_reception = true;
    bool tinyairnet_model_load = true;
    bool tinyairnet_inference = true;
    // V_th used to price TinyAirNet; defaults to the scenario's relevance_threshold.
    std::optional<double> tinyairnet_threshold;

    bool operator==(const BaselineOptions&) const = default;
};

struct ScenarioConfig {
    int devices = 5;                   // K
    int images_per_device = 100;       // N
    double relevance_threshold = 0.6;  // V_th
    double truth_threshold = 0.9;      // delta
    double compression_rate = 2.0;     // r, bpp
    // Exactly one of these sets L; the coefficient derives L from r.
    std::optional<int> slots_per_frame;
    std::optional<int> slot_coefficient = 5;
    double penalty = 1.0;              // Gamma
    int behavior_weight_bits = 8;      // b_B
    std::optional<double> model_noise; // sigma_ML, defaults to 1 / b_B
    int query_length = 512;            // M

    RadioProfile radio;
    ImageGeometry image;
    HardwareProfile behavior_hw{16, 8, 16, std::nullopt};
    HardwareProfile compressor_hw{16, 16, 16, std::nullopt};
    ModelCost behavior_model{117e6, 0.976e6, 4.309e6};
    ModelCost compressor_model{477e6, 0.0184e6, 3.54e6};
    TruthModel truth;

    LoadTerm load_term = LoadTerm::PerModel;
    // 0 runs frames until every queue drains; otherwise a fixed frame count.
    int frame_horizon = 0;
    AnalysisModel analysis = AnalysisModel::Conditional;
    McmcOptions mcmc;
    BaselineOptions baselines;

    double sigma_ml() const {
        return model_noise.value_or(1.0 / behavior_weight_bits);
    }

    /// L, either explicit or c_L * ceil(r_max / r).
    int slots() const;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Bits of one compressed image, b_p = r * M_H * M_W. Throws
/// std::invalid_argument for r <= 0.
double packet_bits(const ScenarioConfig& cfg);

/// Throws ConfigError naming the first violated bound.
void validate(const ScenarioConfig& cfg);

/// Non-fatal issues, e.g. a penalty below the fidelity distance.
std::vector<std::string> config_warnings(const ScenarioConfig& cfg);

/// Overrides the defaults with whatever the document sets and validates.
ScenarioConfig load_config(const nlohmann::json& doc);
ScenarioConfig load_config_file(const std::string& path);

/// Fully resolved form; `load_config(to_json(c)) == c`.
nlohmann::json to_json(const ScenarioConfig& cfg);

/// Applies `a.b.c=value` to a document. The value is parsed as JSON when
/// possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace ecopull
