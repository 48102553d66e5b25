#include "ecopull/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ecopull/experiments.hpp"
#include "ecopull/sifi.hpp"

namespace ecopull {
namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> known) {
    if (!obj.is_object()) {
        throw ConfigError((path.empty() ? std::string("document") : path) + ": expected an object");
    }
    std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) {
            throw ConfigError(join(path, key) + ": unknown field");
        }
    }
}

template <class T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(join(path, key) + ": wrong type (" + e.what() + ")");
    }
}

template <class T>
void read(const json& obj, const std::string& path, const char* key, std::optional<T>& out) {
    if (!obj.contains(key)) return;
    if (obj.at(key).is_null()) {
        out.reset();
        return;
    }
    T value{};
    read(obj, path, key, value);
    out = value;
}

template <class T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

void read_hw(const json& obj, const std::string& path, HardwareProfile& hw) {
    reject_unknown(obj, path, {"full_precision_bits", "sram_bits", "muac_bits", "parallelism"});
    read(obj, path, "full_precision_bits", hw.full_precision_bits);
    read(obj, path, "sram_bits", hw.sram_bits);
    read(obj, path, "muac_bits", hw.muac_bits);
    read(obj, path, "parallelism", hw.parallelism);
}

void read_model(const json& obj, const std::string& path, ModelCost& m) {
    reject_unknown(obj, path, {"complexity", "size", "activations"});
    read(obj, path, "complexity", m.complexity);
    read(obj, path, "size", m.size);
    read(obj, path, "activations", m.activations);
}

json hw_json(const HardwareProfile& hw) {
    return {{"full_precision_bits", hw.full_precision_bits},
            {"sram_bits", hw.sram_bits},
            {"muac_bits", hw.muac_bits},
            {"parallelism", optional_json(hw.parallelism)}};
}

json model_json(const ModelCost& m) {
    return {{"complexity", m.complexity}, {"size", m.size}, {"activations", m.activations}};
}

[[noreturn]] void out_of_range(const std::string& field, const std::string& bound, double value) {
    std::ostringstream os;
    os << field << ": value " << value << " violates bound " << bound;
    throw ConfigError(os.str());
}

void require_unit(const std::string& field, double v) {
    if (!(v >= 0.0 && v <= 1.0)) out_of_range(field, "[0, 1]", v);
}

void require_positive(const std::string& field, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) out_of_range(field, "> 0", v);
}

void require_nonnegative(const std::string& field, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) out_of_range(field, ">= 0", v);
}

void validate_hw(const std::string& path, const HardwareProfile& hw) {
    require_positive(path + ".full_precision_bits", hw.full_precision_bits);
    require_positive(path + ".sram_bits", hw.sram_bits);
    require_positive(path + ".muac_bits", hw.muac_bits);
    if (hw.sram_bits > hw.full_precision_bits) {
        out_of_range(path + ".sram_bits", "<= full_precision_bits", hw.sram_bits);
    }
    if (hw.effective_parallelism() < 1) {
        out_of_range(path + ".parallelism", ">= 1", hw.effective_parallelism());
    }
}

void validate_model(const std::string& path, const ModelCost& m) {
    require_nonnegative(path + ".complexity", m.complexity);
    require_nonnegative(path + ".size", m.size);
    require_nonnegative(path + ".activations", m.activations);
}

}  // namespace

int ScenarioConfig::slots() const {
    if (slots_per_frame) return *slots_per_frame;
    return slots_for_rate(compression_rate, slot_coefficient.value_or(1), baselines.png_rate);
}

double packet_bits(const ScenarioConfig& cfg) {
    if (!(cfg.compression_rate > 0.0)) {
        throw std::invalid_argument("packet_bits: compression rate must be > 0");
    }
    return cfg.compression_rate * static_cast<double>(cfg.image.pixels());
}

void validate(const ScenarioConfig& cfg) {
    if (cfg.devices < 1) out_of_range("devices", ">= 1", cfg.devices);
    if (cfg.images_per_device < 1) out_of_range("images_per_device", ">= 1", cfg.images_per_device);
    require_unit("relevance_threshold", cfg.relevance_threshold);
    require_unit("truth_threshold", cfg.truth_threshold);
    require_unit("penalty", cfg.penalty);
    require_positive("compression_rate", cfg.compression_rate);
    if (cfg.slots_per_frame.has_value() == cfg.slot_coefficient.has_value()) {
        throw ConfigError("slots_per_frame / slot_coefficient: exactly one must be set");
    }
    if (cfg.slots_per_frame && *cfg.slots_per_frame < 1) {
        out_of_range("slots_per_frame", ">= 1", *cfg.slots_per_frame);
    }
    if (cfg.slot_coefficient && *cfg.slot_coefficient < 1) {
        out_of_range("slot_coefficient", ">= 1", *cfg.slot_coefficient);
    }
    if (cfg.behavior_weight_bits < 1) out_of_range("behavior_weight_bits", ">= 1", cfg.behavior_weight_bits);
    require_positive("model_noise", cfg.sigma_ml());
    if (cfg.query_length < 0) out_of_range("query_length", ">= 0", cfg.query_length);

    require_positive("radio.tx_power", cfg.radio.tx_power);
    require_positive("radio.rx_power", cfg.radio.rx_power);
    require_positive("radio.rate", cfg.radio.rate);
    if (cfg.radio.slot_duration) require_positive("radio.slot_duration", *cfg.radio.slot_duration);

    if (cfg.image.channels < 1) out_of_range("image.channels", ">= 1", cfg.image.channels);
    if (cfg.image.height < 1) out_of_range("image.height", ">= 1", cfg.image.height);
    if (cfg.image.width < 1) out_of_range("image.width", ">= 1", cfg.image.width);

    validate_hw("behavior_hw", cfg.behavior_hw);
    validate_hw("compressor_hw", cfg.compressor_hw);
    validate_model("behavior_model", cfg.behavior_model);
    validate_model("compressor_model", cfg.compressor_model);

    if (cfg.frame_horizon < 0) out_of_range("frame_horizon", ">= 0", cfg.frame_horizon);
    if (cfg.mcmc.samples < 1) out_of_range("mcmc.samples", ">= 1", static_cast<double>(cfg.mcmc.samples));
    if (cfg.mcmc.burn_in < 0) out_of_range("mcmc.burn_in", ">= 0", static_cast<double>(cfg.mcmc.burn_in));
    require_positive("baselines.png_rate", cfg.baselines.png_rate);
    if (cfg.baselines.tinyairnet_threshold) {
        require_unit("baselines.tinyairnet_threshold", *cfg.baselines.tinyairnet_threshold);
    }
}

std::vector<std::string> config_warnings(const ScenarioConfig& cfg) {
    std::vector<std::string> out;
    const double kd = fidelity_distance(cfg.compression_rate);
    if (cfg.penalty < kd) {
        std::ostringstream os;
        os << "penalty " << cfg.penalty << " is below the fidelity distance " << kd
           << " at r=" << cfg.compression_rate << "; failed deliveries score better than successes";
        out.push_back(os.str());
    }
    return out;
}

ScenarioConfig load_config(const json& doc) {
    ScenarioConfig cfg;
    if (doc.is_null()) {
        validate(cfg);
        return cfg;
    }
    reject_unknown(doc, "",
                   {"devices", "images_per_device", "relevance_threshold", "truth_threshold",
                    "compression_rate", "slots_per_frame", "slot_coefficient", "penalty",
                    "behavior_weight_bits", "model_noise", "query_length", "radio", "image",
                    "behavior_hw", "compressor_hw", "behavior_model", "compressor_model",
                    "truth_distribution", "load_term", "frame_horizon", "analysis", "mcmc",
                    "baselines"});

    read(doc, "", "devices", cfg.devices);
    read(doc, "", "images_per_device", cfg.images_per_device);
    read(doc, "", "relevance_threshold", cfg.relevance_threshold);
    read(doc, "", "truth_threshold", cfg.truth_threshold);
    read(doc, "", "compression_rate", cfg.compression_rate);

    // An explicit L replaces the default coefficient unless both are given.
    const bool has_l = doc.contains("slots_per_frame") && !doc["slots_per_frame"].is_null();
    const bool has_c = doc.contains("slot_coefficient") && !doc["slot_coefficient"].is_null();
    if (has_l && has_c) {
        throw ConfigError("slots_per_frame / slot_coefficient: set only one");
    }
    read(doc, "", "slots_per_frame", cfg.slots_per_frame);
    read(doc, "", "slot_coefficient", cfg.slot_coefficient);
    if (has_l) cfg.slot_coefficient.reset();

    read(doc, "", "penalty", cfg.penalty);
    read(doc, "", "behavior_weight_bits", cfg.behavior_weight_bits);
    read(doc, "", "model_noise", cfg.model_noise);
    read(doc, "", "query_length", cfg.query_length);

    if (doc.contains("radio")) {
        const auto& r = doc["radio"];
        reject_unknown(r, "radio", {"tx_power", "rx_power", "rate", "slot_duration"});
        read(r, "radio", "tx_power", cfg.radio.tx_power);
        read(r, "radio", "rx_power", cfg.radio.rx_power);
        read(r, "radio", "rate", cfg.radio.rate);
        read(r, "radio", "slot_duration", cfg.radio.slot_duration);
    }
    if (doc.contains("image")) {
        const auto& im = doc["image"];
        reject_unknown(im, "image", {"channels", "height", "width"});
        read(im, "image", "channels", cfg.image.channels);
        read(im, "image", "height", cfg.image.height);
        read(im, "image", "width", cfg.image.width);
    }
    if (doc.contains("behavior_hw")) read_hw(doc["behavior_hw"], "behavior_hw", cfg.behavior_hw);
    if (doc.contains("compressor_hw")) read_hw(doc["compressor_hw"], "compressor_hw", cfg.compressor_hw);
    if (doc.contains("behavior_model")) read_model(doc["behavior_model"], "behavior_model", cfg.behavior_model);
    if (doc.contains("compressor_model")) {
        read_model(doc["compressor_model"], "compressor_model", cfg.compressor_model);
    }
    if (doc.contains("truth_distribution")) cfg.truth = truth_from_json(doc["truth_distribution"]);

    if (doc.contains("load_term")) {
        std::string v;
        read(doc, "", "load_term", v);
        if (v == "per_model") cfg.load_term = LoadTerm::PerModel;
        else if (v == "shared") cfg.load_term = LoadTerm::Shared;
        else throw ConfigError("load_term: expected per_model | shared, got '" + v + "'");
    }
    read(doc, "", "frame_horizon", cfg.frame_horizon);
    if (doc.contains("analysis")) {
        std::string v;
        read(doc, "", "analysis", v);
        if (v == "conditional") cfg.analysis = AnalysisModel::Conditional;
        else if (v == "frame_average") cfg.analysis = AnalysisModel::FrameAverage;
        else throw ConfigError("analysis: expected conditional | frame_average, got '" + v + "'");
    }
    if (doc.contains("mcmc")) {
        const auto& m = doc["mcmc"];
        reject_unknown(m, "mcmc", {"samples", "burn_in", "hastings"});
        read(m, "mcmc", "samples", cfg.mcmc.samples);
        read(m, "mcmc", "burn_in", cfg.mcmc.burn_in);
        read(m, "mcmc", "hastings", cfg.mcmc.hastings);
    }
    if (doc.contains("baselines")) {
        const auto& b = doc["baselines"];
        reject_unknown(b, "baselines",
                       {"png_rate", "baseline_query_reception", "tinyairnet_model_reception",
                        "tinyairnet_model_load", "tinyairnet_inference", "tinyairnet_threshold"});
        read(b, "baselines", "png_rate", cfg.baselines.png_rate);
        read(b, "baselines", "baseline_query_reception", cfg.baselines.baseline_query_reception);
        read(b, "baselines", "tinyairnet_model_reception", cfg.baselines.tinyairnet_model_reception);
        read(b, "baselines", "tinyairnet_model_load", cfg.baselines.tinyairnet_model_load);
        read(b, "baselines", "tinyairnet_inference", cfg.baselines.tinyairnet_inference);
        read(b, "baselines", "tinyairnet_threshold", cfg.baselines.tinyairnet_threshold);
    }

    validate(cfg);
    return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": malformed document (" + e.what() + ")");
    }
    return load_config(doc);
}

json to_json(const ScenarioConfig& cfg) {
    return {
        {"devices", cfg.devices},
        {"images_per_device", cfg.images_per_device},
        {"relevance_threshold", cfg.relevance_threshold},
        {"truth_threshold", cfg.truth_threshold},
        {"compression_rate", cfg.compression_rate},
        {"slots_per_frame", optional_json(cfg.slots_per_frame)},
        {"slot_coefficient", optional_json(cfg.slot_coefficient)},
        {"penalty", cfg.penalty},
        {"behavior_weight_bits", cfg.behavior_weight_bits},
        {"model_noise", optional_json(cfg.model_noise)},
        {"query_length", cfg.query_length},
        {"radio",
         {{"tx_power", cfg.radio.tx_power},
          {"rx_power", cfg.radio.rx_power},
          {"rate", cfg.radio.rate},
          {"slot_duration", optional_json(cfg.radio.slot_duration)}}},
        {"image",
         {{"channels", cfg.image.channels}, {"height", cfg.image.height}, {"width", cfg.image.width}}},
        {"behavior_hw", hw_json(cfg.behavior_hw)},
        {"compressor_hw", hw_json(cfg.compressor_hw)},
        {"behavior_model", model_json(cfg.behavior_model)},
        {"compressor_model", model_json(cfg.compressor_model)},
        {"truth_distribution", cfg.truth->to_json()},
        {"load_term", cfg.load_term == LoadTerm::PerModel ? "per_model" : "shared"},
        {"frame_horizon", cfg.frame_horizon},
        {"analysis", cfg.analysis == AnalysisModel::Conditional ? "conditional" : "frame_average"},
        {"mcmc",
         {{"samples", cfg.mcmc.samples},
          {"burn_in", cfg.mcmc.burn_in},
          {"hastings", cfg.mcmc.hastings}}},
        {"baselines",
         {{"png_rate", cfg.baselines.png_rate},
          {"baseline_query_reception", cfg.baselines.baseline_query_reception},
          {"tinyairnet_model_reception", cfg.baselines.tinyairnet_model_reception},
          {"tinyairnet_model_load", cfg.baselines.tinyairnet_model_load},
          {"tinyairnet_inference", cfg.baselines.tinyairnet_inference},
          {"tinyairnet_threshold", optional_json(cfg.baselines.tinyairnet_threshold)}}},
    };
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "': expected path=value");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) value = text;

    if (doc.is_null()) doc = json::object();
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError("override '" + assignment + "': empty path component");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        json& child = (*node)[key];
        if (child.is_null()) child = json::object();
        if (!child.is_object()) {
            throw ConfigError("override '" + assignment + "': '" + key + "' is not an object");
        }
        node = &child;
        start = dot + 1;
    }
}

}  // namespace ecopull
