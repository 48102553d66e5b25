#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecopull/analytic.hpp"
#include "ecopull/baselines.hpp"
#include "ecopull/config.hpp"
#include "ecopull/device_energy.hpp"
#include "ecopull/experiments.hpp"
#include "ecopull/hardware_energy.hpp"
#include "ecopull/mac_sim.hpp"
#include "ecopull/report.hpp"

namespace fs = std::filesystem;
using namespace ecopull;

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 1;
    std::string out_dir;
    std::string format = "csv";
};

ScenarioConfig resolve_config(const CommonOptions& opts) {
    nlohmann::json doc = nlohmann::json::object();
    if (!opts.config_path.empty()) doc = to_json(load_config_file(opts.config_path));
    for (const auto& o : opts.overrides) apply_override(doc, o);
    auto cfg = load_config(doc);
    for (const auto& w : config_warnings(cfg)) std::cerr << "warning: " << w << '\n';
    return cfg;
}

bool wants_csv(const CommonOptions& o) { return o.format == "csv" || o.format == "both"; }
bool wants_svg(const CommonOptions& o) { return o.format == "svg" || o.format == "both"; }

void emit_csv(const CommonOptions& opts, const std::string& name, const CsvTable& table) {
    if (!wants_csv(opts)) return;
    if (opts.out_dir.empty()) {
        table.write(std::cout);
        return;
    }
    fs::create_directories(opts.out_dir);
    const auto path = fs::path(opts.out_dir) / (name + ".csv");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    table.write(os);
    std::cerr << "wrote " << path.string() << '\n';
}

void emit_svg(const CommonOptions& opts, const std::string& name, const ChartSpec& spec,
              const std::vector<Series>& series) {
    if (!wants_svg(opts)) return;
    if (opts.out_dir.empty()) {
        write_svg_chart(std::cout, spec, series);
        return;
    }
    fs::create_directories(opts.out_dir);
    const auto path = fs::path(opts.out_dir) / (name + ".svg");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    write_svg_chart(os, spec, series);
    std::cerr << "wrote " << path.string() << '\n';
}

std::string fmt(double v) { return format_number(v); }
std::string fmt(const std::optional<double>& v) { return format_number(v); }
std::string fmt_int(std::int64_t v) { return std::to_string(v); }

/// "lo:hi:step" or a comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
        if (parts.size() != 3) throw CLI::ValidationError("grid", "expected lo:hi:step");
        return grid_range(parts[0], parts[1], parts[2]);
    }
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

void cmd_print_config(const CommonOptions& opts) {
    std::cout << to_json(resolve_config(opts)).dump(2) << '\n';
}

void cmd_simulate(const CommonOptions& opts, std::int64_t rounds, bool per_round) {
    const auto cfg = resolve_config(opts);
    CsvTable rows({"round", "sifi", "mean_device_energy", "frames", "delivered", "collided", "relevant",
                   "actual_relevant"});
    RoundCallback cb;
    if (per_round) {
        cb = [&rows](std::int64_t i, const RoundOutcome& r) {
            rows.row({fmt_int(i), fmt(r.sifi), fmt(r.mean_device_energy()), fmt_int(r.frames_used),
                      fmt_int(r.delivered_count), fmt_int(r.collided_count), fmt_int(r.relevant_count),
                      fmt_int(r.actual_relevant_count)});
        };
    }
    const auto s = simulate(cfg, rounds, opts.seed, cb);
    CsvTable summary({"rounds", "slots", "mean_sifi", "sifi_stderr", "mean_device_energy", "energy_stderr",
                      "delivery_rate"});
    summary.row({fmt_int(s.rounds), fmt_int(cfg.slots()), fmt(s.mean_sifi), fmt(s.sifi_stderr),
                 fmt(s.mean_total_energy), fmt(s.energy_stderr), fmt(s.delivery_rate)});
    emit_csv(opts, "simulate", summary);
    if (per_round) emit_csv(opts, "simulate_rounds", rows);
}

void cmd_analyze(const CommonOptions& opts, const std::string& mode, std::int64_t samples, bool trace) {
    const auto cfg = resolve_config(opts);
    const auto eval = parse_eval_mode(mode);
    CsvTable table({"mode", "estimate", "acceptance_rate", "samples", "p_th", "slots"});
    const SifiModel model(cfg);
    if (eval == EvalMode::Exact) {
        const double v = expected_sifi_exact(cfg);
        table.row({"exact", fmt(v), "", fmt_int(composition_count(cfg.devices, cfg.images_per_device)),
                   fmt(model.p_th()), fmt_int(cfg.slots())});
        emit_csv(opts, "analyze", table);
        return;
    }
    if (eval != EvalMode::Mcmc) throw CLI::ValidationError("--mode", "analyze supports exact | mcmc");
    const std::int64_t t = samples > 0 ? samples : cfg.mcmc.samples;
    McmcRunOptions run;
    run.keep_trace = trace;
    const auto r = expected_sifi_mcmc(cfg, t, opts.seed, run);
    table.row({"mcmc", fmt(r.estimate), fmt(r.acceptance_rate), fmt_int(r.samples), fmt(model.p_th()),
               fmt_int(cfg.slots())});
    emit_csv(opts, "analyze", table);
    if (trace) {
        CsvTable tt({"step", "sifi"});
        for (std::size_t i = 0; i < r.trace.size(); ++i) tt.row({fmt_int(static_cast<std::int64_t>(i)), fmt(r.trace[i])});
        emit_csv(opts, "analyze_trace", tt);
    }
}

void cmd_sweep(const CommonOptions& opts, const std::string& grid_text, const std::vector<int>& coefficients,
               const std::vector<std::string>& modes, std::int64_t rounds, std::int64_t samples) {
    const auto base = resolve_config(opts);
    SweepSpec spec;
    spec.grid = parse_grid(grid_text);
    spec.modes.clear();
    for (const auto& m : modes) spec.modes.push_back(parse_eval_mode(m));
    spec.rounds = rounds;
    spec.mcmc_samples = samples;
    spec.seed = opts.seed;

    CsvTable table({"slot_coefficient", "rate", "slots", "sifi_mcmc", "sifi_simulated", "sifi_simulated_stderr",
                    "sifi_exact"});
    std::vector<Series> series;
    for (int c : coefficients) {
        spec.base = with_parameter(base, "slot_coefficient", c);
        const auto rows = sweep_sifi_vs_rate(spec);
        Series mc{"c_L=" + std::to_string(c) + " analysis", {}, {}};
        Series sim{"c_L=" + std::to_string(c) + " simulation", {}, {}};
        for (const auto& r : rows) {
            table.row({fmt_int(c), fmt(r.value), fmt_int(r.slots), fmt(r.mcmc), fmt(r.simulated),
                       fmt(r.simulated_stderr), fmt(r.exact)});
            if (r.mcmc || r.exact) {
                mc.x.push_back(r.value);
                mc.y.push_back(r.mcmc ? *r.mcmc : *r.exact);
            }
            if (r.simulated) {
                sim.x.push_back(r.value);
                sim.y.push_back(*r.simulated);
            }
        }
        if (!mc.x.empty()) series.push_back(mc);
        if (!sim.x.empty()) series.push_back(sim);
    }
    emit_csv(opts, "sweep_sifi", table);
    emit_svg(opts, "sweep_sifi", {"SiFi versus compression rate", "r (bpp)", "SiFi"}, series);
}

void cmd_optimize(const CommonOptions& opts, int images, double target, std::int64_t samples, bool grid,
                  double rate_step) {
    const auto base = resolve_config(opts);
    OptimizeOptions o;
    o.mcmc_samples = samples;
    o.seed = opts.seed;
    o.exhaustive = grid;
    o.rate_step = rate_step;
    const auto r = optimize(base, images, target, o);
    CsvTable table({"images", "target", "feasible", "threshold", "rate", "slots", "energy", "sifi",
                    "baseline_energy", "eta"});
    ScenarioConfig cfg = base;
    cfg.images_per_device = images;
    const double base_e = baseline_energy(cfg);
    if (r.feasible) {
        table.row({fmt_int(images), fmt(target), "1", fmt(r.best.threshold), fmt(r.best.rate),
                   fmt_int(r.best.slots), fmt(r.best.energy), fmt(r.best.sifi), fmt(base_e),
                   fmt(energy_saving_ratio(r.best.energy, base_e))});
    } else {
        table.row({fmt_int(images), fmt(target), "0", "", "", "", "", "", fmt(base_e), ""});
    }
    emit_csv(opts, "optimize", table);
    if (grid) {
        CsvTable g({"threshold", "rate", "slots", "energy", "sifi", "feasible"});
        for (const auto& p : r.grid) {
            g.row({fmt(p.threshold), fmt(p.rate), fmt_int(p.slots), fmt(p.energy), fmt(p.sifi),
                   p.feasible ? "1" : "0"});
        }
        emit_csv(opts, "optimize_grid", g);
    }
}

void print_baseline_assumptions(const ScenarioConfig& cfg) {
    const auto& b = cfg.baselines;
    std::cerr << "baseline assumptions: png_rate=" << b.png_rate
              << " bpp, baseline_query_reception=" << b.baseline_query_reception
              << ", tinyairnet_model_reception=" << b.tinyairnet_model_reception
              << ", tinyairnet_model_load=" << b.tinyairnet_model_load
              << ", tinyairnet_inference=" << b.tinyairnet_inference
              << ", tinyairnet_threshold="
              << b.tinyairnet_threshold.value_or(cfg.relevance_threshold) << '\n';
}

void cmd_compare(const CommonOptions& opts, const std::string& images_text, double target, std::int64_t samples,
                 double rate_step) {
    const auto base = resolve_config(opts);
    print_baseline_assumptions(base);
    std::vector<int> images;
    for (double v : parse_grid(images_text)) images.push_back(static_cast<int>(std::lround(v)));
    OptimizeOptions o;
    o.mcmc_samples = samples;
    o.seed = opts.seed;
    o.rate_step = rate_step;
    const auto rows = compare_schemes(base, images, target, o);
    CsvTable table({"images", "feasible", "threshold", "rate", "slots", "sifi", "ecopull_energy",
                    "tinyairnet_energy", "baseline_energy", "eta_ecopull", "eta_tinyairnet"});
    Series eco{"EcoPull", {}, {}}, tiny{"TinyAirNet", {}, {}};
    for (const auto& r : rows) {
        table.row({fmt_int(r.images), r.feasible ? "1" : "0", fmt(r.threshold), fmt(r.rate), fmt_int(r.slots),
                   fmt(r.sifi), fmt(r.ecopull_energy), fmt(r.tinyairnet_energy), fmt(r.baseline_energy),
                   fmt(r.eta_ecopull), fmt(r.eta_tinyairnet)});
        eco.x.push_back(r.images);
        eco.y.push_back(r.eta_ecopull);
        tiny.x.push_back(r.images);
        tiny.y.push_back(r.eta_tinyairnet);
    }
    emit_csv(opts, "compare", table);
    emit_svg(opts, "compare", {"Energy relative to the PNG baseline", "N (images per device)", "eta"},
             {eco, tiny});
}

void cmd_energy_breakdown(const CommonOptions& opts, int relevant) {
    const auto cfg = resolve_config(opts);
    const int s = relevant >= 0 ? relevant : 0;
    CsvTable table({"component", "joules"});
    auto add_inference = [&](const std::string& name, const InferenceBreakdown& b) {
        table.row({name + ".dram", fmt(b.dram)});
        table.row({name + ".compute", fmt(b.compute)});
        table.row({name + ".weights", fmt(b.weights)});
        table.row({name + ".activations", fmt(b.activations)});
        table.row({name + ".total", fmt(b.total())});
    };
    add_inference("behavior_inference", inference_breakdown(cfg.behavior_hw, cfg.behavior_model, cfg.image));
    add_inference("compressor_inference",
                  inference_breakdown(cfg.compressor_hw, cfg.compressor_model, cfg.image));
    table.row({"model_load", fmt(model_load_energy(cfg))});
    table.row({"reception", fmt(reception_energy(cfg))});
    table.row({"image_transmit", fmt(image_transmit_energy(cfg))});
    const auto e = device_energy(cfg, s);
    table.row({"computation(S=" + std::to_string(s) + ")", fmt(e.computation)});
    table.row({"communication(S=" + std::to_string(s) + ")", fmt(e.communication)});
    table.row({"total(S=" + std::to_string(s) + ")", fmt(e.total)});
    emit_csv(opts, "energy_breakdown", table);
}

void cmd_expected_energy(const CommonOptions& opts) {
    const auto cfg = resolve_config(opts);
    CsvTable table({"images", "threshold", "rate", "p_th", "fixed_energy", "per_relevant_image_energy",
                    "expected_energy", "expected_energy_closed_form", "baseline_energy", "tinyairnet_energy"});
    table.row({fmt_int(cfg.images_per_device), fmt(cfg.relevance_threshold), fmt(cfg.compression_rate),
               fmt(p_th(cfg)), fmt(fixed_energy(cfg)), fmt(per_relevant_image_energy(cfg)),
               fmt(expected_total_energy(cfg)), fmt(expected_total_energy_closed_form(cfg)),
               fmt(baseline_energy(cfg)), fmt(tinyairnet_energy(cfg))});
    emit_csv(opts, "expected_energy", table);
}

void add_common(CLI::App* app, CommonOptions& opts) {
    app->add_option("--config", opts.config_path, "JSON scenario file")->check(CLI::ExistingFile);
    app->add_option("--set", opts.overrides, "Override a field, e.g. --set devices=3 --set radio.rate=2e5");
    app->add_option("--seed", opts.seed, "Master seed");
    app->add_option("--out", opts.out_dir, "Output directory (stdout when omitted)");
    app->add_option("--format", opts.format, "csv | svg | both")
        ->check(CLI::IsMember({"csv", "svg", "both"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EcoPull simulator and analytic toolkit"};
    app.require_subcommand(0, 1);
    CommonOptions opts;
    add_common(&app, opts);
    bool print_config_flag = false;
    app.add_flag("--print-config", print_config_flag, "Print the resolved configuration and exit");

    auto* pc = app.add_subcommand("print-config", "Print the fully resolved configuration as JSON");
    add_common(pc, opts);

    std::int64_t rounds = 10000;
    bool per_round = false;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo rounds of the full protocol");
    add_common(sim, opts);
    sim->add_option("--rounds", rounds, "Number of independent rounds")->check(CLI::PositiveNumber);
    sim->add_flag("--per-round", per_round, "Also write one row per round");

    std::string mode = "mcmc";
    std::int64_t samples = 0;
    bool trace = false;
    auto* an = app.add_subcommand("analyze", "Analytic expected SiFi");
    add_common(an, opts);
    an->add_option("--mode", mode, "exact | mcmc")->check(CLI::IsMember({"exact", "mcmc"}));
    an->add_option("--samples,-T", samples, "Chain length (default: mcmc.samples)");
    an->add_flag("--trace", trace, "Write the chain trace");

    std::string rates = "1:4.8:0.1";
    std::vector<int> coefficients{5};
    std::vector<std::string> modes{"mcmc"};
    std::int64_t sweep_rounds = 10000;
    std::int64_t sweep_samples = 10000;
    auto* sw = app.add_subcommand("sweep-sifi", "SiFi as a function of the compression rate");
    add_common(sw, opts);
    sw->add_option("--rates", rates, "lo:hi:step or comma list");
    sw->add_option("--coefficients", coefficients, "Slot coefficients c_L")->delimiter(',');
    sw->add_option("--modes", modes, "simulate, exact, mcmc")->delimiter(',');
    sw->add_option("--rounds", sweep_rounds, "Simulation rounds per point");
    sw->add_option("--samples,-T", sweep_samples, "MCMC samples per point");

    int images = 100;
    double target = 0.8;
    std::int64_t opt_samples = 10000;
    bool full_grid = false;
    double rate_step = 0.0667;
    auto* op = app.add_subcommand("optimize", "Minimum-energy (V_th, r) under a SiFi constraint");
    add_common(op, opts);
    op->add_option("--images,-N", images, "Images per device")->check(CLI::PositiveNumber);
    op->add_option("--target", target, "SiFi target")->check(CLI::NonNegativeNumber);
    op->add_option("--samples,-T", opt_samples, "MCMC samples per grid point");
    op->add_option("--rate-step", rate_step, "Step of the r grid over [1, 2]");
    op->add_flag("--grid", full_grid, "Evaluate and write the whole grid");

    std::string images_list = "5:100:5";
    auto* cmp = app.add_subcommand("compare", "EcoPull, TinyAirNet and PNG baseline against N");
    add_common(cmp, opts);
    cmp->add_option("--images", images_list, "lo:hi:step or comma list");
    cmp->add_option("--target", target, "SiFi target")->check(CLI::NonNegativeNumber);
    cmp->add_option("--samples,-T", opt_samples, "MCMC samples per grid point");
    cmp->add_option("--rate-step", rate_step, "Step of the r grid over [1, 2]");

    int relevant = 0;
    auto* eb = app.add_subcommand("energy-breakdown", "Per-term device energy");
    add_common(eb, opts);
    eb->add_option("--relevant,-S", relevant, "Relevant images on the device")->check(CLI::NonNegativeNumber);

    auto* ee = app.add_subcommand("expected-energy", "Expected per-device energy and its parts");
    add_common(ee, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (print_config_flag || pc->parsed()) {
            cmd_print_config(opts);
        } else if (sim->parsed()) {
            cmd_simulate(opts, rounds, per_round);
        } else if (an->parsed()) {
            cmd_analyze(opts, mode, samples, trace);
        } else if (sw->parsed()) {
            cmd_sweep(opts, rates, coefficients, modes, sweep_rounds, sweep_samples);
        } else if (op->parsed()) {
            cmd_optimize(opts, images, target, opt_samples, full_grid, rate_step);
        } else if (cmp->parsed()) {
            cmd_compare(opts, images_list, target, opt_samples, rate_step);
        } else if (eb->parsed()) {
            cmd_energy_breakdown(opts, relevant);
        } else if (ee->parsed()) {
            cmd_expected_energy(opts);
        } else {
            std::cout << app.help();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
