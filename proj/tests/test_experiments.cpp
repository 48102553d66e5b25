#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "ecopull/analytic.hpp"
#include "ecopull/baselines.hpp"
#include "ecopull/device_energy.hpp"
#include "ecopull/experiments.hpp"
#include "ecopull/report.hpp"

using namespace ecopull;

TEST_CASE("slots per frame from the compression rate") {
    CHECK(slots_for_rate(1.2, 5) == 25);
    CHECK(slots_for_rate(4.86, 5) == 5);
    CHECK(slots_for_rate(2.5, 2) == 4);
    CHECK(slots_for_rate(4.86 / 3, 1) == 3);
    CHECK_THROWS_AS(slots_for_rate(0.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(slots_for_rate(1.0, 0), std::invalid_argument);
    int prev = std::numeric_limits<int>::max();
    for (double r : grid_range(0.5, 6.0, 0.01)) {
        const int l = slots_for_rate(r, 3);
        CHECK(l <= prev);
        CHECK(l == 3 * static_cast<int>(std::ceil(4.86 / r - 1e-9)));
        prev = l;
    }
}

TEST_CASE("grid range") {
    CHECK(grid_range(1.0, 2.0, 0.0667).size() == 15);
    CHECK(grid_range(0.5, 0.8, 0.01).size() == 31);
    CHECK(grid_range(1.0, 1.0, 0.1).size() == 1);
    CHECK_THROWS(grid_range(2.0, 1.0, 0.1));
    CHECK_THROWS(grid_range(1.0, 2.0, 0.0));
}

TEST_CASE("with_parameter revalidates and rederives slots") {
    const ScenarioConfig base;
    const auto c = with_parameter(base, "compression_rate", 1.2);
    CHECK(c.compression_rate == 1.2);
    CHECK(c.slots() == 25);
    CHECK(with_parameter(base, "radio.rate", 2e5).radio.rate == 2e5);
    const auto fixed = with_parameter(base, "slots_per_frame", 9);
    CHECK(fixed.slots() == 9);
    CHECK(with_parameter(fixed, "slot_coefficient", 2).slots() == 2 * 3);
    CHECK_THROWS_AS(with_parameter(base, "relevance_threshold", 2.0), ConfigError);
    CHECK_THROWS_AS(with_parameter(base, "nonsense", 1.0), ConfigError);
}

TEST_CASE("sweep validates its grid") {
    SweepSpec spec;
    spec.grid = {};
    CHECK_THROWS(sweep(spec));
    spec.grid = {1.0, 1.0};
    CHECK_THROWS(sweep(spec));
    spec.grid = {2.0, 1.0};
    CHECK_THROWS(sweep(spec));
}

TEST_CASE("sweep discontinuities follow the slot count") {
    SweepSpec spec;
    spec.base.images_per_device = 20;
    spec.grid = grid_range(1.0, 4.8, 0.1);
    spec.modes = {EvalMode::Mcmc};
    spec.mcmc_samples = 3000;
    const auto rows = sweep_sifi_vs_rate(spec);
    REQUIRE(rows.size() == spec.grid.size());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].slots == slots_for_rate(rows[i].value, 5));
        if (rows[i].slots == rows[i - 1].slots) {
            CHECK(*rows[i].mcmc >= *rows[i - 1].mcmc - 1e-12);
        }
    }
}

TEST_CASE("sweep with several modes fills every column") {
    SweepSpec spec;
    spec.base.devices = 2;
    spec.base.images_per_device = 3;
    spec.grid = {1.0, 2.0};
    spec.modes = {EvalMode::Exact, EvalMode::Mcmc, EvalMode::Simulate};
    spec.rounds = 2000;
    spec.mcmc_samples = 2000;
    for (const auto& r : sweep(spec)) {
        CHECK(r.exact.has_value());
        CHECK(r.mcmc.has_value());
        CHECK(r.simulated.has_value());
        CHECK(r.simulated_stderr.has_value());
    }
    CHECK(parse_eval_mode("exact") == EvalMode::Exact);
    CHECK(to_string(EvalMode::Simulate) == "simulate");
    CHECK_THROWS(parse_eval_mode("guess"));
}

TEST_CASE("optimizer edge cases and re-derivable optimum") {
    ScenarioConfig base;
    OptimizeOptions opt;
    opt.mcmc_samples = 2000;
    opt.threshold_lo = 0.6;
    opt.threshold_hi = 0.7;
    opt.threshold_step = 0.05;

    const auto free = optimize(base, 20, 0.0, opt);
    REQUIRE(free.feasible);
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& p : free.grid) lowest = std::min(lowest, p.energy);
    CHECK(free.best.energy == lowest);

    CHECK_FALSE(optimize(base, 20, 1.0 + 1e-9, opt).feasible);
    CHECK_THROWS(optimize(base, 20, -0.1, opt));

    opt.exhaustive = true;
    const auto r = optimize(base, 20, 0.75, opt);
    opt.exhaustive = false;
    const auto lazy = optimize(base, 20, 0.75, opt);
    REQUIRE(r.feasible);
    CHECK(lazy.best.threshold == r.best.threshold);
    CHECK(lazy.best.rate == r.best.rate);
    CHECK(*r.best.sifi >= 0.75);
    for (const auto& p : r.grid) {
        if (p.feasible) CHECK(p.energy >= r.best.energy);
    }
    ScenarioConfig at = base;
    at.images_per_device = 20;
    at.relevance_threshold = r.best.threshold;
    at.compression_rate = r.best.rate;
    CHECK(expected_total_energy(at) == r.best.energy);
    CHECK(expected_sifi_mcmc(at, opt.mcmc_samples, opt.seed).estimate == *r.best.sifi);
    CHECK(at.slots() == r.best.slots);
}

TEST_CASE("baseline energies") {
    ScenarioConfig cfg;
    cfg.images_per_device = 1;
    CHECK(baseline_energy(cfg) == doctest::Approx(0.108 * 4.86 * 307200 / 1e5).epsilon(1e-14));
    CHECK(baseline_energy(cfg) == doctest::Approx(1.612).epsilon(1e-3));
    cfg.images_per_device = 0;
    CHECK(baseline_energy(cfg) == 0.0);
    cfg.images_per_device = 30;
    const double e30 = baseline_energy(cfg);
    cfg.images_per_device = 60;
    CHECK(baseline_energy(cfg) == doctest::Approx(2 * e30).epsilon(1e-14));
    cfg.baselines.baseline_query_reception = true;
    CHECK(baseline_energy(cfg) == doctest::Approx(2 * e30 + 0.0669 * 4096 / 1e5).epsilon(1e-14));
    CHECK(energy_saving_ratio(3.0, 3.0) == 1.0);
    CHECK_THROWS(energy_saving_ratio(1.0, 0.0));
    CHECK(to_string(SchemeKind::TinyAirNet) == "tinyairnet");
}

TEST_CASE("TinyAirNet energy") {
    ScenarioConfig cfg;
    const double png = 0.108 * 4.86 * 307200 / 1e5;
    const double fixed = 100 * 0.000700617242582324 + 236.8e-12 * 0.976e6 * 2 + 5.226292224;
    CHECK(tinyairnet_energy(cfg) == doctest::Approx(fixed + 100 * 0.4000231366845216 * png).epsilon(1e-9));
    CHECK(tinyairnet_energy(cfg) == doctest::Approx(fixed + 40 * 1.612).epsilon(1e-3));

    cfg.baselines.tinyairnet_threshold = 1.0;
    cfg.model_noise = 1e-9;
    cfg.truth = TruthModel(std::make_shared<PiecewiseConstantTruth>(std::vector<double>{1.0, 0.0}));
    CHECK(tinyairnet_energy(cfg) == doctest::Approx(fixed).epsilon(1e-12));

    ScenarioConfig all;
    all.baselines.tinyairnet_threshold = 0.0;
    all.model_noise = 1e-9;
    all.truth = TruthModel(std::make_shared<PiecewiseConstantTruth>(std::vector<double>{0.0, 1.0}));
    CHECK(tinyairnet_energy(all) == doctest::Approx(fixed + baseline_energy(all)).epsilon(1e-9));

    ScenarioConfig bare;
    bare.baselines.tinyairnet_inference = false;
    bare.baselines.tinyairnet_model_load = false;
    bare.baselines.tinyairnet_model_reception = false;
    CHECK(tinyairnet_energy(bare) == doctest::Approx(100 * 0.4000231366845216 * png).epsilon(1e-9));
}

TEST_CASE("scheme ordering at large N and affine energies") {
    for (int n : {30, 60, 100}) {
        ScenarioConfig cfg;
        cfg.images_per_device = n;
        cfg.compression_rate = 1.2;
        cfg.relevance_threshold = 0.7;
        CHECK(scheme_energy(SchemeKind::EcoPull, cfg) < scheme_energy(SchemeKind::TinyAirNet, cfg));
        CHECK(scheme_energy(SchemeKind::TinyAirNet, cfg) < scheme_energy(SchemeKind::Baseline, cfg));
    }
    auto at = [](int n, SchemeKind k) {
        ScenarioConfig c;
        c.images_per_device = n;
        return scheme_energy(k, c);
    };
    for (auto k : {SchemeKind::EcoPull, SchemeKind::TinyAirNet, SchemeKind::Baseline}) {
        CHECK(at(30, k) - at(20, k) == doctest::Approx(at(20, k) - at(10, k)).epsilon(1e-9));
    }
}

TEST_CASE("svg chart is well formed") {
    std::ostringstream os;
    write_svg_chart(os, {"t <1>", "x", "y"}, {{"a&b", {1, 2, 3}, {0.1, 0.5, 0.2}}, {"flat", {1}, {1}}});
    const auto s = os.str();
    CHECK(s.rfind("<svg", 0) == 0);
    CHECK(s.find("</svg>") != std::string::npos);
    CHECK(s.find("t &lt;1&gt;") != std::string::npos);
    CHECK(s.find("a&amp;b") != std::string::npos);
    CHECK(s.find("<polyline") != std::string::npos);
}
