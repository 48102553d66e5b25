#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ecopull/config.hpp"
#include "ecopull/quadrature.hpp"
#include "ecopull/report.hpp"
#include "stats_util.hpp"

using namespace ecopull;
using nlohmann::json;

TEST_CASE("empty document yields the reference scenario") {
    const auto cfg = load_config(json::object());
    CHECK(cfg.devices == 5);
    CHECK(cfg.images_per_device == 100);
    CHECK(cfg.truth_threshold == 0.9);
    CHECK(cfg.radio.tx_power == 0.108);
    CHECK(cfg.radio.rx_power == 0.0669);
    CHECK(cfg.radio.rate == 1e5);
    CHECK(cfg.sigma_ml() == 0.125);
    CHECK(cfg.query_length == 512);
    CHECK(cfg.slots() == 15);
    CHECK(load_config(nullptr) == cfg);
}

TEST_CASE("model noise follows the behaviour weight precision") {
    CHECK(load_config(json{{"behavior_weight_bits", 8}}).sigma_ml() == 0.125);
    CHECK(load_config(json{{"behavior_weight_bits", 4}}).sigma_ml() == 0.25);
    CHECK(load_config(json{{"behavior_weight_bits", 4}, {"model_noise", 0.01}}).sigma_ml() == 0.01);
}

TEST_CASE("out-of-range fields are rejected with the field name") {
    CHECK_THROWS_WITH_AS(load_config(json{{"relevance_threshold", 1.5}}),
                         doctest::Contains("relevance_threshold"), ConfigError);
    CHECK_THROWS_AS(load_config(json{{"devices", 0}}), ConfigError);
    CHECK_THROWS_AS(load_config(json{{"compression_rate", 0.0}}), ConfigError);
    CHECK_THROWS_AS(load_config(json{{"penalty", -0.1}}), ConfigError);
    CHECK_THROWS_AS(load_config(json{{"slots_per_frame", 4}, {"slot_coefficient", 5}}), ConfigError);
    CHECK_THROWS_AS(load_config(json{{"radio", {{"rate", 0}}}}), ConfigError);
    CHECK_THROWS_AS(load_config(json{{"baselines", {{"tinyairnet_threshold", 2.0}}}}), ConfigError);
}

TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(load_config(json{{"devicez", 3}}), ConfigError);
    CHECK_THROWS_AS(load_config(json{{"radio", {{"power", 1}}}}), ConfigError);
    CHECK_THROWS_AS(load_config(json{{"truth_distribution", {{"kind", "beta"}}}}), ConfigError);
}

TEST_CASE("explicit slot count replaces the coefficient") {
    const auto cfg = load_config(json{{"slots_per_frame", 7}});
    CHECK(cfg.slots() == 7);
    CHECK_FALSE(cfg.slot_coefficient.has_value());
}

TEST_CASE("packet bits") {
    ScenarioConfig cfg;
    cfg.compression_rate = 2.0;
    CHECK(packet_bits(cfg) == doctest::Approx(614400.0).epsilon(1e-15));
    cfg.compression_rate = 4.86;
    CHECK(packet_bits(cfg) == doctest::Approx(1492992.0).epsilon(1e-12));
    cfg.compression_rate = 0.0;
    CHECK_THROWS_AS(packet_bits(cfg), std::invalid_argument);
}

TEST_CASE("packet bits is linear in r") {
    ScenarioConfig a, b;
    for (double r : {0.3, 1.0, 1.7, 3.3}) {
        a.compression_rate = r;
        b.compression_rate = 2 * r;
        CHECK(packet_bits(b) == doctest::Approx(2 * packet_bits(a)).epsilon(1e-14));
    }
}

TEST_CASE("config round-trips through its document form") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        ScenarioConfig cfg;
        cfg.devices = 1 + static_cast<int>(u(rng) * 9);
        cfg.images_per_device = static_cast<int>(u(rng) * 200);
        cfg.relevance_threshold = u(rng);
        cfg.truth_threshold = u(rng);
        cfg.compression_rate = 0.1 + 4 * u(rng);
        if (trial % 2) {
            cfg.slot_coefficient.reset();
            cfg.slots_per_frame = 1 + trial;
        }
        cfg.penalty = u(rng);
        if (trial % 3 == 0) cfg.model_noise = 0.01 + u(rng);
        cfg.radio.slot_duration = trial % 4 == 0 ? std::optional<double>(0.5) : std::nullopt;
        cfg.behavior_hw.parallelism = trial % 5 == 0 ? std::optional<int>(32) : std::nullopt;
        cfg.load_term = trial % 2 ? LoadTerm::Shared : LoadTerm::PerModel;
        cfg.analysis = trial % 3 ? AnalysisModel::FrameAverage : AnalysisModel::Conditional;
        cfg.mcmc.hastings = trial % 2 == 0;
        cfg.baselines.tinyairnet_model_load = trial % 2 == 1;
        if (trial % 4 == 1) cfg.truth = truth_from_json(json{{"kind", "piecewise"}, {"weights", {1, 2, 3, 0}}});
        validate(cfg);
        const auto back = load_config(to_json(cfg));
        CHECK(back == cfg);
        CHECK(to_json(back) == to_json(cfg));
    }
}

TEST_CASE("overrides address nested fields") {
    json doc = json::object();
    apply_override(doc, "radio.rate=2e5");
    apply_override(doc, "devices=3");
    apply_override(doc, "load_term=shared");
    const auto cfg = load_config(doc);
    CHECK(cfg.radio.rate == 2e5);
    CHECK(cfg.devices == 3);
    CHECK(cfg.load_term == LoadTerm::Shared);
    CHECK_THROWS(apply_override(doc, "novalue"));
}

TEST_CASE("penalty below the fidelity distance warns") {
    ScenarioConfig cfg;
    CHECK(config_warnings(cfg).empty());
    cfg.penalty = 0.001;
    cfg.compression_rate = 1.0;
    CHECK(config_warnings(cfg).size() == 1);
}

TEST_CASE("uniform truth") {
    UniformTruth t;
    for (double b : {0.0, 0.125, 0.5, 0.9, 1.0}) CHECK(t.cdf(b) == b);
    std::mt19937_64 rng(11);
    std::vector<double> counts(20, 0.0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) counts[std::min(19, static_cast<int>(t.sample(rng) * 20))] += 1;
    std::vector<double> expected(20, n / 20.0);
    CHECK(chi_square(counts, expected) < chi_square_critical(19, 0.01));
}

TEST_CASE("piecewise truth samples its histogram") {
    PiecewiseConstantTruth t({1, 3, 0, 4});
    CHECK(t.cdf(0.25) == doctest::Approx(0.125));
    CHECK(t.cdf(0.75) == doctest::Approx(0.5));
    CHECK(t.density(0.6) == 0.0);
    CHECK(t.density(0.1) == doctest::Approx(0.5));
    std::mt19937_64 rng(3);
    std::vector<double> counts(4, 0.0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) counts[std::min(3, static_cast<int>(t.sample(rng) * 4))] += 1;
    CHECK(counts[2] == 0.0);
    std::vector<double> obs{counts[0], counts[1], counts[3]};
    std::vector<double> expected{n / 8.0, 3 * n / 8.0, n / 2.0};
    CHECK(chi_square(obs, expected) < chi_square_critical(2, 0.01));
    CHECK_THROWS(PiecewiseConstantTruth({0, 0}));
    CHECK_THROWS(PiecewiseConstantTruth({1, -1}));
}

TEST_CASE("adaptive quadrature") {
    const auto r = integrate([](double x) { return std::exp(x); }, 0.0, 1.0);
    CHECK(r.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
    const std::vector<double> cut{0.3};
    const auto step = integrate([](double x) { return x < 0.3 ? 0.0 : 1.0; }, 0.0, 1.0, cut);
    CHECK(step.value == doctest::Approx(0.7).epsilon(1e-13));
    CHECK(q_function(0.0) == 0.5);
    CHECK(q_function(1.6448536269514722) == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
    for (int n : {1, 2, 5, 12, 40}) {
        const auto rule = gauss_legendre_unit(n);
        CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
        const int deg = 2 * n - 1;
        const double v = (rule.weights * rule.nodes.pow(deg)).sum();
        CHECK(v == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-12));
    }
}

TEST_CASE("csv output has a header and nine significant digits") {
    CsvTable t({"a", "b"});
    t.row({format_number(1.0 / 3.0), format_number(123456789012.0)});
    CHECK(t.str() == "a,b\n0.333333333,1.23456789e+11\n");
    CHECK_THROWS(t.row({"x"}));
    CHECK(format_number(std::optional<double>{}) == "");
}
