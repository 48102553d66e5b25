#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "ecopull/analytic.hpp"
#include "ecopull/device_energy.hpp"
#include "ecopull/mac_sim.hpp"
#include "ecopull/sifi.hpp"
#include "stats_util.hpp"

using namespace ecopull;

namespace {

ScenarioConfig small(int k, int n, int slots, double threshold, double rate) {
    ScenarioConfig cfg;
    cfg.devices = k;
    cfg.images_per_device = n;
    cfg.slot_coefficient.reset();
    cfg.slots_per_frame = slots;
    cfg.relevance_threshold = threshold;
    cfg.compression_rate = rate;
    validate(cfg);
    return cfg;
}

}  // namespace

TEST_CASE("realization bookkeeping") {
    const Realization psi({1, 2, 1});
    CHECK(psi.devices() == 4);
    CHECK(psi.total_relevant() == 4);
    CHECK(active_devices(psi, 1) == 3);
    CHECK(active_devices(psi, 2) == 1);
    CHECK(frames_needed(psi) == 2);
    CHECK(psi.device_counts() == std::vector<int>{0, 1, 1, 2});
    CHECK(Realization::from_device_counts(std::vector<int>{2, 0, 1, 1}, 2) == psi);
    CHECK_THROWS_AS(active_devices(psi, 3), std::out_of_range);
    CHECK_THROWS_AS(active_devices(psi, 0), std::out_of_range);

    const Realization idle({4, 0, 0});
    CHECK(frames_needed(idle) == 0);
    CHECK(active_devices(idle, 2) == 0);
    CHECK(success_probability(idle, 2) == 1.0);
    CHECK(frames_needed(Realization({0, 0, 3})) == 2);

    const auto fair = Realization::fair(5, 3);
    CHECK(fair.valid(5));
    CHECK(fair.counts()[0] == 2);
    CHECK(fair.counts()[3] == 1);
}

TEST_CASE("success probability") {
    CHECK(success_probability(Realization({0, 2}), 2) == doctest::Approx(0.5));
    CHECK(success_probability(Realization({1, 2, 1}), 2) == doctest::Approx((0.25 + 1.0) / 2));
    CHECK(success_probability(Realization({0, 3, 4}), 1000000000) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(expected_deliveries(Realization({1, 2, 1}), 2) == doctest::Approx(3 * 0.25 + 1.0));
    CHECK(expected_deliveries(Realization({1, 2, 1}), 2, 1) == doctest::Approx(3 * 0.25));
    for (int l : {2, 3, 10}) {
        double prev = 2.0;
        for (int w = 1; w < 20; ++w) {
            const Realization psi({0, w});
            const double p = success_probability(psi, l);
            CHECK(p <= prev);
            prev = p;
        }
    }
}

TEST_CASE("realization pmf") {
    CHECK(realization_pmf(Realization({3, 0, 0}), 2, 3, 0.0) == 1.0);
    CHECK(realization_pmf(Realization({2, 1, 0}), 2, 3, 0.0) == 0.0);
    CHECK(realization_pmf(Realization({1, 1}), 1, 2, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(realization_pmf(Realization({1, 1}), 1, 3, 0.5) == 0.0);
    double total = 0.0;
    int visited = 0;
    for_each_sorted_profile(3, 2, [&](std::span<const int> s) {
        total += realization_pmf(Realization::from_device_counts(s, 2), 2, 3, 0.37);
        ++visited;
    });
    CHECK(visited == composition_count(3, 2));
    CHECK(visited == 10);
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(composition_count(5, 100) == 96560646);
}

TEST_CASE("tail mass and collection probabilities") {
    const UniformTruth u;
    CHECK(p_delta(0.9, u) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(p_delta(1.0, u) == 0.0);
    CHECK(p_delta(0.0, u) == 1.0);

    auto cfg = small(2, 1, 1000000000, 0.6, 2.0);
    cfg.slots_per_frame = 1000000000;
    const Realization all_in({0, 2});
    CHECK(p_actual_collect(all_in, cfg) == doctest::Approx(0.9968310034054023).epsilon(1e-6));
    cfg.truth_threshold = 1.0;
    CHECK_THROWS_AS(p_actual_collect(all_in, cfg), std::domain_error);

    auto sharp = small(2, 1, 2, 0.6, 1.0);
    sharp.model_noise = 1e-9;
    CHECK(p_actual_collect(all_in, sharp) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(expected_z(all_in, sharp) == doctest::Approx(0.46375).epsilon(1e-9));
}

TEST_CASE("conditional SiFi matches exhaustive enumeration") {
    const SifiModel two(small(2, 2, 2, 0.6, 2.0));
    CHECK(two.conditional_sorted(std::vector<int>{1, 2}) == doctest::Approx(0.8054097913413191).epsilon(1e-9));
    CHECK(two.conditional(Realization({0, 1, 1})) == doctest::Approx(0.8054097913413191).epsilon(1e-9));
    const SifiModel three(small(3, 2, 2, 0.7, 1.5));
    CHECK(three.conditional_sorted(std::vector<int>{0, 1, 1}) ==
          doctest::Approx(0.7144235861416605).epsilon(1e-9));
}

TEST_CASE("exact expectation matches exhaustive enumeration") {
    CHECK(expected_sifi_exact(small(2, 2, 2, 0.6, 2.0)) == doctest::Approx(0.9090745520822104).epsilon(1e-9));
    CHECK(expected_sifi_exact(small(3, 2, 2, 0.5, 2.0)) == doctest::Approx(0.7629994064593676).epsilon(1e-9));
    CHECK_THROWS_AS(expected_sifi_exact(ScenarioConfig{}, 1000), BudgetExceeded);
}

TEST_CASE("single device reduces to the contention-free closed form") {
    for (double v : {0.5, 0.7}) {
        auto cfg = small(1, 6, 3, v, 1.5);
        const double pd = 0.1;
        const double kd = fidelity_distance(1.5);
        const double pa = relevance_mass(v, cfg.sigma_ml(), *cfg.truth, 0.9) / pd;
        const double ez = (1.0 - kd) * pa + (1.0 - pa) * (1.0 - cfg.penalty);
        const double po = 1.0 - std::pow(1.0 - pd, 6);
        CHECK(expected_sifi_exact(cfg) == doctest::Approx(po * ez + 1.0 - po).epsilon(1e-10));
        cfg.analysis = AnalysisModel::FrameAverage;
        CHECK(expected_sifi_exact(cfg) == doctest::Approx(po * ez + 1.0 - po).epsilon(1e-10));
    }
}

TEST_CASE("lossless certain delivery gives SiFi one") {
    auto cfg = small(3, 3, 1000000000, 0.5, 60.0);
    cfg.model_noise = 1e-9;
    CHECK(expected_sifi_exact(cfg) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("per-realization SiFi stays in [0, 1]") {
    for (auto mode : {AnalysisModel::Conditional, AnalysisModel::FrameAverage}) {
        auto cfg = small(4, 5, 3, 0.55, 1.2);
        cfg.analysis = mode;
        const SifiModel m(cfg);
        for_each_sorted_profile(4, 5, [&](std::span<const int> s) {
            const double v = m.evaluate_sorted(s);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        });
    }
}

TEST_CASE("MCMC agrees with exact enumeration") {
    auto cfg = small(5, 6, 4, 0.6, 2.0);
    const double exact = expected_sifi_exact(cfg);
    const auto r = expected_sifi_mcmc(cfg, 10000, 1);
    CHECK(std::abs(r.estimate - exact) < 0.01);
    CHECK(r.samples == 10000);
    CHECK(r.acceptance_rate > 0.0);
    CHECK(r.acceptance_rate <= 1.0);
}

TEST_CASE("MCMC pinned at the point mass") {
    auto cfg = small(3, 4, 2, 1.0, 2.0);
    cfg.model_noise = 1e-9;
    cfg.truth_threshold = 1.0;
    cfg.truth = TruthModel(std::make_shared<PiecewiseConstantTruth>(std::vector<double>{1.0, 0.0}));
    const auto r = expected_sifi_mcmc(cfg, 1, 9);
    CHECK(r.estimate == 1.0);
}

TEST_CASE("uncorrected acceptance ratio is biased by the proposal asymmetry") {
    auto cfg = small(2, 2, 2, 0.5, 2.0);
    const double exact = expected_sifi_exact(cfg);
    cfg.mcmc.hastings = false;
    CHECK(expected_sifi_mcmc(cfg, 200000, 3).estimate - exact > 0.01);
    cfg.mcmc.hastings = true;
    CHECK(std::abs(expected_sifi_mcmc(cfg, 200000, 3).estimate - exact) < 0.003);
}

TEST_CASE("MCMC trace and determinism") {
    auto cfg = small(4, 10, 5, 0.6, 1.5);
    McmcRunOptions opt;
    opt.keep_trace = true;
    const auto a = expected_sifi_mcmc(cfg, 500, 77, opt);
    const auto b = expected_sifi_mcmc(cfg, 500, 77, opt);
    CHECK(a.trace.size() == 500);
    CHECK(a.trace == b.trace);
    CHECK(a.estimate == b.estimate);
    double mean = 0.0;
    for (double u : a.trace) {
        CHECK(u >= 0.0);
        CHECK(u <= 1.0);
        mean += u;
    }
    CHECK(mean / 500 == doctest::Approx(a.estimate).epsilon(1e-12));
}

TEST_CASE("Hastings-corrected chain targets the realization pmf") {
    auto cfg = small(3, 2, 2, 0.6, 2.0);
    REQUIRE(cfg.mcmc.hastings);
    const int stride = 10;
    std::map<std::vector<int>, double> counts;
    std::int64_t step = 0;
    McmcRunOptions opt;
    opt.on_state = [&](const Realization& psi) {
        if (step++ % stride == 0) counts[std::vector<int>(psi.counts().begin(), psi.counts().end())] += 1;
    };
    const std::int64_t t = 1000000;
    expected_sifi_mcmc(cfg, t, 4, opt);
    const double p = p_th(cfg);
    std::vector<double> obs, exp;
    for_each_sorted_profile(3, 2, [&](std::span<const int> s) {
        const auto psi = Realization::from_device_counts(s, 2);
        const std::vector<int> key(psi.counts().begin(), psi.counts().end());
        obs.push_back(counts[key]);
        exp.push_back(realization_pmf(psi, 2, 3, p) * static_cast<double>(t / stride));
    });
    CHECK(chi_square(obs, exp) < chi_square_critical(static_cast<int>(obs.size()) - 1, 0.01));
}
