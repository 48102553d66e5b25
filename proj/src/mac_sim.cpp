#include "ecopull/mac_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ecopull {

double RoundOutcome::mean_device_energy() const {
    if (per_device_energy.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& e : per_device_energy) sum += e.total;
    return sum / static_cast<double>(per_device_energy.size());
}

std::vector<DeviceState> draw_similarities(const ScenarioConfig& cfg, std::mt19937_64& rng) {
    const double sigma = cfg.sigma_ml();
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<DeviceState> devices(static_cast<std::size_t>(cfg.devices));
    for (int i = 0; i < cfg.devices; ++i) {
        auto& dev = devices[i];
        dev.id = i;
        dev.records.resize(static_cast<std::size_t>(cfg.images_per_device));
        for (int n = 0; n < cfg.images_per_device; ++n) {
            auto& rec = dev.records[n];
            rec.true_similarity = cfg.truth->sample(rng);
            const double w = noise(rng);
            rec.observed_similarity = rec.true_similarity + (sigma > 0.0 ? sigma * w : 0.0);
            rec.relevant = rec.observed_similarity >= cfg.relevance_threshold;
            rec.actual_relevant = rec.true_similarity >= cfg.truth_threshold;
            if (rec.relevant) dev.queue.push_back(n);
        }
    }
    return devices;
}

RoundOutcome run_round(const ScenarioConfig& cfg, std::mt19937_64& rng, RoundOptions options) {
    const int slots = cfg.slots();
    if (slots < 1) throw std::invalid_argument("run_round: L must be >= 1");

    auto devices = draw_similarities(cfg, rng);
    RoundOutcome out;
    out.queue_lengths.reserve(devices.size());
    for (const auto& d : devices) {
        out.queue_lengths.push_back(d.relevant_count());
        out.relevant_count += d.relevant_count();
    }

    std::vector<int> attempted(devices.size(), 0);
    std::uniform_int_distribution<int> pick_slot(0, slots - 1);
    std::vector<int> tx_device;
    std::vector<int> tx_image;
    std::vector<int> tx_slot;
    std::vector<int> sorted_slots;

    auto queued = [&] {
        return std::any_of(devices.begin(), devices.end(),
                           [](const DeviceState& d) { return !d.queue.empty(); });
    };

    while (queued() && (cfg.frame_horizon == 0 || out.frames_used < cfg.frame_horizon)) {
        tx_device.clear();
        tx_image.clear();
        tx_slot.clear();
        for (auto& dev : devices) {
            if (dev.queue.empty()) continue;
            // Uniformly chosen image leaves the queue whatever the outcome.
            std::uniform_int_distribution<std::size_t> pick(0, dev.queue.size() - 1);
            const auto k = pick(rng);
            std::swap(dev.queue[k], dev.queue.back());
            tx_device.push_back(dev.id);
            tx_image.push_back(dev.queue.back());
            dev.queue.pop_back();
            tx_slot.push_back(pick_slot(rng));
            ++attempted[dev.id];
        }

        sorted_slots = tx_slot;
        std::sort(sorted_slots.begin(), sorted_slots.end());
        FrameRecord frame;
        for (std::size_t t = 0; t < tx_device.size(); ++t) {
            const auto [lo, hi] = std::equal_range(sorted_slots.begin(), sorted_slots.end(), tx_slot[t]);
            const bool alone = (hi - lo) == 1;
            if (alone) {
                devices[tx_device[t]].records[tx_image[t]].delivered = true;
                ++out.delivered_count;
            } else {
                ++out.collided_count;
            }
            if (options.record_frames) {
                frame.devices.push_back(tx_device[t]);
                frame.slots.push_back(tx_slot[t]);
                frame.success.push_back(alone);
            }
        }
        if (options.record_frames) out.frames.push_back(std::move(frame));
        ++out.frames_used;
    }

    std::vector<ImageRecord> all;
    all.reserve(static_cast<std::size_t>(cfg.devices) * cfg.images_per_device);
    out.per_device_energy.reserve(devices.size());
    for (const auto& dev : devices) {
        all.insert(all.end(), dev.records.begin(), dev.records.end());
        out.per_device_energy.push_back(EnergyBreakdown::of(
            computation_energy(cfg, out.queue_lengths[dev.id]),
            communication_energy(cfg, attempted[dev.id])));
    }
    for (const auto& rec : all) out.actual_relevant_count += rec.actual_relevant ? 1 : 0;
    out.sifi = realized_sifi(all, cfg.penalty, cfg.compression_rate);
    return out;
}

RoundOutcome run_round(const ScenarioConfig& cfg, std::uint64_t seed, RoundOptions options) {
    std::mt19937_64 rng(seed);
    return run_round(cfg, rng, options);
}

std::uint64_t round_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

SimulationSummary simulate(const ScenarioConfig& cfg, std::int64_t rounds, std::uint64_t seed,
                           const RoundCallback& on_round) {
    if (rounds < 1) throw std::invalid_argument("simulate: rounds must be >= 1");
    double sifi_sum = 0.0, sifi_sq = 0.0, energy_sum = 0.0, energy_sq = 0.0;
    std::int64_t delivered = 0, attempted = 0;
    for (std::int64_t r = 0; r < rounds; ++r) {
        const auto outcome = run_round(cfg, round_seed(seed, static_cast<std::uint64_t>(r)));
        const double e = outcome.mean_device_energy();
        sifi_sum += outcome.sifi;
        sifi_sq += outcome.sifi * outcome.sifi;
        energy_sum += e;
        energy_sq += e * e;
        delivered += outcome.delivered_count;
        attempted += outcome.delivered_count + outcome.collided_count;
        if (on_round) on_round(r, outcome);
    }
    const double n = static_cast<double>(rounds);
    auto stderr_of = [n](double sum, double sq) {
        if (n < 2) return 0.0;
        const double mean = sum / n;
        const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
        return std::sqrt(var / n);
    };
    SimulationSummary s;
    s.rounds = rounds;
    s.mean_sifi = sifi_sum / n;
    s.sifi_stderr = stderr_of(sifi_sum, sifi_sq);
    s.mean_total_energy = energy_sum / n;
    s.energy_stderr = stderr_of(energy_sum, energy_sq);
    s.delivery_rate = attempted > 0 ? static_cast<double>(delivered) / static_cast<double>(attempted) : 1.0;
    return s;
}

}  // namespace ecopull
