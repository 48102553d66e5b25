#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ecopull/config.hpp"
#include "ecopull/device_energy.hpp"
#include "ecopull/sifi.hpp"

namespace ecopull {

struct DeviceState {
    int id = 0;
    std::vector<ImageRecord> records;
    std::vector<int> queue;  // indices into records that passed the relevance test

    int relevant_count() const { return static_cast<int>(queue.size()); }
};

/// One frame of slotted ALOHA: the devices that transmitted, their slots and
/// whether each slot held a single transmission.
struct FrameRecord {
    std::vector<int> devices;
    std::vector<int> slots;
    std::vector<bool> success;
};

struct RoundOutcome {
    double sifi = 1.0;
    std::vector<EnergyBreakdown> per_device_energy;
    int frames_used = 0;
    int delivered_count = 0;
    int collided_count = 0;
    int relevant_count = 0;         // sum of S^i
    int actual_relevant_count = 0;  // |Omega|
    std::vector<int> queue_lengths; // S^i per device
    std::vector<FrameRecord> frames;  // filled only when requested

    double mean_device_energy() const;
};

struct RoundOptions {
    bool record_frames = false;
};

/// Samples true similarities from g_T, adds N(0, sigma^2) noise and queues
/// every image whose unclamped observed similarity reaches V_th.
std::vector<DeviceState> draw_similarities(const ScenarioConfig& cfg, std::mt19937_64& rng);

/// Plays one query: contention until every queue drains (or the fixed
/// frame horizon ends), then SiFi and per-device energy.
RoundOutcome run_round(const ScenarioConfig& cfg, std::mt19937_64& rng, RoundOptions options = {});
RoundOutcome run_round(const ScenarioConfig& cfg, std::uint64_t seed, RoundOptions options = {});

/// Seed of round `index` under `master` (splitmix64 of their combination).
std::uint64_t round_seed(std::uint64_t master, std::uint64_t index);

struct SimulationSummary {
    std::int64_t rounds = 0;
    double mean_sifi = 0.0;
    double sifi_stderr = 0.0;
    double mean_total_energy = 0.0;  // per device
    double energy_stderr = 0.0;
    double delivery_rate = 0.0;      // delivered / attempted, pooled
};

using RoundCallback = std::function<void(std::int64_t, const RoundOutcome&)>;

/// Averages `rounds` independent rounds seeded from `seed`. Deterministic for
/// a fixed seed; `on_round` sees every round in index order.
SimulationSummary simulate(const ScenarioConfig& cfg, std::int64_t rounds, std::uint64_t seed,
                           const RoundCallback& on_round = {});

}  // namespace ecopull
