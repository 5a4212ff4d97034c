#ifndef QLINK_PROTOCOLS_HPP
#define QLINK_PROTOCOLS_HPP

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <thread>
#include <vector>

#include "qlink/channels.hpp"
#include "qlink/herald.hpp"
#include "qlink/qstate.hpp"
#include "qlink/sampling.hpp"

namespace qlink {

enum class Protocol : std::uint8_t { OneClick, TwoClick, EplDistill, ChiDistill };

inline const char* protocol_name(Protocol p) {
    switch (p) {
    case Protocol::OneClick: return "one_click";
    case Protocol::TwoClick: return "two_click";
    case Protocol::EplDistill: return "epl";
    case Protocol::ChiDistill: return "chi";
    }
    return "unknown";
}

inline std::optional<Protocol> protocol_from_name(std::string_view name) {
    if (name == "one_click") return Protocol::OneClick;
    if (name == "two_click") return Protocol::TwoClick;
    if (name == "epl") return Protocol::EplDistill;
    if (name == "chi") return Protocol::ChiDistill;
    return std::nullopt;
}

struct ProtocolConfig {
    Protocol protocol = Protocol::OneClick;
    AttemptParams attempt;
    double attempt_rate_hz = 1e5;
    MemoryParams memory;
    GateNoiseParams gate;
    std::uint64_t max_wait_attempts = 0; // 0 selects the lifetime-derived default
    std::uint64_t max_trial_attempts = 1000000;
    std::uint64_t trials = 10000;
    std::uint64_t master_seed = 1;

    void validate() const {
        attempt.validate();
        memory.validate();
        gate.validate();
        if (!(attempt_rate_hz > 0.0) || std::isinf(attempt_rate_hz))
            throw std::invalid_argument("attempt_rate_hz must be finite and positive");
        if (trials == 0)
            throw std::invalid_argument("trials must be at least 1");
        if (max_trial_attempts == 0)
            throw std::invalid_argument("max_trial_attempts must be at least 1");
    }

    // How long a stored pair waits for its partner before being discarded,
    // in attempts. Defaults to ten memory lifetimes, clamped to [1, 1e6].
    std::uint64_t effective_max_wait() const {
        constexpr std::uint64_t kCap = 1000000;
        std::uint64_t wait;
        if (max_wait_attempts > 0) {
            wait = max_wait_attempts;
        } else if (std::isinf(memory.t1_s)) {
            wait = kCap;
        } else {
            const double attempts_per_lifetime = attempt_rate_hz * memory.t1_s;
            wait = static_cast<std::uint64_t>(std::ceil(attempts_per_lifetime)) * 10ull;
        }
        if (wait < 1)
            wait = 1;
        if (wait > kCap)
            wait = kCap;
        return wait;
    }
};

struct TrialRecord {
    bool accepted = false;
    double fidelity = 0.0; // meaningful only when accepted
    std::uint64_t attempts = 0;
    std::array<std::uint64_t, kHeraldKindCount> outcome_counts{};
};

struct ChannelMetrics {
    std::uint64_t trials = 0;
    std::uint64_t accepted = 0;
    std::uint64_t heralds = 0;
    std::uint64_t attempts_total = 0;
    bool fidelity_defined = false;
    double fidelity_mean = std::numeric_limits<double>::quiet_NaN();
    double fidelity_sem = std::numeric_limits<double>::quiet_NaN();
    double ebit_rate_hz = 0.0;
    double success_fraction = 0.0;
    std::array<std::uint64_t, kHeraldKindCount> outcome_counts{};
};

struct FidelityStats {
    double mean;
    double sem;
};

// Sample mean and its standard error (n-1 variance). n = 1 yields sem 0.
inline FidelityStats fidelity_stats(double sum, double sum_sq, std::uint64_t n) {
    FidelityStats out{0.0, 0.0};
    if (n == 0)
        return out;
    const double nd = static_cast<double>(n);
    out.mean = sum / nd;
    if (n > 1) {
        double var = (sum_sq - nd * out.mean * out.mean) / (nd - 1.0);
        if (var < 0.0)
            var = 0.0;
        out.sem = std::sqrt(var / nd);
    }
    return out;
}

// One distillation parity check: the fresh pair (register 2,3) controls
// CNOTs onto the stored pair (register 0,1), then the stored pair is read
// out. A double click keeps the fresh pair.
struct DistillStep {
    double accept_prob = 0.0;
    std::optional<DensityMatrix> post; // surviving two-qubit pair
};

inline DistillStep epl_circuit(const DensityMatrix& stored_pair,
                               const DensityMatrix& fresh_pair,
                               const GateNoiseParams& gate) {
    DensityMatrix joint = tensor(stored_pair, fresh_pair);
    joint = apply_noisy_cnot(joint, 2, 0, gate);
    joint = apply_noisy_cnot(joint, 3, 1, gate);
    auto meas = measure_and_project(joint, {0, 1}, "11");
    return DistillStep{meas.probability, std::move(meas.post)};
}

// Single-operator form of the ideal parity check, restricted to inputs in
// the one-excitation-per-pair subspace. Input ordering is kept (x) measured.
struct EplMapResult {
    double accept_prob = 0.0;
    std::optional<DensityMatrix> post;
};

inline EplMapResult epl_kraus_map(const DensityMatrix& rho_keep,
                                  const DensityMatrix& rho_measured) {
    Matrix k = Matrix::Zero(4, 16);
    k(1, 1 * 4 + 2) = 1.0; // keep |01>, measured pair read as |10>
    k(2, 2 * 4 + 1) = 1.0; // keep |10>, measured pair read as |01>
    KrausChannel ch{{k}, false};
    auto res = apply_channel(tensor(rho_keep, rho_measured), ch);
    return EplMapResult{res.weight, std::move(res.state)};
}

namespace detail {

// Herald kinds index 1..4; remap to 0..3 for the lookup tables.
inline int kind_slot(HeraldKind k) { return static_cast<int>(k) - 1; }

// With an ideal memory the circuit inputs only ever take 4x4 herald-kind
// combinations at a fixed gate setting, so every branch can be solved once
// up front and trials reduce to table lookups plus accept draws.
struct DistillTables {
    bool enabled = false;
    std::array<std::array<DistillStep, 4>, 4> stage1;          // [stored][fresh]
    std::array<std::array<std::array<DistillStep, 4>, 4>, 4> stage2; // [k2][k1][k3]
};

inline DistillTables build_distill_tables(const ProtocolConfig& cfg) {
    DistillTables tables;
    if (!(std::isinf(cfg.memory.t1_s) && std::isinf(cfg.memory.t2phi_s)))
        return tables;
    tables.enabled = true;
    const HeraldKind kinds[4] = {HeraldKind::Bell, HeraldKind::Dephased,
                                 HeraldKind::GroundGround, HeraldKind::DoubleExcited};
    for (HeraldKind k1 : kinds)
        for (HeraldKind k3 : kinds)
            tables.stage1[kind_slot(k1)][kind_slot(k3)] =
                epl_circuit(herald_state(k1), herald_state(k3), cfg.gate);
    if (cfg.protocol == Protocol::ChiDistill) {
        for (HeraldKind k1 : kinds)
            for (HeraldKind k3 : kinds) {
                const auto& first = tables.stage1[kind_slot(k1)][kind_slot(k3)];
                if (!first.post)
                    continue;
                for (HeraldKind k2 : kinds)
                    tables.stage2[kind_slot(k2)][kind_slot(k1)][kind_slot(k3)] =
                        epl_circuit(herald_state(k2), *first.post, cfg.gate);
            }
    }
    return tables;
}

inline void add_counts(TrialRecord& rec, const HeraldWait& wait) {
    rec.attempts += wait.attempts;
    for (int k = 0; k < kHeraldKindCount; ++k)
        rec.outcome_counts[k] += wait.counts[k];
}

} // namespace detail

// Bare heralding protocols: the pair is delivered the moment it is heralded.
inline TrialRecord run_direct_trial(const ProtocolConfig& cfg, std::uint64_t trial_index,
                                    HeraldMode mode) {
    SplitMix64 rng = derive_stream(cfg.master_seed, trial_index, 0);
    TrialRecord rec;
    auto wait = herald_until_success(rng, cfg.attempt, mode, cfg.max_trial_attempts);
    detail::add_counts(rec, wait);
    if (wait.heralded) {
        rec.accepted = true;
        rec.fidelity = fidelity_to_bell(herald_state(wait.kind));
    }
    return rec;
}

// Two-to-one distillation: herald a pair, hold it while heralding a second,
// run the parity check, keep the fresh pair on a double click. Every
// heralding attempt is charged against the trial budget, including rounds
// that end discarded.
inline TrialRecord run_epl_trial(const ProtocolConfig& cfg, std::uint64_t trial_index,
                                 const detail::DistillTables* tables) {
    SplitMix64 rng = derive_stream(cfg.master_seed, trial_index, 0);
    TrialRecord rec;
    const std::uint64_t budget = cfg.max_trial_attempts;
    const std::uint64_t wait_cap = cfg.effective_max_wait();

    while (rec.attempts < budget) {
        auto first = herald_until_success(rng, cfg.attempt, HeraldMode::OneClick,
                                          budget - rec.attempts);
        detail::add_counts(rec, first);
        if (!first.heralded)
            break;

        const std::uint64_t remaining = budget - rec.attempts;
        if (remaining == 0)
            break;
        const std::uint64_t partner_budget = std::min(wait_cap, remaining);
        auto second = herald_until_success(rng, cfg.attempt, HeraldMode::OneClick,
                                           partner_budget);
        detail::add_counts(rec, second);
        if (!second.heralded) {
            if (partner_budget == remaining)
                break;    // trial budget exhausted
            continue;     // stored pair aged out; discard and start over
        }

        DistillStep step;
        if (tables && tables->enabled) {
            step = tables->stage1[detail::kind_slot(first.kind)]
                                 [detail::kind_slot(second.kind)];
        } else {
            const double hold = static_cast<double>(second.attempts) / cfg.attempt_rate_hz;
            DensityMatrix stored =
                decay_memory_pair(herald_state(first.kind), cfg.memory, hold);
            step = epl_circuit(stored, herald_state(second.kind), cfg.gate);
        }
        if (sample_bernoulli(rng, step.accept_prob)) {
            rec.accepted = true;
            rec.fidelity = fidelity_to_bell(*step.post);
            break;
        }
    }
    return rec;
}

// Three-to-one distillation: two stored pairs are checked in sequence
// against one fresh pair. Both readouts must double-click.
inline TrialRecord run_chi_trial(const ProtocolConfig& cfg, std::uint64_t trial_index,
                                 const detail::DistillTables* tables) {
    SplitMix64 rng = derive_stream(cfg.master_seed, trial_index, 0);
    TrialRecord rec;
    const std::uint64_t budget = cfg.max_trial_attempts;
    const std::uint64_t wait_cap = cfg.effective_max_wait();

    while (rec.attempts < budget) {
        auto first = herald_until_success(rng, cfg.attempt, HeraldMode::OneClick,
                                          budget - rec.attempts);
        detail::add_counts(rec, first);
        if (!first.heralded)
            break;

        std::uint64_t remaining = budget - rec.attempts;
        if (remaining == 0)
            break;
        const std::uint64_t second_budget = std::min(wait_cap, remaining);
        auto second = herald_until_success(rng, cfg.attempt, HeraldMode::OneClick,
                                           second_budget);
        detail::add_counts(rec, second);
        if (!second.heralded) {
            if (second_budget == remaining)
                break;
            continue;
        }

        remaining = budget - rec.attempts;
        if (remaining == 0)
            break;
        const std::uint64_t third_budget = std::min(wait_cap, remaining);
        auto third = herald_until_success(rng, cfg.attempt, HeraldMode::OneClick,
                                          third_budget);
        detail::add_counts(rec, third);
        if (!third.heralded) {
            if (third_budget == remaining)
                break;
            continue;
        }

        DistillStep step1, step2;
        bool have_step2 = false;
        if (tables && tables->enabled) {
            step1 = tables->stage1[detail::kind_slot(first.kind)]
                                  [detail::kind_slot(third.kind)];
            if (step1.post) {
                step2 = tables->stage2[detail::kind_slot(second.kind)]
                                      [detail::kind_slot(first.kind)]
                                      [detail::kind_slot(third.kind)];
                have_step2 = true;
            }
        } else {
            const double hold1 =
                static_cast<double>(second.attempts + third.attempts) / cfg.attempt_rate_hz;
            const double hold2 = static_cast<double>(third.attempts) / cfg.attempt_rate_hz;
            DensityMatrix stored1 =
                decay_memory_pair(herald_state(first.kind), cfg.memory, hold1);
            step1 = epl_circuit(stored1, herald_state(third.kind), cfg.gate);
            if (step1.post) {
                DensityMatrix stored2 =
                    decay_memory_pair(herald_state(second.kind), cfg.memory, hold2);
                step2 = epl_circuit(stored2, *step1.post, cfg.gate);
                have_step2 = true;
            }
        }

        if (!sample_bernoulli(rng, step1.accept_prob))
            continue;
        if (!have_step2 || !sample_bernoulli(rng, step2.accept_prob))
            continue;
        rec.accepted = true;
        rec.fidelity = fidelity_to_bell(*step2.post);
        break;
    }
    return rec;
}

inline TrialRecord run_trial(const ProtocolConfig& cfg, std::uint64_t trial_index,
                             const detail::DistillTables* tables = nullptr) {
    switch (cfg.protocol) {
    case Protocol::OneClick: return run_direct_trial(cfg, trial_index, HeraldMode::OneClick);
    case Protocol::TwoClick: return run_direct_trial(cfg, trial_index, HeraldMode::TwoClick);
    case Protocol::EplDistill: return run_epl_trial(cfg, trial_index, tables);
    case Protocol::ChiDistill: return run_chi_trial(cfg, trial_index, tables);
    }
    throw std::invalid_argument("unknown protocol");
}

namespace detail {

struct ChunkStats {
    std::uint64_t accepted = 0;
    std::uint64_t attempts = 0;
    std::array<std::uint64_t, kHeraldKindCount> outcome_counts{};
    double fid_sum = 0.0;
    double fid_sum_sq = 0.0;
};

inline void accumulate(ChunkStats& stats, const TrialRecord& rec) {
    stats.attempts += rec.attempts;
    for (int k = 0; k < kHeraldKindCount; ++k)
        stats.outcome_counts[k] += rec.outcome_counts[k];
    if (rec.accepted) {
        ++stats.accepted;
        stats.fid_sum += rec.fidelity;
        stats.fid_sum_sq += rec.fidelity * rec.fidelity;
    }
}

} // namespace detail

// Run all trials and aggregate. Trials are partitioned into fixed-size
// chunks that worker threads claim dynamically; chunk partials are reduced
// in chunk order with compensated summation, so the result is bitwise
// independent of the thread count.
inline ChannelMetrics run_trials(const ProtocolConfig& cfg, unsigned n_threads = 1) {
    cfg.validate();
    const detail::DistillTables tables = detail::build_distill_tables(cfg);
    const detail::DistillTables* table_ptr =
        (cfg.protocol == Protocol::EplDistill || cfg.protocol == Protocol::ChiDistill)
            ? &tables
            : nullptr;

    constexpr std::uint64_t kChunk = 1024;
    const std::uint64_t n_chunks = (cfg.trials + kChunk - 1) / kChunk;
    std::vector<detail::ChunkStats> chunk_stats(n_chunks);

    std::atomic<std::uint64_t> next_chunk{0};
    auto worker = [&]() {
        for (;;) {
            const std::uint64_t c = next_chunk.fetch_add(1);
            if (c >= n_chunks)
                return;
            detail::ChunkStats stats;
            const std::uint64_t begin = c * kChunk;
            const std::uint64_t end = std::min(begin + kChunk, cfg.trials);
            for (std::uint64_t t = begin; t < end; ++t)
                detail::accumulate(stats, run_trial(cfg, t, table_ptr));
            chunk_stats[c] = stats;
        }
    };

    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    ChannelMetrics metrics;
    metrics.trials = cfg.trials;
    double fid_sum = 0.0, fid_sum_sq = 0.0;
    double comp_sum = 0.0, comp_sum_sq = 0.0; // Kahan compensation terms
    for (const auto& stats : chunk_stats) {
        metrics.accepted += stats.accepted;
        metrics.attempts_total += stats.attempts;
        for (int k = 0; k < kHeraldKindCount; ++k)
            metrics.outcome_counts[k] += stats.outcome_counts[k];
        double y = stats.fid_sum - comp_sum;
        double t = fid_sum + y;
        comp_sum = (t - fid_sum) - y;
        fid_sum = t;
        y = stats.fid_sum_sq - comp_sum_sq;
        t = fid_sum_sq + y;
        comp_sum_sq = (t - fid_sum_sq) - y;
        fid_sum_sq = t;
    }
    for (int k = 1; k < kHeraldKindCount; ++k)
        metrics.heralds += metrics.outcome_counts[k];
    metrics.success_fraction =
        static_cast<double>(metrics.accepted) / static_cast<double>(metrics.trials);
    if (metrics.attempts_total > 0)
        metrics.ebit_rate_hz = cfg.attempt_rate_hz * static_cast<double>(metrics.accepted) /
                               static_cast<double>(metrics.attempts_total);
    if (metrics.accepted > 0) {
        metrics.fidelity_defined = true;
        const FidelityStats stats = fidelity_stats(fid_sum, fid_sum_sq, metrics.accepted);
        metrics.fidelity_mean = stats.mean;
        metrics.fidelity_sem = stats.sem;
    }
    return metrics;
}

} // namespace qlink

#endif
