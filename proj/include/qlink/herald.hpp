#ifndef QLINK_HERALD_HPP
#define QLINK_HERALD_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "qlink/qstate.hpp"
#include "qlink/sampling.hpp"

namespace qlink {

// Per-attempt device parameters for one entanglement generation try.
struct AttemptParams {
    double p_e = 0.5;   // emitter excitation probability
    double eta = 1.0;   // end-to-end photon transmission and detection efficiency
    double n_add = 0.0; // mean added noise photons per channel per attempt

    void validate() const {
        if (!(p_e >= 0.0 && p_e <= 1.0))
            throw std::invalid_argument("p_e must lie in [0,1]");
        if (!(eta >= 0.0 && eta <= 1.0))
            throw std::invalid_argument("eta must lie in [0,1]");
        if (!(n_add >= 0.0) || std::isinf(n_add))
            throw std::invalid_argument("n_add must be finite and nonnegative");
    }
};

enum class HeraldKind : std::uint8_t {
    NoClick = 0,
    Bell = 1,
    Dephased = 2,
    GroundGround = 3,
    DoubleExcited = 4,
};

inline constexpr int kHeraldKindCount = 5;

inline const char* herald_kind_name(HeraldKind k) {
    switch (k) {
    case HeraldKind::NoClick: return "no_click";
    case HeraldKind::Bell: return "bell";
    case HeraldKind::Dephased: return "dephased";
    case HeraldKind::GroundGround: return "ground_ground";
    case HeraldKind::DoubleExcited: return "double_excited";
    }
    return "unknown";
}

// Memory-pair state announced by a herald of the given kind. The detector
// cannot tell the two Bell signs apart, so the odd-parity herald is folded
// onto the +1 branch here once and for all.
inline DensityMatrix herald_state(HeraldKind kind) {
    switch (kind) {
    case HeraldKind::Bell: return states::bell_psi_plus();
    case HeraldKind::Dephased: return states::dephased_mix();
    case HeraldKind::GroundGround: return states::ground_ground();
    case HeraldKind::DoubleExcited: return states::double_excited();
    case HeraldKind::NoClick: break;
    }
    throw std::invalid_argument("no state is heralded without a click");
}

// Classify one single-click attempt from its microevents: x1/x2 emitter
// excitations, s1/s2 detected signal photons, m detected noise photons.
inline HeraldKind classify_one_click(bool x1, bool x2, bool s1, bool s2, std::uint64_t m) {
    const int signal = (s1 ? 1 : 0) + (s2 ? 1 : 0);
    const int excited = (x1 ? 1 : 0) + (x2 ? 1 : 0);
    if (signal == 0 && m == 0)
        return HeraldKind::NoClick;
    if (excited == 2)
        return HeraldKind::DoubleExcited;
    if (excited == 0)
        return HeraldKind::GroundGround;
    return m >= 1 ? HeraldKind::Dephased : HeraldKind::Bell;
}

// One single-click attempt. Draw order is fixed and documented so a given
// stream always replays the same microevents: x1, x2, t1, t2, n1, n2, then
// n1+n2 thinning draws.
inline HeraldKind attempt_one_click(SplitMix64& rng, const AttemptParams& params) {
    const bool x1 = sample_bernoulli(rng, params.p_e);
    const bool x2 = sample_bernoulli(rng, params.p_e);
    const bool t1 = sample_bernoulli(rng, params.eta);
    const bool t2 = sample_bernoulli(rng, params.eta);
    const std::uint64_t n1 = sample_poisson(rng, params.n_add);
    const std::uint64_t n2 = sample_poisson(rng, params.n_add);
    const std::uint64_t m = binomial_thin(rng, n1 + n2, params.eta);
    return classify_one_click(x1, x2, x1 && t1, x2 && t2, m);
}

// One two-click sequence: attempt, pi-pulse on both emitters, attempt again.
// Heralds only when both rounds click. Round 2 sampling is skipped when round
// 1 already failed; the skipped draws are never consumed anywhere else, so
// the outcome law is unchanged.
inline HeraldKind attempt_two_click(SplitMix64& rng, const AttemptParams& params) {
    const bool x1 = sample_bernoulli(rng, params.p_e);
    const bool x2 = sample_bernoulli(rng, params.p_e);

    const bool t1a = sample_bernoulli(rng, params.eta);
    const bool t2a = sample_bernoulli(rng, params.eta);
    const std::uint64_t n1a = sample_poisson(rng, params.n_add);
    const std::uint64_t n2a = sample_poisson(rng, params.n_add);
    const std::uint64_t m1 = binomial_thin(rng, n1a + n2a, params.eta);
    const int signal1 = ((x1 && t1a) ? 1 : 0) + ((x2 && t2a) ? 1 : 0);
    if (signal1 + m1 == 0)
        return HeraldKind::NoClick;

    const bool y1 = !x1, y2 = !x2;
    const bool t1b = sample_bernoulli(rng, params.eta);
    const bool t2b = sample_bernoulli(rng, params.eta);
    const std::uint64_t n1b = sample_poisson(rng, params.n_add);
    const std::uint64_t n2b = sample_poisson(rng, params.n_add);
    const std::uint64_t m2 = binomial_thin(rng, n1b + n2b, params.eta);
    const int signal2 = ((y1 && t1b) ? 1 : 0) + ((y2 && t2b) ? 1 : 0);
    if (signal2 + m2 == 0)
        return HeraldKind::NoClick;

    const int excited = (x1 ? 1 : 0) + (x2 ? 1 : 0);
    if (excited == 1)
        return (m1 == 0 && m2 == 0) ? HeraldKind::Bell : HeraldKind::Dephased;
    // The pi-pulse swaps the parity of the stored pair: a doubly excited start
    // reads out as ground-ground and vice versa.
    return excited == 2 ? HeraldKind::GroundGround : HeraldKind::DoubleExcited;
}

enum class HeraldMode : std::uint8_t { OneClick, TwoClick };

inline std::uint64_t attempt_cost(HeraldMode mode) {
    return mode == HeraldMode::OneClick ? 1 : 2;
}

struct HeraldWait {
    HeraldKind kind = HeraldKind::NoClick;
    bool heralded = false;
    std::uint64_t attempts = 0; // attempt cost consumed, incl. failed tries
    std::array<std::uint64_t, kHeraldKindCount> counts{};
};

// Retry until a click or until the next try would exceed max_attempts.
inline HeraldWait herald_until_success(SplitMix64& rng, const AttemptParams& params,
                                       HeraldMode mode, std::uint64_t max_attempts) {
    params.validate();
    HeraldWait wait;
    const std::uint64_t cost = attempt_cost(mode);
    while (wait.attempts + cost <= max_attempts) {
        const HeraldKind kind = mode == HeraldMode::OneClick
                                    ? attempt_one_click(rng, params)
                                    : attempt_two_click(rng, params);
        wait.attempts += cost;
        ++wait.counts[static_cast<int>(kind)];
        if (kind != HeraldKind::NoClick) {
            wait.kind = kind;
            wait.heralded = true;
            break;
        }
    }
    return wait;
}

} // namespace qlink

#endif
