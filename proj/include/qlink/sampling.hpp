#ifndef QLINK_SAMPLING_HPP
#define QLINK_SAMPLING_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qlink {

// Finalizer from the SplitMix64 output function. Bijective on uint64, so
// distinct inputs never collide after mixing.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        return mix64(z);
    }

    // Uniform on [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t state() const { return state_; }

  private:
    std::uint64_t state_;
};

// Per-trial, per-purpose stream derivation. trial_index is packed above the
// purpose tag so every (trial, purpose) pair maps to a distinct stream id;
// mixing the id against the master seed decorrelates neighboring streams.
inline SplitMix64 derive_stream(std::uint64_t master_seed, std::uint64_t trial_index,
                                std::uint8_t purpose_tag) {
    std::uint64_t stream_id = (trial_index << 8) | static_cast<std::uint64_t>(purpose_tag);
    return SplitMix64(mix64(master_seed ^ mix64(stream_id)));
}

inline bool sample_bernoulli(SplitMix64& rng, double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("bernoulli probability must lie in [0,1], got " +
                                    std::to_string(p));
    return rng.next_double() < p;
}

namespace detail {

// Multiplicative inversion (Knuth). Cost grows linearly with the mean, so it
// is only used below the PTRS cutoff.
inline std::uint64_t poisson_inversion(SplitMix64& rng, double mean) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = rng.next_double();
    while (prod > limit) {
        ++k;
        prod *= rng.next_double();
    }
    return k;
}

// Hormann's PTRS transformed-rejection sampler, valid for mean >= 10.
inline std::uint64_t poisson_ptrs(SplitMix64& rng, double mean) {
    const double log_mean = std::log(mean);
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        const double u = rng.next_double() - 0.5;
        const double v = rng.next_double();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r)
            return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us))
            continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * log_mean - mean - std::lgamma(k + 1.0))
            return static_cast<std::uint64_t>(k);
    }
}

} // namespace detail

inline std::uint64_t sample_poisson(SplitMix64& rng, double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw std::invalid_argument("poisson mean must be finite and nonnegative, got " +
                                    std::to_string(mean));
    if (mean == 0.0)
        return 0;
    if (mean < 10.0)
        return detail::poisson_inversion(rng, mean);
    return detail::poisson_ptrs(rng, mean);
}

// Binomial(n, p) realized as n independent Bernoulli draws. n is a photon
// count here (almost always 0..4), so the naive loop beats any fancy sampler
// and keeps the draw count deterministic per event.
inline std::uint64_t binomial_thin(SplitMix64& rng, std::uint64_t n, double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("thinning probability must lie in [0,1], got " +
                                    std::to_string(p));
    std::uint64_t kept = 0;
    for (std::uint64_t i = 0; i < n; ++i)
        if (rng.next_double() < p)
            ++kept;
    return kept;
}

} // namespace qlink

#endif
