#ifndef QLINK_TESTS_ENUMERATION_HPP
#define QLINK_TESTS_ENUMERATION_HPP

#include <cmath>
#include <stdexcept>

// Exact outcome laws for the heralding attempts, computed from first
// principles (Bernoulli excitations, per-photon transmission, Poisson noise
// counts summed term by term). Deliberately avoids the shortcuts used in the
// sampler so the two derivations are independent.

namespace qlink_tests::enumeration {

// P(zero detected noise photons in one attempt window)
// = sum_n Poisson(2 n_add; n) (1 - eta)^n
inline double prob_no_noise_click(double eta, double n_add) {
    const double mean = 2.0 * n_add;
    double pmf = std::exp(-mean);
    double cum = pmf;
    double keep = 1.0;
    double total = pmf;
    for (int n = 1; n < 100000 && cum < 1.0 - 1e-15; ++n) {
        pmf *= mean / n;
        cum += pmf;
        keep *= 1.0 - eta;
        total += pmf * keep;
    }
    return total;
}

struct OutcomeProbs {
    double bell = 0.0;
    double dephased = 0.0;
    double gg = 0.0;
    double ee = 0.0;

    double herald() const { return bell + dephased + gg + ee; }
    double no_click() const { return 1.0 - herald(); }
    double fidelity() const { return (bell + 0.5 * dephased) / herald(); }
};

inline OutcomeProbs one_click_probs(double pe, double eta, double n_add) {
    const double p0 = prob_no_noise_click(eta, n_add);
    OutcomeProbs p;
    p.bell = 2.0 * pe * (1.0 - pe) * eta * p0;
    p.dephased = 2.0 * pe * (1.0 - pe) * (1.0 - p0);
    p.gg = (1.0 - pe) * (1.0 - pe) * (1.0 - p0);
    p.ee = pe * pe * (1.0 - (1.0 - eta) * (1.0 - eta) * p0);
    return p;
}

inline OutcomeProbs two_click_probs(double pe, double eta, double n_add) {
    const double p0 = prob_no_noise_click(eta, n_add);
    const double click_single = 1.0 - (1.0 - eta) * p0;   // one emitter excited
    const double click_double = 1.0 - (1.0 - eta) * (1.0 - eta) * p0; // both excited
    const double click_none = 1.0 - p0;                   // noise only
    OutcomeProbs p;
    p.bell = 2.0 * pe * (1.0 - pe) * (eta * p0) * (eta * p0);
    p.dephased = 2.0 * pe * (1.0 - pe) * (click_single * click_single - eta * p0 * eta * p0);
    p.gg = pe * pe * click_double * click_none;
    p.ee = (1.0 - pe) * (1.0 - pe) * click_none * click_double;
    return p;
}

// Distillation bookkeeping for ideal memory and perfect gates, conditional on
// both input pairs being freshly heralded with law `p`.
inline double epl_accept_prob(const OutcomeProbs& p) {
    const double h = p.herald();
    const double ub = p.bell / h, ud = p.dephased / h;
    const double ug = p.gg / h, ue = p.ee / h;
    return 0.5 * (ub + ud) * (ub + ud) + 2.0 * ug * ue;
}

inline double epl_output_fidelity(const OutcomeProbs& p) {
    const double h = p.herald();
    const double ub = p.bell / h, ud = p.dephased / h;
    const double good = 0.5 * ub * ub + 0.25 * (ud * ud + 2.0 * ub * ud);
    return good / epl_accept_prob(p);
}

// Distilled pairs per heralding attempt: two heralds per round at 1/h
// attempts each, times the round acceptance probability.
inline double epl_rate_per_attempt(const OutcomeProbs& p) {
    return epl_accept_prob(p) * p.herald() / 2.0;
}

} // namespace qlink_tests::enumeration

#endif
