#ifndef QLINK_ANALYTIC_HPP
#define QLINK_ANALYTIC_HPP

#include <cmath>
#include <stdexcept>

#include "qlink/qstate.hpp"

// Closed-form herald-state mixtures for the direct protocols, valid in the
// weak-noise regime (dark-click probability small against the detection
// probability). Multi-photon events are folded into single effective dark
// clicks here, so these forms drift from the sampled model once the noise
// mean approaches one photon per attempt; the simulator is the reference.

namespace qlink::analytic {

// Probability of at least one detected noise photon in one particular
// detector during one attempt window.
inline double dark_click_prob(double eta, double n_add) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("eta must lie in [0,1]");
    if (!(n_add >= 0.0))
        throw std::invalid_argument("n_add must be nonnegative");
    return -std::expm1(-eta * n_add);
}

namespace detail {

struct MixtureWeights {
    double w_00 = 0.0;
    double w_psi = 0.0;
    double w_single = 0.0; // applied to |01><01| and |10><10| separately
    double w_11 = 0.0;

    double total() const { return w_00 + w_psi + 2.0 * w_single + w_11; }

    DensityMatrix state() const {
        const double n = total();
        if (!(n > 1e-300))
            throw std::domain_error("herald mixture has zero weight");
        Matrix m = Matrix::Zero(4, 4);
        m(0, 0) = w_00 / n;
        m(1, 1) = (w_psi * 0.5 + w_single) / n;
        m(2, 2) = (w_psi * 0.5 + w_single) / n;
        m(1, 2) = w_psi * 0.5 / n;
        m(2, 1) = w_psi * 0.5 / n;
        m(3, 3) = w_11 / n;
        return DensityMatrix(2, m);
    }
};

inline void check_attempt_args(double p_e, double eta, double n_add) {
    if (!(p_e >= 0.0 && p_e <= 1.0))
        throw std::invalid_argument("p_e must lie in [0,1]");
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("eta must lie in [0,1]");
    if (!(n_add >= 0.0))
        throw std::invalid_argument("n_add must be nonnegative");
}

} // namespace detail

inline DensityMatrix rho_one_click(double p_e, double eta, double n_add) {
    detail::check_attempt_args(p_e, eta, n_add);
    const double pd = dark_click_prob(eta, n_add);
    const double miss = 1.0 - eta;
    detail::MixtureWeights w;
    w.w_00 = (1.0 - p_e) * (1.0 - p_e) * 2.0 * pd * (1.0 - pd);
    w.w_psi = 2.0 * p_e * (1.0 - p_e) * eta * (1.0 - pd);
    w.w_single = p_e * (1.0 - p_e) * miss * (1.0 - pd) * 2.0 * pd;
    w.w_11 = p_e * p_e * ((1.0 - miss * miss) + miss * miss * 2.0 * pd) * (1.0 - pd);
    return w.state();
}

inline double fidelity_one_click(double p_e, double eta, double n_add) {
    detail::check_attempt_args(p_e, eta, n_add);
    const double pd = dark_click_prob(eta, n_add);
    const double num =
        2.0 * p_e * (1.0 - p_e) * eta + p_e * (1.0 - p_e) * (1.0 - eta) * 2.0 * pd;
    const double den = p_e * eta * (1.0 - 2.0 * pd) * (2.0 - p_e * eta) + 2.0 * pd;
    if (!(den > 1e-300))
        throw std::domain_error("herald mixture has zero weight");
    return num / den;
}

inline DensityMatrix rho_two_click(double p_e, double eta, double n_add) {
    detail::check_attempt_args(p_e, eta, n_add);
    const double pd = dark_click_prob(eta, n_add);
    const double miss = 1.0 - eta;
    const double keep = 1.0 - pd;
    detail::MixtureWeights w;
    w.w_00 = (1.0 - p_e) * (1.0 - p_e) * 2.0 * pd * keep *
             ((1.0 - miss * miss) * keep + miss * miss * 2.0 * pd * keep);
    w.w_psi = 2.0 * p_e * (1.0 - p_e) * eta * eta * keep * keep;
    {
        const double detected = eta * keep + miss * keep * 2.0 * pd;
        w.w_single = detected * detected - eta * eta * keep * keep;
    }
    w.w_11 = p_e * p_e * ((1.0 - miss * miss) + miss * miss * 2.0 * pd) * keep * keep *
             2.0 * pd;
    return w.state();
}

inline double fidelity_two_click(double p_e, double eta, double n_add) {
    return fidelity_to_bell(rho_two_click(p_e, eta, n_add));
}

} // namespace qlink::analytic

#endif
