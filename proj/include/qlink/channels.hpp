#ifndef QLINK_CHANNELS_HPP
#define QLINK_CHANNELS_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qlink/qstate.hpp"

namespace qlink {

// Idle-memory noise. Times are seconds; infinity disables a decay axis.
// env_excitation is the stationary excited-state population the amplitude
// channel relaxes toward.
struct MemoryParams {
    double t1_s = std::numeric_limits<double>::infinity();
    double t2phi_s = std::numeric_limits<double>::infinity();
    double env_excitation = 0.0;

    void validate() const {
        if (!(t1_s > 0.0))
            throw std::invalid_argument("t1_s must be positive (infinity allowed)");
        if (!(t2phi_s > 0.0))
            throw std::invalid_argument("t2phi_s must be positive (infinity allowed)");
        if (!(env_excitation >= 0.0 && env_excitation <= 1.0))
            throw std::invalid_argument("env_excitation must lie in [0,1]");
    }
};

// Two-qubit gate quality. epsilon = 1 is a perfect gate; lower values mix in
// single-qubit depolarizing noise on both operands.
struct GateNoiseParams {
    double epsilon = 1.0;

    void validate() const {
        if (!(epsilon >= 0.0 && epsilon <= 1.0))
            throw std::invalid_argument("gate epsilon must lie in [0,1]");
    }
};

// Fraction 1 - exp(-t/tau), guarded so tau = infinity and t = 0 are exact.
inline double decay_fraction(double t, double tau) {
    if (t < 0.0)
        throw std::invalid_argument("decay time must be nonnegative");
    if (t == 0.0 || std::isinf(tau))
        return 0.0;
    return -std::expm1(-t / tau);
}

// Generalized amplitude damping for hold time t: relaxation toward a thermal
// population env_excitation with rate 1/t1.
inline KrausChannel gad_channel(double t1_s, double t, double env_excitation) {
    if (!(env_excitation >= 0.0 && env_excitation <= 1.0))
        throw std::invalid_argument("env_excitation must lie in [0,1]");
    const double gamma = decay_fraction(t, t1_s);
    const double p = 1.0 - env_excitation;
    const double root_keep = std::sqrt(1.0 - gamma);
    const double root_gamma = std::sqrt(gamma);

    Matrix m0 = Matrix::Zero(2, 2), m1 = Matrix::Zero(2, 2);
    Matrix m2 = Matrix::Zero(2, 2), m3 = Matrix::Zero(2, 2);
    const double sp = std::sqrt(p);
    const double sq = std::sqrt(1.0 - p);
    m0(0, 0) = sp;
    m0(1, 1) = sp * root_keep;
    m1(0, 1) = sp * root_gamma;
    m2(0, 0) = sq * root_keep;
    m2(1, 1) = sq;
    m3(1, 0) = sq * root_gamma;
    return KrausChannel{{m0, m1, m2, m3}, true};
}

// Pure dephasing for hold time t. The Kraus pair scales coherences by exactly
// exp(-t/t2phi) while leaving populations untouched.
inline KrausChannel dephasing_channel(double t2phi_s, double t) {
    const double gamma = decay_fraction(2.0 * t, t2phi_s);
    Matrix m0 = Matrix::Zero(2, 2), m1 = Matrix::Zero(2, 2);
    m0(0, 0) = 1.0;
    m0(1, 1) = std::sqrt(1.0 - gamma);
    m1(1, 1) = std::sqrt(gamma);
    return KrausChannel{{m0, m1}, true};
}

inline KrausChannel depolarizing_channel(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("depolarizing probability must lie in [0,1]");
    KrausChannel ch;
    ch.operators.push_back(std::sqrt(1.0 - p) * Matrix::Identity(2, 2));
    ch.operators.push_back(std::sqrt(p / 3.0) * gates::pauli_x());
    ch.operators.push_back(std::sqrt(p / 3.0) * gates::pauli_y());
    ch.operators.push_back(std::sqrt(p / 3.0) * gates::pauli_z());
    return ch;
}

// CNOT followed by depolarizing noise of strength 1 - epsilon on control and
// target.
inline DensityMatrix apply_noisy_cnot(const DensityMatrix& rho, int control, int target,
                                      const GateNoiseParams& gate) {
    gate.validate();
    DensityMatrix out = apply_unitary(rho, gates::cnot_on(rho.n_qubits(), control, target));
    if (gate.epsilon == 1.0)
        return out;
    const KrausChannel depol = depolarizing_channel(1.0 - gate.epsilon);
    out = *apply_channel(out, embed_single_qubit_channel(depol, control, rho.n_qubits())).state;
    out = *apply_channel(out, embed_single_qubit_channel(depol, target, rho.n_qubits())).state;
    return out;
}

// Same map as apply_noisy_cnot on a two-qubit register (control = qubit 0,
// target = qubit 1), packaged as one Kraus set.
inline KrausChannel noisy_cnot_channel(const GateNoiseParams& gate) {
    gate.validate();
    const Matrix u = gates::cnot_on(2, 0, 1);
    const KrausChannel depol = depolarizing_channel(1.0 - gate.epsilon);
    KrausChannel ch;
    for (const auto& kc : depol.operators)
        for (const auto& kt : depol.operators)
            ch.operators.push_back(Eigen::kroneckerProduct(kc, kt).eval() * u);
    return ch;
}

// Idle decay of the memory qubits (register positions 0 and 1) for a hold of
// t seconds: amplitude relaxation first, then pure dephasing, per qubit.
inline DensityMatrix decay_memory_pair(const DensityMatrix& rho, const MemoryParams& mem,
                                       double t) {
    mem.validate();
    if (t < 0.0)
        throw std::invalid_argument("decay time must be nonnegative");
    if (rho.n_qubits() < 2)
        throw std::invalid_argument("memory decay expects at least two qubits");
    if (t == 0.0 || (std::isinf(mem.t1_s) && std::isinf(mem.t2phi_s)))
        return rho;

    const KrausChannel gad = gad_channel(mem.t1_s, t, mem.env_excitation);
    const KrausChannel deph = dephasing_channel(mem.t2phi_s, t);
    DensityMatrix out = rho;
    for (int q = 0; q < 2; ++q) {
        out = *apply_channel(out, embed_single_qubit_channel(gad, q, rho.n_qubits())).state;
        out = *apply_channel(out, embed_single_qubit_channel(deph, q, rho.n_qubits())).state;
    }
    return out;
}

// Closed-form overlap <psi| C(|psi><psi|) |psi> for a single qubit held in an
// amplitude-relaxing memory. Valid for pure inputs.
inline double gad_stored_state_fidelity(const DensityMatrix& rho, double t1_s, double t,
                                        double env_excitation) {
    if (rho.n_qubits() != 1)
        throw std::invalid_argument("stored-state fidelity oracle expects one qubit");
    const double gamma = decay_fraction(t, t1_s);
    const double p = 1.0 - env_excitation;
    const double r00 = rho.mat()(0, 0).real();
    const double r11 = rho.mat()(1, 1).real();
    const double coh = (rho.mat()(0, 1) * rho.mat()(1, 0)).real();
    return r00 * r00 * (1.0 - gamma * (1.0 - p)) + r11 * r11 * (1.0 - gamma * p) +
           coh * (gamma + 2.0 * std::sqrt(1.0 - gamma));
}

// Closed-form overlap for a single qubit under pure dephasing; pure inputs.
inline double dephasing_stored_state_fidelity(const DensityMatrix& rho, double t2phi_s,
                                              double t) {
    if (rho.n_qubits() != 1)
        throw std::invalid_argument("stored-state fidelity oracle expects one qubit");
    const double e = (std::isinf(t2phi_s) || t == 0.0) ? 1.0 : std::exp(-t / t2phi_s);
    const double r00 = rho.mat()(0, 0).real();
    const double r11 = rho.mat()(1, 1).real();
    const double coh = (rho.mat()(0, 1) * rho.mat()(1, 0)).real();
    return r00 * r00 + r11 * r11 + 2.0 * e * coh;
}

} // namespace qlink

#endif
