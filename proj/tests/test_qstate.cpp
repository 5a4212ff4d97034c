#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qlink/qstate.hpp"
#include "support/random_states.hpp"

using namespace qlink;
using qlink_tests::random_mixed_state;
using qlink_tests::random_pure_state;
using qlink_tests::random_unitary;

TEST_CASE("pure state construction normalizes the ket", "[qstate]") {
    Vector ket(4);
    ket << 3.0, 0.0, 4.0, 0.0;
    auto rho = DensityMatrix::pure(2, ket);
    REQUIRE(rho.trace() == Catch::Approx(1.0).margin(1e-14));
    REQUIRE(rho.mat()(0, 0).real() == Catch::Approx(9.0 / 25.0).margin(1e-14));
    REQUIRE(rho.min_eigenvalue() > -1e-12);
}

TEST_CASE("global phase does not change a pure state", "[qstate]") {
    SplitMix64 rng(11);
    Vector ket = qlink_tests::random_ket(rng, 2);
    Vector rotated = ket * std::exp(Complex(0.0, 1.234));
    auto a = DensityMatrix::pure(2, ket);
    auto b = DensityMatrix::pure(2, rotated);
    REQUIRE((a.mat() - b.mat()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("constructor rejects malformed input", "[qstate]") {
    Matrix bad_dim = Matrix::Identity(3, 3);
    REQUIRE_THROWS_AS(DensityMatrix(2, bad_dim), std::invalid_argument);

    Matrix not_herm = Matrix::Zero(2, 2);
    not_herm(0, 0) = 0.5;
    not_herm(1, 1) = 0.5;
    not_herm(0, 1) = 0.5;
    REQUIRE_THROWS_AS(DensityMatrix(1, not_herm), std::invalid_argument);

    Matrix wrong_trace = Matrix::Identity(2, 2);
    REQUIRE_THROWS_AS(DensityMatrix(1, wrong_trace), std::invalid_argument);

    Matrix five_qubit = Matrix::Identity(32, 32) / 32.0;
    REQUIRE_THROWS_AS(DensityMatrix(5, five_qubit), std::invalid_argument);
}

TEST_CASE("herald basis states carry exact entries", "[qstate]") {
    auto bell = states::bell_psi_plus();
    REQUIRE(bell.mat()(1, 1).real() == 0.5);
    REQUIRE(bell.mat()(1, 2).real() == 0.5);
    REQUIRE(bell.mat()(2, 2).real() == 0.5);
    REQUIRE(fidelity_to_bell(bell) == 1.0);

    auto deph = states::dephased_mix();
    REQUIRE(deph.mat()(1, 1).real() == 0.5);
    REQUIRE(deph.mat()(1, 2).real() == 0.0);
    REQUIRE(fidelity_to_bell(deph) == 0.5);

    REQUIRE(fidelity_to_bell(states::ground_ground()) == 0.0);
    REQUIRE(fidelity_to_bell(states::double_excited()) == 0.0);
}

TEST_CASE("tensor product stacks registers", "[qstate]") {
    SplitMix64 rng(22);
    auto a = random_mixed_state(rng, 2);
    auto b = random_mixed_state(rng, 2);
    auto ab = tensor(a, b);
    REQUIRE(ab.n_qubits() == 4);
    Matrix expected = Eigen::kroneckerProduct(a.mat(), b.mat());
    REQUIRE((ab.mat() - expected).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE_THROWS_AS(tensor(ab, a), std::invalid_argument);
}

TEST_CASE("partial trace inverts tensor", "[qstate]") {
    SplitMix64 rng(23);
    auto a = random_mixed_state(rng, 2);
    auto b = random_mixed_state(rng, 2);
    auto ab = tensor(a, b);
    auto back_a = partial_trace(ab, {0, 1});
    auto back_b = partial_trace(ab, {2, 3});
    REQUIRE((back_a.mat() - a.mat()).cwiseAbs().maxCoeff() < 1e-13);
    REQUIRE((back_b.mat() - b.mat()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("cnot permutes the computational basis", "[qstate]") {
    Matrix u = gates::cnot_on(2, 0, 1);
    // basis order |00>,|01>,|10>,|11>; control is the most significant qubit
    REQUIRE(u(0, 0).real() == 1.0);
    REQUIRE(u(1, 1).real() == 1.0);
    REQUIRE(u(3, 2).real() == 1.0);
    REQUIRE(u(2, 3).real() == 1.0);
    REQUIRE((u * u - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);

    // 4-qubit register, control qubit 2, target qubit 0
    Matrix u4 = gates::cnot_on(4, 2, 0);
    const int in = 0b0010;  // qubit 2 set
    const int out = 0b1010; // qubit 0 flipped
    REQUIRE(u4(out, in).real() == 1.0);
    REQUIRE_THROWS_AS(gates::cnot_on(2, 1, 1), std::invalid_argument);
}

TEST_CASE("unitary conjugation preserves trace and positivity", "[qstate]") {
    SplitMix64 rng(33);
    for (int i = 0; i < 50; ++i) {
        auto rho = random_mixed_state(rng, 2);
        Matrix u = random_unitary(rng, 4);
        auto out = apply_unitary(rho, u);
        REQUIRE(out.trace() == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(out.min_eigenvalue() > -1e-12);
    }
}

TEST_CASE("trace preserving channels conserve trace on random states", "[qstate]") {
    SplitMix64 rng(44);
    const double gamma = 0.3;
    KrausChannel damp;
    Matrix k0(2, 2), k1(2, 2);
    k0 << 1, 0, 0, std::sqrt(1 - gamma);
    k1 << 0, std::sqrt(gamma), 0, 0;
    damp.operators = {k0, k1};
    REQUIRE(damp.is_valid());

    for (int i = 0; i < 200; ++i) {
        auto rho = random_mixed_state(rng, 1);
        auto out = apply_channel(rho, damp);
        REQUIRE(out.weight == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(out.state.has_value());
        REQUIRE(out.state->trace() == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(out.state->min_eigenvalue() > -1e-12);
    }
}

TEST_CASE("embedded channels on distinct qubits commute", "[qstate]") {
    SplitMix64 rng(55);
    const double gamma = 0.4;
    KrausChannel damp;
    Matrix k0(2, 2), k1(2, 2);
    k0 << 1, 0, 0, std::sqrt(1 - gamma);
    k1 << 0, std::sqrt(gamma), 0, 0;
    damp.operators = {k0, k1};

    auto on0 = embed_single_qubit_channel(damp, 0, 2);
    auto on1 = embed_single_qubit_channel(damp, 1, 2);
    REQUIRE(on0.is_valid());
    REQUIRE(on1.is_valid());

    auto rho = random_mixed_state(rng, 2);
    auto path_a = apply_channel(*apply_channel(rho, on0).state, on1);
    auto path_b = apply_channel(*apply_channel(rho, on1).state, on0);
    REQUIRE((path_a.state->mat() - path_b.state->mat()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("embedding acts on the addressed qubit only", "[qstate]") {
    KrausChannel flip;
    flip.operators = {gates::pauli_x()};
    auto on0 = embed_single_qubit_channel(flip, 0, 2);
    auto out = apply_channel(states::ground_ground(), on0);
    // |00> with qubit 0 flipped is |10>, basis index 2
    REQUIRE(out.state->mat()(2, 2).real() == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("rectangular kraus maps filter into a smaller register", "[qstate]") {
    // Keep the single-excitation subspace of two qubits as one logical qubit.
    Matrix k = Matrix::Zero(2, 4);
    k(0, 1) = 1.0;
    k(1, 2) = 1.0;
    KrausChannel filter;
    filter.operators = {k};
    filter.trace_preserving = false;
    REQUIRE(filter.is_valid());

    SplitMix64 rng(66);
    for (int i = 0; i < 100; ++i) {
        auto rho = random_mixed_state(rng, 2);
        auto out = apply_channel(rho, filter);
        REQUIRE(out.weight >= 0.0);
        REQUIRE(out.weight <= 1.0 + 1e-9);
        const double expected = (rho.mat()(1, 1) + rho.mat()(2, 2)).real();
        REQUIRE(out.weight == Catch::Approx(expected).margin(1e-12));
        REQUIRE(out.state->n_qubits() == 1);
    }

    auto gone = apply_channel(states::ground_ground(), filter);
    REQUIRE(gone.weight < 1e-15);
    REQUIRE_FALSE(gone.state.has_value());
}

TEST_CASE("measurement outcomes are complete and projective", "[qstate]") {
    SplitMix64 rng(77);
    auto rho = random_mixed_state(rng, 3);
    const char* outcomes[] = {"00", "01", "10", "11"};
    double total = 0.0;
    for (const char* oc : outcomes) {
        auto res = measure_and_project(rho, {0, 1}, oc);
        total += res.probability;
        if (res.post) {
            REQUIRE(res.post->n_qubits() == 1);
            REQUIRE(res.post->trace() == Catch::Approx(1.0).margin(1e-12));
        }
    }
    REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("measuring a product register leaves the partner untouched", "[qstate]") {
    auto joint = tensor(states::bell_psi_plus(), states::double_excited());
    auto res = measure_and_project(joint, {2, 3}, "11");
    REQUIRE(res.probability == Catch::Approx(1.0).margin(1e-14));
    REQUIRE(res.post.has_value());
    REQUIRE((res.post->mat() - states::bell_psi_plus().mat()).cwiseAbs().maxCoeff() < 1e-14);

    auto miss = measure_and_project(joint, {2, 3}, "00");
    REQUIRE(miss.probability < 1e-15);
    REQUIRE_FALSE(miss.post.has_value());
}

TEST_CASE("measurement input validation", "[qstate]") {
    auto rho = tensor(states::bell_psi_plus(), states::ground_ground());
    REQUIRE_THROWS_AS(measure_and_project(rho, {0, 1}, "1"), std::invalid_argument);
    REQUIRE_THROWS_AS(measure_and_project(rho, {1, 0}, "11"), std::invalid_argument);
    REQUIRE_THROWS_AS(measure_and_project(rho, {0, 4}, "11"), std::invalid_argument);
    REQUIRE_THROWS_AS(measure_and_project(rho, {0, 1}, "1x"), std::invalid_argument);
    REQUIRE_THROWS_AS(measure_and_project(rho, {0, 1, 2, 3}, "1111"), std::invalid_argument);
}
