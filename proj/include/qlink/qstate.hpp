#ifndef QLINK_QSTATE_HPP
#define QLINK_QSTATE_HPP

#include <algorithm>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace qlink {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kMaxQubits = 4;
inline constexpr double kHermitianTol = 1e-8;
inline constexpr double kTraceTol = 1e-8;

// Bit of qubit q inside basis index i. Qubit 0 is the most significant bit.
inline int qubit_bit(int basis_index, int qubit, int n_qubits) {
    return (basis_index >> (n_qubits - 1 - qubit)) & 1;
}

inline int flip_qubit(int basis_index, int qubit, int n_qubits) {
    return basis_index ^ (1 << (n_qubits - 1 - qubit));
}

class DensityMatrix {
  public:
    DensityMatrix(int n_qubits, Matrix m) : n_qubits_(n_qubits), mat_(std::move(m)) {
        if (n_qubits < 1 || n_qubits > kMaxQubits)
            throw std::invalid_argument("density matrix supports 1.." +
                                        std::to_string(kMaxQubits) + " qubits, got " +
                                        std::to_string(n_qubits));
        const int d = 1 << n_qubits;
        if (mat_.rows() != d || mat_.cols() != d)
            throw std::invalid_argument("density matrix dimension mismatch: expected " +
                                        std::to_string(d) + "x" + std::to_string(d));
        if ((mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
            throw std::invalid_argument("density matrix is not hermitian");
        const double tr = mat_.trace().real();
        if (std::abs(tr - 1.0) > kTraceTol)
            throw std::invalid_argument("density matrix trace is " + std::to_string(tr) +
                                        ", expected 1");
        // Pin hermiticity and unit trace so numerical drift cannot accumulate
        // across long channel chains.
        mat_ = ((mat_ + mat_.adjoint()) * 0.5).eval();
        mat_ /= mat_.trace().real();
    }

    static DensityMatrix pure(int n_qubits, const Vector& ket) {
        const double norm = ket.norm();
        if (norm <= 0.0)
            throw std::invalid_argument("pure state requires a nonzero ket");
        Vector unit = ket / norm;
        return DensityMatrix(n_qubits, unit * unit.adjoint());
    }

    int n_qubits() const { return n_qubits_; }
    int dim() const { return 1 << n_qubits_; }
    const Matrix& mat() const { return mat_; }

    double trace() const { return mat_.trace().real(); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(mat_, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff();
    }

  private:
    int n_qubits_;
    Matrix mat_;
};

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    const int n = a.n_qubits() + b.n_qubits();
    if (n > kMaxQubits)
        throw std::invalid_argument("tensor product would exceed " +
                                    std::to_string(kMaxQubits) + " qubits");
    return DensityMatrix(n, Eigen::kroneckerProduct(a.mat(), b.mat()).eval());
}

inline DensityMatrix apply_unitary(const DensityMatrix& rho, const Matrix& u) {
    if (u.rows() != rho.dim() || u.cols() != rho.dim())
        throw std::invalid_argument("unitary dimension does not match state");
    return DensityMatrix(rho.n_qubits(), u * rho.mat() * u.adjoint());
}

// Kraus maps may be rectangular (d_out x d_in), e.g. a map that keeps only a
// measured subspace. Trace-preserving sets satisfy sum K^dag K = I; selective
// sets only need sum K^dag K <= I.
struct KrausChannel {
    std::vector<Matrix> operators;
    bool trace_preserving = true;

    bool is_valid(double tol = 1e-8) const {
        if (operators.empty())
            return false;
        const auto rows = operators.front().rows();
        const auto cols = operators.front().cols();
        Matrix sum = Matrix::Zero(cols, cols);
        for (const auto& k : operators) {
            if (k.rows() != rows || k.cols() != cols)
                return false;
            sum += k.adjoint() * k;
        }
        if (trace_preserving)
            return (sum - Matrix::Identity(cols, cols)).cwiseAbs().maxCoeff() <= tol;
        Eigen::SelfAdjointEigenSolver<Matrix> solver(sum, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().maxCoeff() <= 1.0 + tol;
    }
};

struct ChannelResult {
    std::optional<DensityMatrix> state; // normalized; absent when the branch has no mass
    double weight = 0.0;                // trace mass routed into this branch
};

inline ChannelResult apply_channel(const DensityMatrix& rho, const KrausChannel& ch) {
    if (ch.operators.empty())
        throw std::invalid_argument("channel has no kraus operators");
    const auto d_in = ch.operators.front().cols();
    const auto d_out = ch.operators.front().rows();
    if (d_in != rho.dim())
        throw std::invalid_argument("kraus operator input dimension does not match state");
    Matrix out = Matrix::Zero(d_out, d_out);
    for (const auto& k : ch.operators)
        out.noalias() += k * rho.mat() * k.adjoint();
    const double weight = out.trace().real();
    ChannelResult result;
    result.weight = weight;
    if (weight > 1e-15) {
        int n_out = 0;
        while ((1 << n_out) < d_out)
            ++n_out;
        result.state = DensityMatrix(n_out, out / weight);
    }
    return result;
}

// Lift a single-qubit channel to qubit `qubit` of an n-qubit register.
inline KrausChannel embed_single_qubit_channel(const KrausChannel& ch, int qubit,
                                               int n_qubits) {
    if (qubit < 0 || qubit >= n_qubits)
        throw std::invalid_argument("embed target qubit out of range");
    const int d_pre = 1 << qubit;
    const int d_post = 1 << (n_qubits - 1 - qubit);
    KrausChannel embedded;
    embedded.trace_preserving = ch.trace_preserving;
    embedded.operators.reserve(ch.operators.size());
    const Matrix id_pre = Matrix::Identity(d_pre, d_pre);
    const Matrix id_post = Matrix::Identity(d_post, d_post);
    for (const auto& k : ch.operators) {
        Matrix lifted =
            Eigen::kroneckerProduct(id_pre, Eigen::kroneckerProduct(k, id_post).eval())
                .eval();
        embedded.operators.push_back(std::move(lifted));
    }
    return embedded;
}

struct MeasureResult {
    double probability = 0.0;
    // State of the unmeasured qubits, in their original order. Absent when the
    // outcome has (numerically) zero probability.
    std::optional<DensityMatrix> post;
};

// Project `qubits` (ascending, computational basis) onto the bit string
// `outcome` and drop them from the register.
inline MeasureResult measure_and_project(const DensityMatrix& rho,
                                         const std::vector<int>& qubits,
                                         const std::string& outcome) {
    const int n = rho.n_qubits();
    if (qubits.size() != outcome.size())
        throw std::invalid_argument("measurement outcome length does not match qubit count");
    if (qubits.empty() || qubits.size() >= static_cast<std::size_t>(n))
        throw std::invalid_argument("measurement must leave at least one qubit");
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        if (qubits[i] < 0 || qubits[i] >= n)
            throw std::invalid_argument("measured qubit index out of range");
        if (i > 0 && qubits[i] <= qubits[i - 1])
            throw std::invalid_argument("measured qubits must be strictly ascending");
        if (outcome[i] != '0' && outcome[i] != '1')
            throw std::invalid_argument("measurement outcome must be a 0/1 string");
    }

    std::vector<int> matching;
    for (int i = 0; i < rho.dim(); ++i) {
        bool match = true;
        for (std::size_t q = 0; q < qubits.size(); ++q)
            if (qubit_bit(i, qubits[q], n) != outcome[q] - '0') {
                match = false;
                break;
            }
        if (match)
            matching.push_back(i);
    }

    double prob = 0.0;
    for (int i : matching)
        prob += rho.mat()(i, i).real();

    MeasureResult result;
    result.probability = prob;
    if (prob > 1e-15) {
        const int d_post = static_cast<int>(matching.size());
        Matrix post(d_post, d_post);
        for (int r = 0; r < d_post; ++r)
            for (int c = 0; c < d_post; ++c)
                post(r, c) = rho.mat()(matching[r], matching[c]) / prob;
        const int n_post = n - static_cast<int>(qubits.size());
        result.post = DensityMatrix(n_post, std::move(post));
    }
    return result;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
    const int n = rho.n_qubits();
    if (keep.empty() || keep.size() >= static_cast<std::size_t>(n))
        throw std::invalid_argument("partial trace must keep a strict nonempty subset");
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i] < 0 || keep[i] >= n)
            throw std::invalid_argument("kept qubit index out of range");
        if (i > 0 && keep[i] <= keep[i - 1])
            throw std::invalid_argument("kept qubits must be strictly ascending");
    }
    std::vector<int> traced;
    for (int q = 0; q < n; ++q)
        if (std::find(keep.begin(), keep.end(), q) == keep.end())
            traced.push_back(q);

    const int k = static_cast<int>(keep.size());
    const int d_keep = 1 << k;
    const int d_traced = 1 << (n - k);
    auto full_index = [&](int keep_bits, int traced_bits) {
        int idx = 0;
        for (int i = 0; i < k; ++i)
            idx |= ((keep_bits >> (k - 1 - i)) & 1) << (n - 1 - keep[i]);
        for (int i = 0; i < n - k; ++i)
            idx |= ((traced_bits >> (n - k - 1 - i)) & 1) << (n - 1 - traced[i]);
        return idx;
    };

    Matrix out = Matrix::Zero(d_keep, d_keep);
    for (int r = 0; r < d_keep; ++r)
        for (int c = 0; c < d_keep; ++c)
            for (int t = 0; t < d_traced; ++t)
                out(r, c) += rho.mat()(full_index(r, t), full_index(c, t));
    return DensityMatrix(k, std::move(out));
}

// Overlap with (|01> + |10>)/sqrt(2) on a two-qubit state.
inline double fidelity_to_bell(const DensityMatrix& rho) {
    if (rho.n_qubits() != 2)
        throw std::invalid_argument("bell fidelity requires a two-qubit state");
    const Matrix& m = rho.mat();
    return 0.5 * (m(1, 1) + m(2, 2) + m(1, 2) + m(2, 1)).real();
}

namespace states {

inline DensityMatrix bell_psi_plus() {
    Matrix m = Matrix::Zero(4, 4);
    m(1, 1) = 0.5;
    m(1, 2) = 0.5;
    m(2, 1) = 0.5;
    m(2, 2) = 0.5;
    return DensityMatrix(2, std::move(m));
}

inline DensityMatrix ground_ground() {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = 1.0;
    return DensityMatrix(2, std::move(m));
}

inline DensityMatrix double_excited() {
    Matrix m = Matrix::Zero(4, 4);
    m(3, 3) = 1.0;
    return DensityMatrix(2, std::move(m));
}

inline DensityMatrix dephased_mix() {
    Matrix m = Matrix::Zero(4, 4);
    m(1, 1) = 0.5;
    m(2, 2) = 0.5;
    return DensityMatrix(2, std::move(m));
}

} // namespace states

namespace gates {

inline Matrix cnot_on(int n_qubits, int control, int target) {
    if (control < 0 || control >= n_qubits || target < 0 || target >= n_qubits ||
        control == target)
        throw std::invalid_argument("cnot control/target out of range");
    const int d = 1 << n_qubits;
    Matrix u = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const int j = qubit_bit(i, control, n_qubits) ? flip_qubit(i, target, n_qubits) : i;
        u(j, i) = 1.0;
    }
    return u;
}

inline Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline Matrix pauli_y() {
    Matrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}

inline Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

} // namespace gates

} // namespace qlink

#endif
