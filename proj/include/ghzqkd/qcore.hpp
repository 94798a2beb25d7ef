// Exact state-vector algebra for small qubit registers: eigenstates, cat
// states, tensor composition, projective measurement and conditional reduced
// states. Everything is computed from amplitudes; nothing is table-driven.
//
// Conventions (fixed project-wide):
//   * qubit 0 is the lowest-order bit of the amplitude index,
//   * bit value 0 <-> |z+>, 1 <-> |z->,
//   * protocol wiring: qubit 0 = P1, 1 = P2, 2 = P3, 3 = eavesdropper ancilla.

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ghzqkd/rng.hpp"

namespace ghzqkd::qcore {

using Amplitude = std::complex<double>;

enum class Basis : std::uint8_t { X, Y, Z };
enum class Outcome : std::int8_t { Plus = 1, Minus = -1 };

inline int sign_of(Outcome o) { return static_cast<int>(o); }

inline Outcome outcome_from_sign(int s) {
    if (s != 1 && s != -1) throw std::invalid_argument("outcome sign must be +1 or -1");
    return static_cast<Outcome>(s);
}

inline char basis_char(Basis b) { return b == Basis::X ? 'X' : (b == Basis::Y ? 'Y' : 'Z'); }
inline char outcome_char(Outcome o) { return o == Outcome::Plus ? '+' : '-'; }

// Protocol wiring of qubit indices.
inline constexpr int kP1 = 0;
inline constexpr int kP2 = 1;
inline constexpr int kP3 = 2;
inline constexpr int kAncilla = 3;

inline constexpr int kMaxQubits = 12;

// Raised when a conditional state is requested for an event of probability ~0.
class ImpossibleEventError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StateVector {
    int n_qubits = 0;
    std::vector<Amplitude> amps;  // size 2^n_qubits

    std::size_t dim() const { return amps.size(); }
};

double norm_sq(const StateVector& s);
Amplitude inner_product(const StateVector& a, const StateVector& b);

// Single-qubit eigenvector of the X/Y/Z measurement with the given outcome.
StateVector eigenstate(Basis basis, Outcome outcome);

// (|00...0> + sign|11...1>)/sqrt(2); 1 <= n <= kMaxQubits.
StateVector cat_state(int n, Outcome sign);

// Tensor composition; `a` keeps the low-order qubits, `b`'s become the high ones.
StateVector tensor(const StateVector& a, const StateVector& b);

// Born probabilities (plus, minus) of measuring `qubit` in `basis`.
std::pair<double, double> outcome_probabilities(const StateVector& s, int qubit, Basis basis);

// Projective measurement. Consumes exactly one uniform draw from `rng`.
std::pair<Outcome, StateVector> measure(const StateVector& s, int qubit, Basis basis, Rng& rng);

// In-place variant used by the protocol hot loop.
Outcome measure_in_place(StateVector& s, int qubit, Basis basis, Rng& rng);

// Project `qubit` onto the (basis, outcome) eigenstate and renormalize.
// Returns the probability of the branch; throws ImpossibleEventError if ~0.
double collapse(StateVector& s, int qubit, Basis basis, Outcome outcome);

// Pauli index: 0 = I, 1 = X, 2 = Y, 3 = Z.
void apply_pauli(StateVector& s, int qubit, int pauli);

// Two-qubit gate; u is row-major 4x4 over local index (bit of qa) + 2*(bit of qb).
void apply_two_qubit(StateVector& s, int qa, int qb, const std::vector<Amplitude>& u);

// Hermitian, unit-trace matrix produced by conditioning/partial trace.
struct DensityLikeState {
    std::size_t dim = 0;
    std::vector<Amplitude> entries;  // row-major dim x dim

    Amplitude at(std::size_t r, std::size_t c) const { return entries[r * dim + c]; }

    double trace_real() const;
    double hermiticity_error() const;        // max |m[r][c] - conj(m[c][r])|
    std::vector<double> eigenvalues() const; // ascending
    double von_neumann_entropy_bits() const;
};

struct MeasuredQubit {
    int qubit;
    Basis basis;
    Outcome outcome;
};

// Normalized state of the `keep` qubits conditional on the listed measurement
// results; qubits in neither list are traced out. With no conditioning this is
// the plain partial trace. keep[i] becomes bit i of the reduced index.
DensityLikeState conditional_subsystem_state(const StateVector& s,
                                             const std::vector<MeasuredQubit>& measured,
                                             const std::vector<int>& keep);

// Eigenvalues of a Hermitian matrix (row-major n x n), ascending. Cyclic
// Jacobi; intended for the small dimensions this project uses.
std::vector<double> hermitian_eigenvalues(std::vector<Amplitude> m, std::size_t n);

// Shannon entropy helper: -sum p log2 p over a probability vector.
double entropy_bits(const std::vector<double>& probs);

}  // namespace ghzqkd::qcore
