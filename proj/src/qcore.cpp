#include "ghzqkd/qcore.hpp"

#include <algorithm>
#include <cmath>

namespace ghzqkd::qcore {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kZeroProbability = 1e-12;

void check_qubit(const StateVector& s, int qubit) {
    if (qubit < 0 || qubit >= s.n_qubits) throw std::out_of_range("qubit index out of range");
}

// Eigenvector components (amp of |z+>, amp of |z->).
std::pair<Amplitude, Amplitude> eigenvector_components(Basis basis, Outcome outcome) {
    const double sgn = sign_of(outcome);
    switch (basis) {
        case Basis::X: return {Amplitude(kInvSqrt2, 0.0), Amplitude(sgn * kInvSqrt2, 0.0)};
        case Basis::Y: return {Amplitude(kInvSqrt2, 0.0), Amplitude(0.0, sgn * kInvSqrt2)};
        case Basis::Z:
            return outcome == Outcome::Plus
                       ? std::pair{Amplitude(1.0, 0.0), Amplitude(0.0, 0.0)}
                       : std::pair{Amplitude(0.0, 0.0), Amplitude(1.0, 0.0)};
    }
    throw std::invalid_argument("unknown basis");
}

}  // namespace

double norm_sq(const StateVector& s) {
    double acc = 0.0;
    for (const auto& a : s.amps) acc += std::norm(a);
    return acc;
}

Amplitude inner_product(const StateVector& a, const StateVector& b) {
    if (a.n_qubits != b.n_qubits) throw std::invalid_argument("qubit count mismatch");
    Amplitude acc(0.0, 0.0);
    for (std::size_t i = 0; i < a.amps.size(); ++i) acc += std::conj(a.amps[i]) * b.amps[i];
    return acc;
}

StateVector eigenstate(Basis basis, Outcome outcome) {
    const auto [c0, c1] = eigenvector_components(basis, outcome);
    return StateVector{1, {c0, c1}};
}

StateVector cat_state(int n, Outcome sign) {
    if (n < 1 || n > kMaxQubits) throw std::out_of_range("cat state size out of range");
    StateVector s{n, std::vector<Amplitude>(std::size_t{1} << n, Amplitude(0.0, 0.0))};
    s.amps.front() = Amplitude(kInvSqrt2, 0.0);
    s.amps.back() = Amplitude(sign_of(sign) * kInvSqrt2, 0.0);
    return s;
}

StateVector tensor(const StateVector& a, const StateVector& b) {
    if (a.n_qubits + b.n_qubits > kMaxQubits) throw std::out_of_range("tensor exceeds qubit limit");
    StateVector out{a.n_qubits + b.n_qubits,
                    std::vector<Amplitude>(a.amps.size() * b.amps.size())};
    for (std::size_t j = 0; j < b.amps.size(); ++j)
        for (std::size_t i = 0; i < a.amps.size(); ++i)
            out.amps[(j << a.n_qubits) | i] = a.amps[i] * b.amps[j];
    return out;
}

std::pair<double, double> outcome_probabilities(const StateVector& s, int qubit, Basis basis) {
    check_qubit(s, qubit);
    const auto [p0, p1] = eigenvector_components(basis, Outcome::Plus);
    const auto [m0, m1] = eigenvector_components(basis, Outcome::Minus);
    const std::size_t stride = std::size_t{1} << qubit;
    double pp = 0.0, pm = 0.0;
    for (std::size_t base = 0; base < s.dim(); base += stride << 1) {
        for (std::size_t low = 0; low < stride; ++low) {
            const Amplitude a0 = s.amps[base | low];
            const Amplitude a1 = s.amps[base | low | stride];
            pp += std::norm(std::conj(p0) * a0 + std::conj(p1) * a1);
            pm += std::norm(std::conj(m0) * a0 + std::conj(m1) * a1);
        }
    }
    const double total = pp + pm;
    return {pp / total, pm / total};
}

double collapse(StateVector& s, int qubit, Basis basis, Outcome outcome) {
    check_qubit(s, qubit);
    const auto [e0, e1] = eigenvector_components(basis, outcome);
    const std::size_t stride = std::size_t{1} << qubit;
    double prob = 0.0;
    for (std::size_t base = 0; base < s.dim(); base += stride << 1) {
        for (std::size_t low = 0; low < stride; ++low) {
            const Amplitude c = std::conj(e0) * s.amps[base | low] +
                                std::conj(e1) * s.amps[base | low | stride];
            prob += std::norm(c);
            s.amps[base | low] = c * e0;
            s.amps[base | low | stride] = c * e1;
        }
    }
    if (prob < kZeroProbability)
        throw ImpossibleEventError("conditioning on an outcome of probability ~0");
    const double scale = 1.0 / std::sqrt(prob);
    for (auto& a : s.amps) a *= scale;
    return prob;
}

Outcome measure_in_place(StateVector& s, int qubit, Basis basis, Rng& rng) {
    const auto [pp, pm] = outcome_probabilities(s, qubit, basis);
    (void)pm;
    const Outcome outcome = rng.uniform01() < pp ? Outcome::Plus : Outcome::Minus;
    collapse(s, qubit, basis, outcome);
    return outcome;
}

std::pair<Outcome, StateVector> measure(const StateVector& s, int qubit, Basis basis, Rng& rng) {
    StateVector post = s;
    const Outcome outcome = measure_in_place(post, qubit, basis, rng);
    return {outcome, std::move(post)};
}

void apply_pauli(StateVector& s, int qubit, int pauli) {
    check_qubit(s, qubit);
    if (pauli < 0 || pauli > 3) throw std::invalid_argument("pauli index must be 0..3");
    if (pauli == 0) return;
    const std::size_t stride = std::size_t{1} << qubit;
    const Amplitude i_unit(0.0, 1.0);
    for (std::size_t base = 0; base < s.dim(); base += stride << 1) {
        for (std::size_t low = 0; low < stride; ++low) {
            Amplitude& a0 = s.amps[base | low];
            Amplitude& a1 = s.amps[base | low | stride];
            switch (pauli) {
                case 1: std::swap(a0, a1); break;
                case 2: {
                    const Amplitude t = a0;
                    a0 = -i_unit * a1;  // Y|1> = -i|0>
                    a1 = i_unit * t;    // Y|0> = +i|1>
                    break;
                }
                case 3: a1 = -a1; break;
                default: break;
            }
        }
    }
}

void apply_two_qubit(StateVector& s, int qa, int qb, const std::vector<Amplitude>& u) {
    check_qubit(s, qa);
    check_qubit(s, qb);
    if (qa == qb) throw std::invalid_argument("two-qubit gate needs distinct qubits");
    if (u.size() != 16) throw std::invalid_argument("two-qubit gate must be 4x4");
    const std::size_t ma = std::size_t{1} << qa;
    const std::size_t mb = std::size_t{1} << qb;
    for (std::size_t idx = 0; idx < s.dim(); ++idx) {
        if (idx & (ma | mb)) continue;  // visit each 4-group once, at its base index
        const std::size_t pos[4] = {idx, idx | ma, idx | mb, idx | ma | mb};
        Amplitude in[4], out[4];
        for (int k = 0; k < 4; ++k) in[k] = s.amps[pos[k]];
        for (int r = 0; r < 4; ++r) {
            out[r] = Amplitude(0.0, 0.0);
            for (int c = 0; c < 4; ++c) out[r] += u[std::size_t(r) * 4 + c] * in[c];
        }
        for (int k = 0; k < 4; ++k) s.amps[pos[k]] = out[k];
    }
}

double DensityLikeState::trace_real() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) acc += entries[i * dim + i].real();
    return acc;
}

double DensityLikeState::hermiticity_error() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
            worst = std::max(worst, std::abs(at(r, c) - std::conj(at(c, r))));
    return worst;
}

std::vector<double> DensityLikeState::eigenvalues() const {
    return hermitian_eigenvalues(entries, dim);
}

double DensityLikeState::von_neumann_entropy_bits() const {
    return entropy_bits(eigenvalues());
}

DensityLikeState conditional_subsystem_state(const StateVector& s,
                                             const std::vector<MeasuredQubit>& measured,
                                             const std::vector<int>& keep) {
    if (keep.empty()) throw std::invalid_argument("keep list must not be empty");
    std::vector<bool> used(static_cast<std::size_t>(s.n_qubits), false);
    auto claim = [&](int q) {
        if (q < 0 || q >= s.n_qubits) throw std::out_of_range("qubit index out of range");
        if (used[static_cast<std::size_t>(q)])
            throw std::invalid_argument("measured and keep lists must be disjoint");
        used[static_cast<std::size_t>(q)] = true;
    };
    for (const auto& m : measured) claim(m.qubit);
    for (int q : keep) claim(q);

    StateVector work = s;
    for (const auto& m : measured) collapse(work, m.qubit, m.basis, m.outcome);

    const std::size_t kdim = std::size_t{1} << keep.size();
    DensityLikeState rho{kdim, std::vector<Amplitude>(kdim * kdim, Amplitude(0.0, 0.0))};

    std::vector<std::size_t> keep_masks(keep.size());
    std::size_t keep_all = 0;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        keep_masks[i] = std::size_t{1} << keep[i];
        keep_all |= keep_masks[i];
    }
    auto spread = [&](std::size_t r) {
        std::size_t full = 0;
        for (std::size_t i = 0; i < keep_masks.size(); ++i)
            if (r & (std::size_t{1} << i)) full |= keep_masks[i];
        return full;
    };

    // rho[r][c] = sum over traced-out configurations of psi_r psi_c^*.
    for (std::size_t rest = 0; rest < work.dim(); ++rest) {
        if (rest & keep_all) continue;
        for (std::size_t r = 0; r < kdim; ++r) {
            const Amplitude ar = work.amps[rest | spread(r)];
            if (ar == Amplitude(0.0, 0.0)) continue;
            for (std::size_t c = 0; c < kdim; ++c)
                rho.entries[r * kdim + c] += ar * std::conj(work.amps[rest | spread(c)]);
        }
    }
    return rho;
}

std::vector<double> hermitian_eigenvalues(std::vector<Amplitude> m, std::size_t n) {
    if (m.size() != n * n) throw std::invalid_argument("matrix size mismatch");
    auto at = [&](std::size_t r, std::size_t c) -> Amplitude& { return m[r * n + c]; };

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += std::norm(at(p, q));
        if (off < 1e-26) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Amplitude apq = at(p, q);
                const double mag = std::abs(apq);
                if (mag < 1e-300) continue;
                const Amplitude phase = apq / mag;
                const double app = at(p, p).real();
                const double aqq = at(q, q).real();
                const double theta = 0.5 * std::atan2(2.0 * mag, app - aqq);
                const double c = std::cos(theta);
                const double sn = std::sin(theta);

                // J differs from the identity only in columns p and q:
                //   J[p][p] = c, J[q][p] = sn*conj(phase), J[p][q] = -sn, J[q][q] = c*conj(phase)
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const Amplitude akp = at(k, p);
                    const Amplitude akq = at(k, q);
                    at(k, p) = c * akp + sn * std::conj(phase) * akq;
                    at(k, q) = -sn * akp + c * std::conj(phase) * akq;
                    at(p, k) = std::conj(at(k, p));
                    at(q, k) = std::conj(at(k, q));
                }
                const double app_new = c * c * app + sn * sn * aqq + 2.0 * c * sn * mag;
                const double aqq_new = sn * sn * app + c * c * aqq - 2.0 * c * sn * mag;
                at(p, p) = Amplitude(app_new, 0.0);
                at(q, q) = Amplitude(aqq_new, 0.0);
                at(p, q) = at(q, p) = Amplitude(0.0, 0.0);
            }
        }
    }

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i).real();
    std::sort(eig.begin(), eig.end());
    return eig;
}

double entropy_bits(const std::vector<double>& probs) {
    double h = 0.0;
    for (double p : probs)
        if (p > 1e-15) h -= p * std::log2(p);
    return h;
}

}  // namespace ghzqkd::qcore
