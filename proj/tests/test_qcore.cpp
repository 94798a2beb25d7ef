#include <doctest.h>

#include <cmath>

#include "ghzqkd/qcore.hpp"
#include "oracles.hpp"

using namespace ghzqkd;
using qcore::Basis;
using qcore::Outcome;
using qcore::StateVector;

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

bool amp_near(qcore::Amplitude a, double re, double im, double tol = 1e-12) {
    return std::abs(a.real() - re) <= tol && std::abs(a.imag() - im) <= tol;
}

double max_amp_diff(const StateVector& a, const StateVector& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.amps.size(); ++i)
        worst = std::max(worst, std::abs(a.amps[i] - b.amps[i]));
    return worst;
}

}  // namespace

TEST_CASE("eigenstates match their defining amplitudes") {
    const auto xp = qcore::eigenstate(Basis::X, Outcome::Plus);
    CHECK(amp_near(xp.amps[0], kInvSqrt2, 0.0));
    CHECK(amp_near(xp.amps[1], kInvSqrt2, 0.0));

    const auto ym = qcore::eigenstate(Basis::Y, Outcome::Minus);
    CHECK(amp_near(ym.amps[0], kInvSqrt2, 0.0));
    CHECK(amp_near(ym.amps[1], 0.0, -kInvSqrt2));

    const auto zp = qcore::eigenstate(Basis::Z, Outcome::Plus);
    CHECK(amp_near(zp.amps[0], 1.0, 0.0));
    CHECK(amp_near(zp.amps[1], 0.0, 0.0));
}

TEST_CASE("eigenstate pairs are orthonormal in every basis") {
    for (Basis b : {Basis::X, Basis::Y, Basis::Z}) {
        const auto plus = qcore::eigenstate(b, Outcome::Plus);
        const auto minus = qcore::eigenstate(b, Outcome::Minus);
        CHECK(std::abs(qcore::inner_product(plus, minus)) <= 1e-12);
        CHECK(std::abs(qcore::norm_sq(plus) - 1.0) <= 1e-12);
        CHECK(std::abs(qcore::norm_sq(minus) - 1.0) <= 1e-12);
    }
}

TEST_CASE("cat states place weight on the all-zeros and all-ones strings") {
    const auto triplet = qcore::cat_state(3, Outcome::Plus);
    REQUIRE(triplet.amps.size() == 8);
    CHECK(amp_near(triplet.amps[0], kInvSqrt2, 0.0));
    CHECK(amp_near(triplet.amps[7], kInvSqrt2, 0.0));
    for (std::size_t i = 1; i < 7; ++i) CHECK(amp_near(triplet.amps[i], 0.0, 0.0));

    const auto bell = qcore::cat_state(2, Outcome::Plus);
    CHECK(amp_near(bell.amps[0], kInvSqrt2, 0.0));
    CHECK(amp_near(bell.amps[3], kInvSqrt2, 0.0));

    // Single-qubit reduction coincides with the X eigenstate.
    const auto one = qcore::cat_state(1, Outcome::Plus);
    CHECK(max_amp_diff(one, qcore::eigenstate(Basis::X, Outcome::Plus)) <= 1e-12);

    CHECK_THROWS_AS(qcore::cat_state(0, Outcome::Plus), std::out_of_range);
    CHECK_THROWS_AS(qcore::cat_state(13, Outcome::Plus), std::out_of_range);
}

TEST_CASE("tensor composition follows the low-bit-first convention") {
    const auto zz = qcore::tensor(qcore::eigenstate(Basis::Z, Outcome::Plus),
                                  qcore::eigenstate(Basis::Z, Outcome::Plus));
    CHECK(amp_near(zz.amps[0], 1.0, 0.0));
    for (std::size_t i = 1; i < 4; ++i) CHECK(amp_near(zz.amps[i], 0.0, 0.0));

    // Expanding |x+>|x-> by hand gives (1/2, 1/2, -1/2, -1/2) over
    // |00>,|10>,|01>,|11>.
    const auto xpxm = qcore::tensor(qcore::eigenstate(Basis::X, Outcome::Plus),
                                    qcore::eigenstate(Basis::X, Outcome::Minus));
    CHECK(amp_near(xpxm.amps[0], 0.5, 0.0));
    CHECK(amp_near(xpxm.amps[1], 0.5, 0.0));
    CHECK(amp_near(xpxm.amps[2], -0.5, 0.0));
    CHECK(amp_near(xpxm.amps[3], -0.5, 0.0));

    // Triplet with an ancilla attached: amplitudes factorize, ancilla on the
    // high-order bit.
    const StateVector ancilla{1, {qcore::Amplitude(0.6, 0.0), qcore::Amplitude(0.0, 0.8)}};
    const auto joint = qcore::tensor(qcore::cat_state(3, Outcome::Plus), ancilla);
    REQUIRE(joint.n_qubits == 4);
    CHECK(amp_near(joint.amps[0], 0.6 * kInvSqrt2, 0.0));
    CHECK(amp_near(joint.amps[7], 0.6 * kInvSqrt2, 0.0));
    CHECK(amp_near(joint.amps[8], 0.0, 0.8 * kInvSqrt2));
    CHECK(amp_near(joint.amps[15], 0.0, 0.8 * kInvSqrt2));
    CHECK(std::abs(qcore::norm_sq(joint) - 1.0) <= 1e-12);

    CHECK_THROWS_AS(qcore::tensor(qcore::cat_state(7, Outcome::Plus),
                                  qcore::cat_state(6, Outcome::Plus)),
                    std::out_of_range);
}

TEST_CASE("outcome probabilities for the documented cases") {
    const auto triplet = qcore::cat_state(3, Outcome::Plus);
    auto [pp, pm] = qcore::outcome_probabilities(triplet, qcore::kP2, Basis::X);
    CHECK(pp == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pm == doctest::Approx(0.5).epsilon(1e-12));

    const auto xm = qcore::eigenstate(Basis::X, Outcome::Minus);
    auto [xp_prob, xm_prob] = qcore::outcome_probabilities(xm, 0, Basis::X);
    CHECK(xp_prob <= 1e-12);
    CHECK(xm_prob == doctest::Approx(1.0).epsilon(1e-12));

    const auto bell = qcore::cat_state(2, Outcome::Plus);
    auto [zp, zm] = qcore::outcome_probabilities(bell, 0, Basis::Z);
    CHECK(zp == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(zm == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(qcore::outcome_probabilities(bell, 2, Basis::Z), std::out_of_range);
}

TEST_CASE("measuring an eigenstate in its own basis is deterministic") {
    Rng rng(7);
    const auto yp = qcore::eigenstate(Basis::Y, Outcome::Plus);
    for (int i = 0; i < 32; ++i) {
        auto [outcome, post] = qcore::measure(yp, 0, Basis::Y, rng);
        CHECK(outcome == Outcome::Plus);
        CHECK(max_amp_diff(post, yp) <= 1e-12);
    }
}

TEST_CASE("collapse of the triplet after an X measurement on P1") {
    Rng rng(11);
    bool saw_plus = false;
    for (int i = 0; i < 64 && !saw_plus; ++i) {
        auto [outcome, post] = qcore::measure(qcore::cat_state(3, Outcome::Plus), qcore::kP1,
                                              Basis::X, rng);
        if (outcome != Outcome::Plus) continue;
        saw_plus = true;
        // Post-state is |x+> on P1 times (|00>+|11>)/sqrt(2) on P2,P3.
        for (std::size_t idx = 0; idx < 8; ++idx) {
            const int z2 = (idx >> 1) & 1, z3 = (idx >> 2) & 1;
            const double expect = (z2 == z3) ? 0.5 : 0.0;
            CHECK(amp_near(post.amps[idx], expect, 0.0));
        }
    }
    CHECK(saw_plus);
}

TEST_CASE("measurement on the Z-diagonal cat state") {
    Rng rng(3);
    auto [outcome, post] = qcore::measure(qcore::cat_state(3, Outcome::Plus), qcore::kP1,
                                          Basis::Z, rng);
    // Whatever the outcome, the post-state is the matching basis string.
    const std::size_t idx = outcome == Outcome::Plus ? 0 : 7;
    CHECK(amp_near(post.amps[idx], 1.0, 0.0));
    CHECK(std::abs(qcore::norm_sq(post) - 1.0) <= 1e-12);
}

TEST_CASE("pauli operators act correctly on basis states") {
    StateVector s = qcore::eigenstate(Basis::Z, Outcome::Plus);
    qcore::apply_pauli(s, 0, 1);
    CHECK(amp_near(s.amps[1], 1.0, 0.0));

    s = qcore::eigenstate(Basis::Z, Outcome::Plus);
    qcore::apply_pauli(s, 0, 2);
    CHECK(amp_near(s.amps[1], 0.0, 1.0));  // Y|0> = i|1>

    s = qcore::eigenstate(Basis::Z, Outcome::Minus);
    qcore::apply_pauli(s, 0, 3);
    CHECK(amp_near(s.amps[1], -1.0, 0.0));
}

TEST_CASE("conditional subsystem states") {
    SUBCASE("probe stays pure under an identity attack") {
        const StateVector probe{1, {qcore::Amplitude(0.8, 0.0), qcore::Amplitude(0.0, 0.6)}};
        const auto joint = qcore::tensor(qcore::cat_state(3, Outcome::Plus), probe);
        const auto rho = qcore::conditional_subsystem_state(
            joint, {{qcore::kP2, Basis::X, Outcome::Plus}}, {qcore::kAncilla});
        REQUIRE(rho.dim == 2);
        CHECK(amp_near(rho.at(0, 0), 0.64, 0.0));
        CHECK(amp_near(rho.at(1, 1), 0.36, 0.0));
        CHECK(amp_near(rho.at(0, 1), 0.0, -0.48));
        CHECK(rho.hermiticity_error() <= 1e-12);
        CHECK(std::abs(rho.trace_real() - 1.0) <= 1e-12);
    }
    SUBCASE("conditioning the Bell pair pins the partner") {
        const auto rho = qcore::conditional_subsystem_state(
            qcore::cat_state(2, Outcome::Plus), {{0, Basis::Z, Outcome::Plus}}, {1});
        CHECK(amp_near(rho.at(0, 0), 1.0, 0.0));
        CHECK(amp_near(rho.at(1, 1), 0.0, 0.0));
    }
    SUBCASE("tracing the triplet to one qubit gives the maximally mixed state") {
        const auto rho = qcore::conditional_subsystem_state(qcore::cat_state(3, Outcome::Plus),
                                                            {}, {qcore::kP1});
        CHECK(amp_near(rho.at(0, 0), 0.5, 0.0));
        CHECK(amp_near(rho.at(1, 1), 0.5, 0.0));
        CHECK(amp_near(rho.at(0, 1), 0.0, 0.0));
        const auto eig = rho.eigenvalues();
        CHECK(eig.front() >= -1e-10);
        CHECK(rho.von_neumann_entropy_bits() == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("conditioning on an impossible event fails loudly") {
        CHECK_THROWS_AS(qcore::conditional_subsystem_state(
                            qcore::cat_state(2, Outcome::Plus),
                            {{0, Basis::Z, Outcome::Plus}, {1, Basis::Z, Outcome::Minus}},
                            {}),
                        std::exception);
        CHECK_THROWS_AS(qcore::conditional_subsystem_state(
                            qcore::cat_state(2, Outcome::Plus),
                            {{0, Basis::Z, Outcome::Plus}},
                            {0}),
                        std::invalid_argument);
    }
}

TEST_CASE("norm is preserved across random operation chains") {
    Rng rng(2024);
    for (int chain = 0; chain < 10000; ++chain) {
        StateVector s = qcore::cat_state(1 + static_cast<int>(rng.uniform_below(4)),
                                         rng.bernoulli(0.5) ? Outcome::Plus : Outcome::Minus);
        if (rng.bernoulli(0.5)) {
            const Basis b = rng.bernoulli(0.5) ? Basis::X : Basis::Y;
            const Outcome o = rng.bernoulli(0.5) ? Outcome::Plus : Outcome::Minus;
            s = qcore::tensor(s, qcore::eigenstate(b, o));
        }
        const int n_ops = 1 + static_cast<int>(rng.uniform_below(3));
        for (int k = 0; k < n_ops; ++k) {
            const int q = static_cast<int>(rng.uniform_below(s.n_qubits));
            const Basis b = rng.bernoulli(0.5) ? Basis::X : Basis::Y;
            qcore::measure_in_place(s, q, b, rng);
        }
        CHECK(std::abs(qcore::norm_sq(s) - 1.0) <= 1e-12);
    }
}

TEST_CASE("empirical outcome frequencies agree with the Born probabilities") {
    Rng rng(99);
    const auto triplet = qcore::cat_state(3, Outcome::Plus);
    // Bias the state first so probabilities are not 1/2 by construction.
    StateVector biased = triplet;
    qcore::collapse(biased, qcore::kP1, Basis::X, Outcome::Plus);
    for (Basis b : {Basis::X, Basis::Y, Basis::Z}) {
        const auto [pp, pm] = qcore::outcome_probabilities(biased, qcore::kP3, b);
        (void)pm;
        const int trials = 100000;
        int plus = 0;
        for (int i = 0; i < trials; ++i) {
            StateVector copy = biased;
            if (qcore::measure_in_place(copy, qcore::kP3, b, rng) == Outcome::Plus) ++plus;
        }
        const double freq = static_cast<double>(plus) / trials;
        const double sigma = std::sqrt(std::max(pp * (1 - pp), 1e-12) / trials);
        CHECK(std::abs(freq - pp) <= std::max(3 * sigma, 1e-3));
    }
}

TEST_CASE("repeated measurement in the same basis always agrees") {
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
        Rng rng(seed);
        for (int q = 0; q < 3; ++q) {
            for (Basis b : {Basis::X, Basis::Y, Basis::Z}) {
                StateVector s = qcore::cat_state(3, Outcome::Plus);
                const Outcome first = qcore::measure_in_place(s, q, b, rng);
                const Outcome second = qcore::measure_in_place(s, q, b, rng);
                CHECK(first == second);
            }
        }
    }
}

TEST_CASE("measuring P1 leaves the partner's bases unbiased") {
    for (Basis b1 : {Basis::X, Basis::Y}) {
        for (Outcome o1 : {Outcome::Plus, Outcome::Minus}) {
            StateVector s = qcore::cat_state(3, Outcome::Plus);
            qcore::collapse(s, qcore::kP1, b1, o1);
            for (Basis b2 : {Basis::X, Basis::Y}) {
                const auto [pp, pm] = qcore::outcome_probabilities(s, qcore::kP2, b2);
                CHECK(std::abs(pp - 0.5) <= 1e-12);
                CHECK(std::abs(pm - 0.5) <= 1e-12);
            }
        }
    }
}

TEST_CASE("hermitian eigenvalue solver") {
    SUBCASE("diagonal input") {
        std::vector<qcore::Amplitude> m = {qcore::Amplitude(2, 0), {}, {}, qcore::Amplitude(5, 0)};
        const auto eig = qcore::hermitian_eigenvalues(m, 2);
        CHECK(eig[0] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(eig[1] == doctest::Approx(5.0).epsilon(1e-12));
    }
    SUBCASE("2x2 against the closed form") {
        Rng rng(5);
        for (int i = 0; i < 200; ++i) {
            const double a = rng.uniform01(), d = rng.uniform01();
            const qcore::Amplitude off(rng.uniform01() - 0.5, rng.uniform01() - 0.5);
            std::vector<qcore::Amplitude> m = {qcore::Amplitude(a, 0), off, std::conj(off),
                                               qcore::Amplitude(d, 0)};
            const auto eig = qcore::hermitian_eigenvalues(m, 2);
            const double tr = a + d;
            const double disc = std::sqrt((a - d) * (a - d) + 4 * std::norm(off));
            CHECK(eig[0] == doctest::Approx((tr - disc) / 2).epsilon(1e-9));
            CHECK(eig[1] == doctest::Approx((tr + disc) / 2).epsilon(1e-9));
        }
    }
    SUBCASE("pure-state density matrix has a single unit eigenvalue") {
        const auto bell = qcore::cat_state(2, Outcome::Plus);
        std::vector<qcore::Amplitude> rho(16);
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 4; ++c)
                rho[r * 4 + c] = bell.amps[r] * std::conj(bell.amps[c]);
        const auto eig = qcore::hermitian_eigenvalues(rho, 4);
        CHECK(eig.back() == doctest::Approx(1.0).epsilon(1e-10));
        for (std::size_t i = 0; i + 1 < eig.size(); ++i)
            CHECK(std::abs(eig[i]) <= 1e-10);
    }
}

TEST_CASE("oracle cross-check: forced third outcomes carry probability one") {
    for (char b1 : {'X', 'Y'})
        for (int s1 : {1, -1})
            for (char b2 : {'X', 'Y'})
                for (int s2 : {1, -1}) {
                    const int target = oracle::parity_target(b1, b2);
                    const int s3 = target * s1 * s2;
                    CHECK(oracle::conditional_third(b1, s1, b2, s2, s3) ==
                          doctest::Approx(1.0).epsilon(1e-12));
                }
}
