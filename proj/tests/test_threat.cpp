#include <doctest.h>

#include <cmath>

#include "ghzqkd/threat.hpp"
#include "oracles.hpp"

using namespace ghzqkd;
using qcore::Basis;
using qcore::Outcome;
using qcore::StateVector;

TEST_CASE("transmission through a perfect channel is the identity") {
    Rng rng(1);
    StateVector s = qcore::cat_state(3, Outcome::Plus);
    const StateVector before = s;
    for (int i = 0; i < 100; ++i) {
        CHECK(threat::transmit_p2(s, threat::ChannelConfig{0.0, 0.0}, rng));
        for (std::size_t k = 0; k < s.amps.size(); ++k) CHECK(s.amps[k] == before.amps[k]);
    }
}

TEST_CASE("loss statistics follow the configured probability") {
    Rng rng(22);
    const threat::ChannelConfig cfg{0.1, 0.0};
    int lost = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        StateVector s = qcore::cat_state(3, Outcome::Plus);
        if (!threat::transmit_p2(s, cfg, rng)) ++lost;
    }
    const double sigma = std::sqrt(0.1 * 0.9 / trials);
    CHECK(std::abs(lost / static_cast<double>(trials) - 0.1) <= 3 * sigma);

    // loss_prob 1 never delivers.
    StateVector s = qcore::cat_state(3, Outcome::Plus);
    CHECK_FALSE(threat::transmit_p2(s, threat::ChannelConfig{1.0, 0.0}, rng));
}

TEST_CASE("a depolarizing event violates the parity check half the time") {
    CHECK(oracle::depolarize_violation_given_event() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("intercept-resend: Bob reproduces Eve's outcome in her basis") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        StateVector s = qcore::cat_state(3, Outcome::Plus);
        const auto record = threat::intercept_resend(s, threat::InterceptResend{}, rng);
        // The forwarded particle is the collapsed P2; measuring it in Eve's
        // basis must reproduce her result.
        const Outcome bob = qcore::measure_in_place(s, qcore::kP2, record.basis, rng);
        CHECK(bob == record.outcome);
    }
}

TEST_CASE("intercept-resend analysis matches the enumeration oracle") {
    CHECK(oracle::intercept_resend_detection() == doctest::Approx(0.25).epsilon(1e-12));

    const auto report = threat::eve_information(threat::InterceptResend{});
    CHECK(report.detection_rate_per_tested_round == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(report.qber_on_key == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(report.eve_bob_mutual_information == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(report.eve_alice_mutual_information == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("no eavesdropper: nothing to detect, nothing learned") {
    const auto report = threat::eve_information(threat::NoEve{});
    CHECK(report.detection_rate_per_tested_round <= 1e-15);
    CHECK(report.qber_on_key <= 1e-15);
    CHECK(report.eve_bob_mutual_information <= 1e-15);
    CHECK(report.eve_alice_mutual_information <= 1e-15);
}

TEST_CASE("probe entanglement: identity attack leaves the probe untouched") {
    const auto attack = threat::z_probe_attack(0.0);
    const auto dec = threat::entangle_ancilla(attack);
    CHECK(std::abs(qcore::norm_sq(dec.state) - 1.0) <= 1e-12);
    for (int k = 0; k < 4; ++k) {
        CHECK(std::abs(dec.branch_components[k][0] - qcore::Amplitude(1.0, 0.0)) <= 1e-12);
        CHECK(std::abs(dec.branch_components[k][1]) <= 1e-12);
        CHECK(std::abs(dec.violating_components[k][0]) <= 1e-12);
        CHECK(std::abs(dec.violating_components[k][1]) <= 1e-12);
    }

    const auto report = threat::eve_information(threat::EveStrategy{attack});
    CHECK(report.detection_rate_per_tested_round <= 1e-12);
    CHECK(report.eve_bob_mutual_information <= 1e-9);
    CHECK(report.eve_alice_mutual_information <= 1e-9);
    CHECK(threat::eve_z_information(threat::EveStrategy{attack}) <= 1e-9);
}

TEST_CASE("probe entanglement: full-strength probe copies the z-value") {
    const auto attack = threat::z_probe_attack(1.0);
    const auto dec = threat::entangle_ancilla(attack);
    CHECK(std::abs(qcore::norm_sq(dec.state) - 1.0) <= 1e-12);

    // Direct expansion of (|000>|0> + |111>|1>)/sqrt(2): every consistent
    // branch carries the same component (|0>+|1>)/2, and the disturbance sits
    // entirely on the parity-violating branches, each holding (|0>-|1>)/2.
    double leak = 0.0;
    for (int k = 0; k < 4; ++k) {
        CHECK(std::abs(dec.branch_components[k][0] - qcore::Amplitude(0.5, 0.0)) <= 1e-12);
        CHECK(std::abs(dec.branch_components[k][1] - qcore::Amplitude(0.5, 0.0)) <= 1e-12);
        for (int a = 0; a < 2; ++a) leak += std::norm(dec.violating_components[k][a]);
    }
    CHECK(leak == doctest::Approx(2.0).epsilon(1e-12));

    const threat::EveStrategy strategy{attack};
    const auto report = threat::eve_information(strategy);
    CHECK(report.detection_rate_per_tested_round == doctest::Approx(0.5).epsilon(1e-12));
    // The probe records the transmitted qubit's z-value exactly, yet still
    // says nothing about either party's sifted bit.
    CHECK(threat::eve_z_information(strategy) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(report.eve_bob_mutual_information <= 1e-9);
    CHECK(report.eve_alice_mutual_information <= 1e-9);
}

TEST_CASE("probe detection rate follows the interpolation closed form") {
    // Hand derivation: overlap between the conditional probe states is
    // cos(strength*pi/2) and every valid combo violates with weight
    // (1 - overlap)/2.
    for (double t : {0.0, 0.1, 0.25, 0.5, 0.75, 1.0}) {
        const auto report = threat::eve_information(threat::EveStrategy{threat::z_probe_attack(t)});
        const double expect = 0.5 * (1.0 - std::cos(t * 1.57079632679489661923));
        CHECK(report.detection_rate_per_tested_round == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("information and disturbance are monotone across the probe family") {
    double prev_detect = -1.0, prev_z = -1.0, prev_bob = -1.0;
    for (int i = 0; i <= 10; ++i) {
        const double t = i / 10.0;
        const threat::EveStrategy strategy{threat::z_probe_attack(t)};
        const auto report = threat::eve_information(strategy);
        const double z = threat::eve_z_information(strategy);
        CHECK(report.detection_rate_per_tested_round >= prev_detect - 1e-12);
        CHECK(z >= prev_z - 1e-12);
        CHECK(report.eve_bob_mutual_information >= prev_bob - 1e-12);
        // Zero disturbance implies zero information within the family.
        if (report.detection_rate_per_tested_round <= 1e-12) {
            CHECK(report.eve_bob_mutual_information <= 1e-9);
            CHECK(report.eve_alice_mutual_information <= 1e-9);
        }
        prev_detect = report.detection_rate_per_tested_round;
        prev_z = z;
        prev_bob = report.eve_bob_mutual_information;
    }
}

TEST_CASE("probe components can distinguish branches for x-controlled attacks") {
    // Controlled flip keyed to P2's x-value: probe components differ across
    // branches and nothing lands on the violating branches in this grouping.
    threat::EntangleAncilla attack;
    attack.unitary.assign(16, qcore::Amplitude(0.0, 0.0));
    // |x+><x+| ox I + |x-><x-| ox X over local index bit(P2) + 2*bit(ancilla).
    const double h = 0.5;
    const auto set = [&](int r, int c, double v) { attack.unitary[r * 4 + c] = v; };
    // |x+><x+| ox I
    set(0, 0, h); set(0, 1, h); set(1, 0, h); set(1, 1, h);
    set(2, 2, h); set(2, 3, h); set(3, 2, h); set(3, 3, h);
    // |x-><x-| ox X
    set(2, 0, h); set(2, 1, -h); set(3, 0, -h); set(3, 1, h);
    set(0, 2, h); set(0, 3, -h); set(1, 2, -h); set(1, 3, h);
    attack.ancilla_init = {qcore::Amplitude(1.0, 0.0), qcore::Amplitude(0.0, 0.0)};

    const auto dec = threat::entangle_ancilla(attack);
    CHECK(std::abs(dec.branch_components[0][0] - qcore::Amplitude(1.0, 0.0)) <= 1e-12);
    CHECK(std::abs(dec.branch_components[1][1] - qcore::Amplitude(1.0, 0.0)) <= 1e-12);
    double diff = 0.0;
    for (int a = 0; a < 2; ++a)
        diff = std::max(diff,
                        std::abs(dec.branch_components[0][a] - dec.branch_components[1][a]));
    CHECK(diff > 0.9);
}

TEST_CASE("malformed probe parameters are rejected") {
    threat::EntangleAncilla bad = threat::z_probe_attack(0.5);
    bad.unitary[0] = qcore::Amplitude(2.0, 0.0);
    CHECK_THROWS_AS(threat::entangle_ancilla(bad), std::invalid_argument);

    threat::EntangleAncilla unnormalized = threat::z_probe_attack(0.5);
    unnormalized.ancilla_init = {qcore::Amplitude(1.0, 0.0), qcore::Amplitude(1.0, 0.0)};
    CHECK_THROWS_AS(threat::entangle_ancilla(unnormalized), std::invalid_argument);

    CHECK_THROWS_AS(threat::z_probe_attack(1.5), std::invalid_argument);
}

TEST_CASE("public messages say nothing about Bob's key bit") {
    CHECK(threat::bob_bit_public_entropy(threat::NoEve{}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(threat::bob_bit_public_entropy(threat::InterceptResend{}) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(threat::bob_bit_public_entropy(threat::EveStrategy{threat::z_probe_attack(0.7)}) ==
          doctest::Approx(1.0).epsilon(1e-12));
}
