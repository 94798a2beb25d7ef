// Channel imperfections and eavesdropping strategies, plus the exact
// information/disturbance analysis of what an eavesdropper learns. The
// analysis enumerates measurement branches algebraically (4-qubit worst case)
// rather than sampling, so reported rates and Holevo bounds carry no
// Monte-Carlo noise.

#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "ghzqkd/qcore.hpp"

namespace ghzqkd::threat {

using qcore::Amplitude;
using qcore::Basis;
using qcore::Outcome;
using qcore::StateVector;

struct ChannelConfig {
    double loss_prob = 0.0;
    double depolarize_prob = 0.0;
};

struct NoEve {};

// Measure the in-flight qubit in a random basis and forward the matching
// eigenstate. prob_x is the chance of picking X over Y.
struct InterceptResend {
    double prob_x = 0.5;
};

// Entangle a one-qubit probe with the in-flight qubit via a fixed unitary.
struct EntangleAncilla {
    std::vector<Amplitude> unitary;          // 4x4 row-major over bit(P2) + 2*bit(ancilla)
    std::array<Amplitude, 2> ancilla_init;   // |A>
    double strength = 1.0;                   // family parameter, kept for reporting
};

using EveStrategy = std::variant<NoEve, InterceptResend, EntangleAncilla>;

// Family interpolating the identity (strength 0) to a probe that records the
// transmitted qubit's z-value exactly (strength 1).
EntangleAncilla z_probe_attack(double strength);

struct AttackReport {
    double detection_rate_per_tested_round = 0.0;
    double qber_on_key = 0.0;
    double eve_bob_mutual_information = 0.0;    // bits per sifted bit
    double eve_alice_mutual_information = 0.0;  // bits per sifted bit
};

// Loss then depolarization on P2. Returns false when the qubit is lost.
// Consumes a fixed number of draws per call regardless of configuration.
bool transmit_p2(StateVector& session_state, const ChannelConfig& cfg, Rng& rng);

struct EveRecord {
    Basis basis;
    Outcome outcome;
};

// Eve measures P2 and the state collapses accordingly; the collapsed P2 *is*
// the particle she forwards.
EveRecord intercept_resend(StateVector& session_state, const InterceptResend& strategy, Rng& rng);

struct AncillaDecomposition {
    StateVector state;  // U applied to (triplet tensor |A>), 4 qubits
    // Probe components attached to the four parity-consistent x-basis branches
    // (x+,x+|x+), (x-,x-|x+), (x+,x-|x-), (x-,x+|x-), scaled so the identity
    // attack reproduces |A> in each slot.
    std::array<std::array<Amplitude, 2>, 4> branch_components;
    // Components on the parity-violating branches; nonzero weight here is what
    // the correlation test detects.
    std::array<std::array<Amplitude, 2>, 4> violating_components;
};

AncillaDecomposition entangle_ancilla(const EntangleAncilla& params);

// Exact per-round analysis of a strategy: detection and key-error rates, and
// Holevo/mutual-information bounds on Eve's knowledge of either party's bit.
AttackReport eve_information(const EveStrategy& strategy);

// Holevo bound on what the probe stores about the transmitted qubit's z-value
// (EntangleAncilla only; 0 for the other strategies).
double eve_z_information(const EveStrategy& strategy);

// Exact entropy in bits of Bob's key bit conditioned on everything public
// about a kept round (his announced basis). 1.0 means the public transcript
// says nothing about the bit.
double bob_bit_public_entropy(const EveStrategy& strategy);

}  // namespace ghzqkd::threat
