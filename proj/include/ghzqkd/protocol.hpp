// The key-distribution session: Alice holds P1 and P3 of each triplet, Bob
// receives P2 through the adversarial channel. Steps: both measure their
// particles in random X/Y bases, Bob announces bases (and losses), Alice
// measures P3 in the basis forced by the other two, a revealed random subset
// is checked against the correlation law, surviving rounds are mapped to bits,
// and classical post-processing distills the final key.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ghzqkd/ghzcorr.hpp"
#include "ghzqkd/threat.hpp"
#include "ghzqkd/transcript.hpp"

namespace ghzqkd::protocol {

class ProtocolOrderError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class BitConvention : std::uint8_t { PlusIsZero };

// The agreed mapping |x+>,|y+> -> 0 and |x->,|y-> -> 1.
inline int bit_value(Outcome o, BitConvention = BitConvention::PlusIsZero) {
    return o == Outcome::Plus ? 0 : 1;
}

struct SessionConfig {
    std::uint32_t n_rounds = 1000;
    double test_fraction = 0.2;
    double qber_abort_threshold = 0.11;
    BitConvention convention = BitConvention::PlusIsZero;
    std::uint64_t seed = 1;
    threat::ChannelConfig channel;
    threat::EveStrategy eve = threat::NoEve{};
    // Step-7 knobs.
    double qber_sample_fraction = 0.1;
    std::uint32_t recon_passes = 4;
    std::uint32_t recon_verify_rounds = 20;
    std::uint32_t safety_margin = 30;

    void validate() const;  // throws std::invalid_argument naming the field
};

struct RawKeyPair {
    postproc::BitVec alice_bits;
    postproc::BitVec bob_bits;
    std::vector<std::uint32_t> kept_rounds;
};

struct SessionStats {
    std::uint32_t rounds = 0;
    std::uint32_t lost = 0;
    std::uint32_t delivered = 0;
    std::uint32_t tested = 0;
    std::uint32_t violations = 0;
    bool accepted = false;
    std::uint32_t kept = 0;  // raw key bits (= delivered - tested when accepted)
    std::uint32_t qber_sampled = 0;
    std::uint32_t qber_mismatches = 0;
    double qber_estimate = 0.0;
    std::uint32_t reconciled_len = 0;
    std::uint64_t leaked_bits = 0;
    bool recon_verified = true;
    std::uint32_t final_len = 0;
    postproc::BitVec final_alice;
    postproc::BitVec final_bob;
};

struct SessionResult {
    Transcript transcript;
    RawKeyPair raw_keys;
    SessionStats stats;
};

// Step-level operations, exposed for direct testing. Each consumes draws from
// the given stream only.
std::pair<Basis, Outcome> alice_measure_p1(qcore::StateVector& state, Rng& rng);
std::pair<Basis, Outcome> bob_measure_p2(qcore::StateVector& state, Rng& rng);
std::vector<std::uint32_t> select_test_subset(const std::vector<std::uint32_t>& delivered_rounds,
                                              double test_fraction, Rng& rng);
RawKeyPair map_to_bits(const std::vector<Round>& rounds, BitConvention convention);

// A session as a causally-ordered state machine. Methods must be called in
// protocol order; violating the order throws ProtocolOrderError.
class Session {
public:
    explicit Session(const SessionConfig& cfg);

    void run_quantum_phase();                   // steps 1-2 plus channel and Eve
    void exchange_announcements();              // step 3
    void alice_measure_p3(std::uint32_t round); // step 4, single round
    void measure_all_p3();                      // step 4, all delivered rounds
    TestVerdict run_correlation_test();         // step 5
    RawKeyPair sift();                          // step 6
    SessionResult finish();                     // step 7; consumes the session

    const Transcript& transcript() const { return transcript_; }

private:
    SessionConfig cfg_;
    Transcript transcript_;
    std::vector<qcore::StateVector> states_;
    std::vector<bool> announced_;
    qcore::StateVector round_template_;
    Rng alice_rng_, bob_rng_, channel_rng_, eve_rng_, post_rng_;
    bool quantum_done_ = false, announce_done_ = false, p3_done_ = false, test_done_ = false;
    TestVerdict verdict_{};
    RawKeyPair raw_keys_;
    bool sifted_ = false;
};

SessionResult run_session(const SessionConfig& cfg);

}  // namespace ghzqkd::protocol
