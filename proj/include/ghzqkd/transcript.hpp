// Classical messages exchanged during a session and their stable line-based
// log format (one message per line). Bob announces bases, losses and test
// reveals; Alice sends the verdict and drives post-processing. Alice's key
// basis and non-test outcomes never appear in any message.

#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ghzqkd/postproc.hpp"
#include "ghzqkd/qcore.hpp"

namespace ghzqkd::protocol {

using qcore::Basis;
using qcore::Outcome;

enum class Party : std::uint8_t { Alice, Bob };

struct LossReport {
    std::vector<std::uint32_t> rounds;
};

struct BasisAnnounce {
    std::uint32_t round;
    Basis basis;
};

struct TestReveal {
    std::uint32_t round;
    Basis basis;
    Outcome outcome;
};

struct TestVerdict {
    bool accept;
    std::uint32_t violations;
    std::uint32_t tested;
};

// Alice's half of the QBER sample: raw-key positions and her bits there.
struct QberSample {
    std::vector<std::uint32_t> positions;
    postproc::BitVec bits;
};

struct QberReply {
    postproc::BitVec bits;
};

struct ReconBegin {
    std::uint64_t shuffle_seed;
    std::uint32_t n_passes;
    std::uint32_t initial_block;
};

struct ReconParityMsg {
    postproc::ParityExchange exchange;
};

struct HashCompareMsg {
    std::uint64_t hash;
    bool match;
};

struct PaSpecMsg {
    std::uint64_t seed;
    std::uint32_t input_len;
    std::uint32_t qber_mismatches;
    std::uint32_t qber_sampled;
    std::uint64_t leaked_bits;
    std::uint32_t safety_margin;
    std::uint32_t out_len;
};

using MessageBody = std::variant<LossReport, BasisAnnounce, TestReveal, TestVerdict, QberSample,
                                 QberReply, ReconBegin, ReconParityMsg, HashCompareMsg, PaSpecMsg>;

struct Message {
    Party from;
    MessageBody body;
};

// Per-round private records of both parties. Never serialized into the log.
struct Round {
    std::uint32_t index = 0;
    Basis alice_b1 = Basis::X;
    Outcome alice_o1 = Outcome::Plus;
    bool lost = false;
    Basis bob_b2 = Basis::X;       // valid when not lost
    Outcome bob_o2 = Outcome::Plus;
    bool p3_measured = false;
    Basis alice_b3 = Basis::X;     // valid once measured
    Outcome alice_o3 = Outcome::Plus;
    Outcome inferred_o2 = Outcome::Plus;  // Alice's step-6 inference
    bool tested = false;
    bool consistent = true;        // meaningful when tested
};

struct Transcript {
    std::uint32_t session_index = 0;
    std::uint64_t seed = 0;
    std::uint32_t n_rounds = 0;
    std::vector<Message> messages;
    std::vector<Round> rounds;  // private; excluded from serialization
};

// One line per message: "<A|B> <tag> k=v ...". Integers only, so logs are
// byte-stable across platforms.
std::string message_line(const Message& message);
Message parse_message_line(const std::string& line);

std::string serialize_session_messages(const Transcript& transcript);

}  // namespace ghzqkd::protocol
