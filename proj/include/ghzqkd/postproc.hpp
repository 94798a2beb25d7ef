// Classical key distillation: QBER estimation on sacrificed bits, interactive
// parity-bisection reconciliation with counted leakage, and Toeplitz-hash
// privacy amplification.

#pragma once

#include <cstdint>
#include <vector>

#include "ghzqkd/rng.hpp"

namespace ghzqkd::postproc {

using BitVec = std::vector<std::uint8_t>;  // one bit per element, values 0/1

double binary_entropy(double p);

// Seeded 64-bit hash of a bit string; used for residual-mismatch detection.
std::uint64_t key_hash(const BitVec& bits, std::uint64_t seed);

struct QberEstimate {
    double qber = 0.0;
    std::vector<std::uint32_t> sacrificed;  // ascending positions in the original keys
    std::uint32_t sampled = 0;
    std::uint32_t mismatches = 0;
};

// Compares a random sample of positions and removes them from both keys.
QberEstimate estimate_qber(BitVec& key_a, BitVec& key_b, double sample_fraction, Rng& rng);

// ceil(0.73 / max(qber, 0.01)), the usual starting block for parity bisection.
std::uint32_t initial_block_size(double qber_estimate);

struct ReconParams {
    std::uint32_t n_passes = 4;
    double qber_estimate = 0.0;       // drives the initial block size
    std::uint64_t shuffle_seed = 0;   // public; per-pass permutation seeds derive from it
    std::uint32_t verify_rounds = 20; // consecutive clean subset parities before re-hashing
    std::uint32_t max_subset_rounds = 4096;
};

enum class ParityScope : std::uint8_t { Block, Bisect, Subset };

// One disclosed parity plus the partner's (public) match response.
struct ParityExchange {
    ParityScope scope;
    std::uint32_t phase;  // pass number, or subset round for the verification stage
    std::uint32_t lo, hi; // range into the phase's permutation / subset order
    std::uint8_t parity;
    std::uint8_t mismatch;
};

struct HashExchange {
    std::uint64_t hash;
    bool match;
};

struct ReconResult {
    BitVec corrected;                 // Bob's key after correction
    std::uint64_t leaked_bits = 0;    // parity + hash bits, capped at the key length
    std::uint64_t parity_bits = 0;
    std::uint64_t hash_bits = 0;
    std::uint32_t corrections = 0;
    bool verified = true;             // final hash agreement (clean runs skip the hash)
    std::vector<ParityExchange> parity_log;
    std::vector<HashExchange> hash_log;
};

// Block-parity passes with doubling block sizes and per-pass shuffles; each
// mismatched block is binary-searched and one differing bit flipped. Runs that
// saw any mismatch end with a disclosed-hash comparison and, if needed, a
// random-subset repair stage. key_a is the reference; the corrected copy of
// key_b is returned.
ReconResult reconcile(const BitVec& key_a, BitVec key_b, const ReconParams& params);

struct HashSpec {
    std::uint64_t seed = 0;
    std::uint32_t out_len = 0;
};

// max(0, floor(n*(1 - h2(qber)) - leaked - safety_margin)), clamped to [0, n].
std::uint32_t pa_output_length(std::uint32_t n, double qber, std::uint64_t leaked_bits,
                               std::uint32_t safety_margin);

struct KeyProvenance {
    std::uint32_t raw = 0;        // sifted key bits entering step 7
    std::uint32_t tested = 0;     // rounds revealed for the correlation test
    std::uint32_t sacrificed = 0; // bits disclosed for the QBER estimate
    std::uint32_t corrected = 0;  // key length entering privacy amplification
    std::uint64_t leaked = 0;     // reconciliation disclosure, in bits
    std::uint32_t final_len = 0;
};

struct FinalKey {
    BitVec bits;
    KeyProvenance provenance;  // raw/corrected/final set here; caller adds context
};

// Output bit i is the parity of (key AND row i) for the seed-expanded Toeplitz
// matrix T[i][j] = t[i + n-1 - j]. Identical inputs and seed give identical
// output on both sides.
FinalKey privacy_amplify(const BitVec& key, const HashSpec& spec);

// The seed-expanded diagonal bit stream backing the Toeplitz matrix, exposed
// so independent implementations can reproduce the same matrix.
std::uint8_t toeplitz_stream_bit(std::uint64_t seed, std::uint64_t index);

}  // namespace ghzqkd::postproc
