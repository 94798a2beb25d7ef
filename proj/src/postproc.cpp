#include "ghzqkd/postproc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ghzqkd::postproc {

namespace {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t s = base ^ (salt * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

std::uint8_t range_parity(const BitVec& key, const std::vector<std::uint32_t>& order,
                          std::size_t lo, std::size_t hi) {
    std::uint8_t p = 0;
    for (std::size_t i = lo; i < hi; ++i) p ^= key[order[i]];
    return p;
}

// Binary-search one differing bit inside order[lo..hi); flips it in key_b.
void bisect_and_fix(const BitVec& key_a, BitVec& key_b, const std::vector<std::uint32_t>& order,
                    std::size_t lo, std::size_t hi, std::uint32_t phase, ReconResult& result) {
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        const std::uint8_t pa = range_parity(key_a, order, lo, mid);
        const std::uint8_t pb = range_parity(key_b, order, lo, mid);
        const std::uint8_t mm = pa != pb;
        result.parity_log.push_back(ParityExchange{ParityScope::Bisect, phase,
                                                   static_cast<std::uint32_t>(lo),
                                                   static_cast<std::uint32_t>(mid), pa, mm});
        ++result.parity_bits;
        if (mm)
            hi = mid;
        else
            lo = mid;
    }
    key_b[order[lo]] ^= 1u;
    ++result.corrections;
}

}  // namespace

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

std::uint64_t key_hash(const BitVec& bits, std::uint64_t seed) {
    // FNV-1a over the packed bit string, keyed by the seed.
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    std::uint64_t word = 0;
    int fill = 0;
    auto absorb = [&](std::uint64_t byte) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    };
    for (std::size_t i = 0; i < bits.size(); ++i) {
        word |= static_cast<std::uint64_t>(bits[i] & 1u) << fill;
        if (++fill == 8) {
            absorb(word);
            word = 0;
            fill = 0;
        }
    }
    if (fill > 0) absorb(word);
    absorb(bits.size());
    return h;
}

QberEstimate estimate_qber(BitVec& key_a, BitVec& key_b, double sample_fraction, Rng& rng) {
    if (key_a.size() != key_b.size()) throw std::invalid_argument("key length mismatch");
    if (key_a.empty()) throw std::invalid_argument("cannot estimate QBER of empty keys");
    if (sample_fraction < 0.0 || sample_fraction > 1.0)
        throw std::invalid_argument("sample fraction must lie in [0, 1]");

    const std::size_t n = key_a.size();
    auto k = static_cast<std::size_t>(std::llround(sample_fraction * static_cast<double>(n)));
    k = std::min(k, n);

    std::vector<std::uint32_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0u);
    // Partial Fisher-Yates: the first k entries become the sample.
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(n - i));
        std::swap(indices[i], indices[j]);
    }
    QberEstimate est;
    est.sacrificed.assign(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(est.sacrificed.begin(), est.sacrificed.end());
    est.sampled = static_cast<std::uint32_t>(k);
    for (auto pos : est.sacrificed)
        if (key_a[pos] != key_b[pos]) ++est.mismatches;
    est.qber = k == 0 ? 0.0 : static_cast<double>(est.mismatches) / static_cast<double>(k);

    auto strip = [&](BitVec& key) {
        BitVec out;
        out.reserve(n - k);
        std::size_t next = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (next < est.sacrificed.size() && est.sacrificed[next] == i) {
                ++next;
                continue;
            }
            out.push_back(key[i]);
        }
        key = std::move(out);
    };
    strip(key_a);
    strip(key_b);
    return est;
}

std::uint32_t initial_block_size(double qber_estimate) {
    const double q = std::max(qber_estimate, 0.01);
    return static_cast<std::uint32_t>(std::ceil(0.73 / q));
}

ReconResult reconcile(const BitVec& key_a, BitVec key_b, const ReconParams& params) {
    if (key_a.size() != key_b.size()) throw std::invalid_argument("key length mismatch");
    ReconResult result;
    const std::size_t n = key_a.size();
    if (n == 0) {
        result.verified = true;
        return result;
    }
    if (params.n_passes == 0) throw std::invalid_argument("at least one pass required");

    std::uint64_t block = initial_block_size(params.qber_estimate);
    for (std::uint32_t pass = 0; pass < params.n_passes; ++pass, block *= 2) {
        const std::size_t k = static_cast<std::size_t>(std::min<std::uint64_t>(block, n));
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        Rng pass_rng(mix_seed(params.shuffle_seed, pass + 1));
        pass_rng.shuffle(order);

        for (std::size_t lo = 0; lo < n; lo += k) {
            const std::size_t hi = std::min(lo + k, n);
            const std::uint8_t pa = range_parity(key_a, order, lo, hi);
            const std::uint8_t pb = range_parity(key_b, order, lo, hi);
            const std::uint8_t mm = pa != pb;
            result.parity_log.push_back(ParityExchange{ParityScope::Block, pass,
                                                       static_cast<std::uint32_t>(lo),
                                                       static_cast<std::uint32_t>(hi), pa, mm});
            ++result.parity_bits;
            if (mm) bisect_and_fix(key_a, key_b, order, lo, hi, pass, result);
        }
    }

    // Clean runs disclose nothing further. Runs that corrected anything verify
    // with a disclosed hash and, while it disagrees, repair via random-subset
    // parities.
    if (result.corrections > 0) {
        const std::uint64_t hash_seed = mix_seed(params.shuffle_seed, 0x68617368ULL);
        const std::uint64_t hash_a = key_hash(key_a, hash_seed);
        std::uint64_t hash_b = key_hash(key_b, hash_seed);
        result.hash_log.push_back(HashExchange{hash_a, hash_a == hash_b});
        result.hash_bits += 64;

        std::uint32_t clean_streak = 0;
        for (std::uint32_t round = 0;
             hash_a != hash_b && round < params.max_subset_rounds; ++round) {
            Rng subset_rng(mix_seed(params.shuffle_seed, 0x73756273ULL + round));
            std::vector<std::uint32_t> subset;
            subset.reserve(n / 2);
            for (std::size_t i = 0; i < n; ++i)
                if (subset_rng.next_u64() & 1u) subset.push_back(static_cast<std::uint32_t>(i));
            if (subset.empty()) continue;

            const std::uint32_t phase = params.n_passes + round;
            const std::uint8_t pa = range_parity(key_a, subset, 0, subset.size());
            const std::uint8_t pb = range_parity(key_b, subset, 0, subset.size());
            const std::uint8_t mm = pa != pb;
            result.parity_log.push_back(
                ParityExchange{ParityScope::Subset, phase, 0,
                               static_cast<std::uint32_t>(subset.size()), pa, mm});
            ++result.parity_bits;
            if (mm) {
                bisect_and_fix(key_a, key_b, subset, 0, subset.size(), phase, result);
                clean_streak = 0;
            } else if (++clean_streak >= params.verify_rounds) {
                hash_b = key_hash(key_b, hash_seed);
                result.hash_log.push_back(HashExchange{hash_a, hash_a == hash_b});
                result.hash_bits += 64;
                clean_streak = 0;
            }
        }
        result.verified = hash_a == hash_b;
    }

    result.leaked_bits = std::min<std::uint64_t>(result.parity_bits + result.hash_bits,
                                                 static_cast<std::uint64_t>(n));
    result.corrected = std::move(key_b);
    return result;
}

std::uint32_t pa_output_length(std::uint32_t n, double qber, std::uint64_t leaked_bits,
                               std::uint32_t safety_margin) {
    const double secure = static_cast<double>(n) * (1.0 - binary_entropy(qber)) -
                          static_cast<double>(leaked_bits) -
                          static_cast<double>(safety_margin);
    if (secure <= 0.0) return 0;
    return std::min(n, static_cast<std::uint32_t>(std::floor(secure)));
}

std::uint8_t toeplitz_stream_bit(std::uint64_t seed, std::uint64_t index) {
    // Word k of the stream is the k-th splitmix64 output; bits are taken LSB first.
    std::uint64_t s = seed;
    std::uint64_t word = 0;
    for (std::uint64_t k = 0; k <= index / 64; ++k) word = splitmix64(s);
    return static_cast<std::uint8_t>((word >> (index % 64)) & 1u);
}

FinalKey privacy_amplify(const BitVec& key, const HashSpec& spec) {
    const std::size_t n = key.size();
    if (spec.out_len > n) throw std::invalid_argument("output longer than input key");
    FinalKey out;
    out.provenance.corrected = static_cast<std::uint32_t>(n);
    out.provenance.final_len = spec.out_len;
    if (spec.out_len == 0) return out;

    // T[i][j] = t[i + n-1 - j]; with q = n-1-j the row is the stream window
    // t[i .. i+n-1] against the reversed key, which packs into word operations.
    const std::size_t stream_bits = n + spec.out_len - 1;
    const std::size_t stream_words = (stream_bits + 63) / 64 + 1;
    std::vector<std::uint64_t> stream(stream_words, 0);
    std::uint64_t s = spec.seed;
    for (auto& w : stream) w = splitmix64(s);

    const std::size_t key_words = (n + 63) / 64;
    std::vector<std::uint64_t> rkey(key_words, 0);
    for (std::size_t q = 0; q < n; ++q)
        if (key[n - 1 - q]) rkey[q / 64] |= std::uint64_t{1} << (q % 64);
    // Mask tail bits beyond n so stray stream bits cannot contribute.
    // (rkey already has zeros there; the AND below keeps it that way.)

    out.bits.resize(spec.out_len);
    for (std::size_t i = 0; i < spec.out_len; ++i) {
        std::uint64_t acc = 0;
        const std::size_t base = i / 64;
        const unsigned shift = static_cast<unsigned>(i % 64);
        for (std::size_t w = 0; w < key_words; ++w) {
            std::uint64_t window = stream[base + w] >> shift;
            if (shift != 0) window |= stream[base + w + 1] << (64 - shift);
            acc ^= window & rkey[w];
        }
        out.bits[i] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
    }
    return out;
}

}  // namespace ghzqkd::postproc
