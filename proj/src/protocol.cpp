#include "ghzqkd/protocol.hpp"

#include <algorithm>

namespace ghzqkd::protocol {

namespace {

using ghzcorr::check_consistency;
using ghzcorr::infer_partner_outcome;
using ghzcorr::third_basis;
using qcore::kP1;
using qcore::kP2;
using qcore::kP3;
using qcore::StateVector;

std::uint64_t derive_stream(std::uint64_t& chain) { return splitmix64(chain); }

std::pair<Basis, Outcome> random_xy_measure(StateVector& state, int qubit, Rng& rng) {
    const Basis basis = (rng.next_u64() & 1u) ? Basis::Y : Basis::X;
    const Outcome outcome = qcore::measure_in_place(state, qubit, basis, rng);
    return {basis, outcome};
}

}  // namespace

void SessionConfig::validate() const {
    if (n_rounds < 1) throw std::invalid_argument("session.n_rounds must be >= 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("session.test_fraction must lie in (0, 1)");
    if (test_fraction * static_cast<double>(n_rounds) < 1.0)
        throw std::invalid_argument(
            "session.test_fraction * session.n_rounds must be >= 1 expected tested round");
    if (qber_abort_threshold < 0.0 || qber_abort_threshold > 1.0)
        throw std::invalid_argument("session.qber_abort_threshold must lie in [0, 1]");
    if (channel.loss_prob < 0.0 || channel.loss_prob > 1.0)
        throw std::invalid_argument("channel.loss_prob must lie in [0, 1]");
    if (channel.depolarize_prob < 0.0 || channel.depolarize_prob > 1.0)
        throw std::invalid_argument("channel.depolarize_prob must lie in [0, 1]");
    if (qber_sample_fraction < 0.0 || qber_sample_fraction >= 1.0)
        throw std::invalid_argument("postproc.qber_sample_fraction must lie in [0, 1)");
    if (recon_passes < 1) throw std::invalid_argument("postproc.n_passes must be >= 1");
    if (const auto* ir = std::get_if<threat::InterceptResend>(&eve)) {
        if (ir->prob_x < 0.0 || ir->prob_x > 1.0)
            throw std::invalid_argument("eve.prob_x must lie in [0, 1]");
    }
}

std::pair<Basis, Outcome> alice_measure_p1(StateVector& state, Rng& rng) {
    return random_xy_measure(state, kP1, rng);
}

std::pair<Basis, Outcome> bob_measure_p2(StateVector& state, Rng& rng) {
    return random_xy_measure(state, kP2, rng);
}

std::vector<std::uint32_t> select_test_subset(const std::vector<std::uint32_t>& delivered_rounds,
                                              double test_fraction, Rng& rng) {
    std::vector<std::uint32_t> subset;
    for (auto r : delivered_rounds)
        if (rng.bernoulli(test_fraction)) subset.push_back(r);
    return subset;
}

RawKeyPair map_to_bits(const std::vector<Round>& rounds, BitConvention convention) {
    RawKeyPair keys;
    for (const auto& rec : rounds) {
        if (rec.lost || rec.tested) continue;
        keys.kept_rounds.push_back(rec.index);
        keys.bob_bits.push_back(static_cast<std::uint8_t>(bit_value(rec.bob_o2, convention)));
        keys.alice_bits.push_back(
            static_cast<std::uint8_t>(bit_value(rec.inferred_o2, convention)));
    }
    return keys;
}

Session::Session(const SessionConfig& cfg)
    : cfg_(cfg),
      round_template_(qcore::cat_state(3, Outcome::Plus)),
      alice_rng_(0),
      bob_rng_(0),
      channel_rng_(0),
      eve_rng_(0),
      post_rng_(0) {
    cfg_.validate();
    std::uint64_t chain = cfg_.seed;
    alice_rng_ = Rng(derive_stream(chain));
    bob_rng_ = Rng(derive_stream(chain));
    channel_rng_ = Rng(derive_stream(chain));
    eve_rng_ = Rng(derive_stream(chain));
    post_rng_ = Rng(derive_stream(chain));

    transcript_.seed = cfg_.seed;
    transcript_.n_rounds = cfg_.n_rounds;
    transcript_.rounds.resize(cfg_.n_rounds);
    states_.resize(cfg_.n_rounds);
    announced_.assign(cfg_.n_rounds, false);

    if (const auto* ea = std::get_if<threat::EntangleAncilla>(&cfg_.eve))
        round_template_ = threat::entangle_ancilla(*ea).state;
}

void Session::run_quantum_phase() {
    if (quantum_done_) throw ProtocolOrderError("quantum phase already ran");
    const auto* intercept = std::get_if<threat::InterceptResend>(&cfg_.eve);
    for (std::uint32_t r = 0; r < cfg_.n_rounds; ++r) {
        Round& rec = transcript_.rounds[r];
        rec.index = r;
        StateVector state = round_template_;

        if (intercept != nullptr) threat::intercept_resend(state, *intercept, eve_rng_);
        const bool delivered = threat::transmit_p2(state, cfg_.channel, channel_rng_);
        rec.lost = !delivered;

        std::tie(rec.alice_b1, rec.alice_o1) = alice_measure_p1(state, alice_rng_);
        if (delivered) std::tie(rec.bob_b2, rec.bob_o2) = bob_measure_p2(state, bob_rng_);

        states_[r] = std::move(state);
    }
    quantum_done_ = true;
}

void Session::exchange_announcements() {
    if (!quantum_done_) throw ProtocolOrderError("announcements before measurements");
    if (announce_done_) throw ProtocolOrderError("announcements already exchanged");
    LossReport loss;
    for (const auto& rec : transcript_.rounds)
        if (rec.lost) loss.rounds.push_back(rec.index);
    transcript_.messages.push_back(Message{Party::Bob, std::move(loss)});
    for (const auto& rec : transcript_.rounds) {
        if (rec.lost) continue;
        transcript_.messages.push_back(Message{Party::Bob, BasisAnnounce{rec.index, rec.bob_b2}});
        announced_[rec.index] = true;
    }
    announce_done_ = true;
}

void Session::alice_measure_p3(std::uint32_t round) {
    if (round >= cfg_.n_rounds) throw std::out_of_range("round index out of range");
    if (!announced_[round])
        throw ProtocolOrderError("P3 basis depends on Bob's announcement for the round");
    Round& rec = transcript_.rounds[round];
    if (rec.p3_measured) throw ProtocolOrderError("P3 already measured for the round");
    rec.alice_b3 = third_basis(rec.alice_b1, rec.bob_b2);
    rec.alice_o3 = qcore::measure_in_place(states_[round], kP3, rec.alice_b3, alice_rng_);
    rec.p3_measured = true;
}

void Session::measure_all_p3() {
    if (!announce_done_) throw ProtocolOrderError("P3 measurements before announcements");
    for (const auto& rec : transcript_.rounds)
        if (!rec.lost) alice_measure_p3(rec.index);
    p3_done_ = true;
}

TestVerdict Session::run_correlation_test() {
    if (!p3_done_) throw ProtocolOrderError("correlation test before P3 measurements");
    if (test_done_) throw ProtocolOrderError("correlation test already ran");

    std::vector<std::uint32_t> delivered;
    for (const auto& rec : transcript_.rounds)
        if (!rec.lost) delivered.push_back(rec.index);
    const auto subset = select_test_subset(delivered, cfg_.test_fraction, bob_rng_);

    std::uint32_t violations = 0;
    for (auto r : subset) {
        Round& rec = transcript_.rounds[r];
        rec.tested = true;
        transcript_.messages.push_back(
            Message{Party::Bob, TestReveal{rec.index, rec.bob_b2, rec.bob_o2}});
        rec.consistent = check_consistency(rec.alice_b1, rec.alice_o1, rec.bob_b2, rec.bob_o2,
                                           rec.alice_b3, rec.alice_o3);
        if (!rec.consistent) ++violations;
    }
    const auto tested = static_cast<std::uint32_t>(subset.size());
    const double rate = tested == 0 ? 0.0 : static_cast<double>(violations) / tested;
    verdict_ = TestVerdict{rate <= cfg_.qber_abort_threshold, violations, tested};
    transcript_.messages.push_back(Message{Party::Alice, verdict_});
    test_done_ = true;
    return verdict_;
}

RawKeyPair Session::sift() {
    if (!test_done_) throw ProtocolOrderError("sifting before the correlation test");
    if (sifted_) throw ProtocolOrderError("already sifted");
    if (verdict_.accept) {
        for (auto& rec : transcript_.rounds) {
            if (rec.lost || rec.tested) continue;
            rec.inferred_o2 = infer_partner_outcome(rec.alice_b1, rec.alice_o1, rec.alice_b3,
                                                    rec.alice_o3, rec.bob_b2);
        }
        raw_keys_ = map_to_bits(transcript_.rounds, cfg_.convention);
    }
    sifted_ = true;
    return raw_keys_;
}

SessionResult Session::finish() {
    if (!sifted_) throw ProtocolOrderError("finish before sifting");

    SessionStats stats;
    stats.rounds = cfg_.n_rounds;
    for (const auto& rec : transcript_.rounds)
        if (rec.lost) ++stats.lost;
    stats.delivered = stats.rounds - stats.lost;
    stats.tested = verdict_.tested;
    stats.violations = verdict_.violations;
    stats.accepted = verdict_.accept;
    stats.kept = static_cast<std::uint32_t>(raw_keys_.alice_bits.size());

    if (stats.accepted && stats.kept > 0) {
        postproc::BitVec key_a = raw_keys_.alice_bits;
        postproc::BitVec key_b = raw_keys_.bob_bits;

        postproc::QberEstimate est;
        if (cfg_.qber_sample_fraction > 0.0) {
            est = postproc::estimate_qber(key_a, key_b, cfg_.qber_sample_fraction, post_rng_);
            QberSample sample;
            QberReply reply;
            sample.positions = est.sacrificed;
            for (auto pos : est.sacrificed) {
                sample.bits.push_back(raw_keys_.alice_bits[pos]);
                reply.bits.push_back(raw_keys_.bob_bits[pos]);
            }
            transcript_.messages.push_back(Message{Party::Alice, std::move(sample)});
            transcript_.messages.push_back(Message{Party::Bob, std::move(reply)});
        }
        stats.qber_sampled = est.sampled;
        stats.qber_mismatches = est.mismatches;
        stats.qber_estimate = est.qber;
        stats.reconciled_len = static_cast<std::uint32_t>(key_a.size());

        postproc::ReconParams recon_params;
        recon_params.n_passes = cfg_.recon_passes;
        recon_params.qber_estimate = est.qber;
        recon_params.shuffle_seed = post_rng_.next_u64();
        recon_params.verify_rounds = cfg_.recon_verify_rounds;
        transcript_.messages.push_back(Message{
            Party::Alice, ReconBegin{recon_params.shuffle_seed, recon_params.n_passes,
                                     postproc::initial_block_size(est.qber)}});
        auto recon = postproc::reconcile(key_a, std::move(key_b), recon_params);
        for (const auto& exchange : recon.parity_log)
            transcript_.messages.push_back(Message{Party::Alice, ReconParityMsg{exchange}});
        for (const auto& hash : recon.hash_log)
            transcript_.messages.push_back(
                Message{Party::Alice, HashCompareMsg{hash.hash, hash.match}});
        stats.leaked_bits = recon.leaked_bits;
        stats.recon_verified = recon.verified;

        postproc::HashSpec spec;
        spec.seed = post_rng_.next_u64();
        // A failed verification yields no key rather than a mismatched one.
        spec.out_len = recon.verified
                           ? postproc::pa_output_length(
                                 static_cast<std::uint32_t>(key_a.size()), est.qber,
                                 recon.leaked_bits, cfg_.safety_margin)
                           : 0;
        transcript_.messages.push_back(Message{
            Party::Alice,
            PaSpecMsg{spec.seed, static_cast<std::uint32_t>(key_a.size()), est.mismatches,
                      est.sampled, recon.leaked_bits, cfg_.safety_margin, spec.out_len}});

        auto final_a = postproc::privacy_amplify(key_a, spec);
        auto final_b = postproc::privacy_amplify(recon.corrected, spec);
        final_a.provenance.raw = stats.kept;
        final_a.provenance.tested = stats.tested;
        final_a.provenance.sacrificed = est.sampled;
        final_a.provenance.leaked = recon.leaked_bits;
        if (final_a.provenance.raw != final_a.provenance.sacrificed +
                                          final_a.provenance.corrected ||
            final_a.provenance.final_len != final_a.bits.size())
            throw std::logic_error("key provenance accounting is inconsistent");
        stats.final_len = spec.out_len;
        stats.final_alice = std::move(final_a.bits);
        stats.final_bob = std::move(final_b.bits);
    }

    SessionResult result;
    result.transcript = std::move(transcript_);
    result.raw_keys = std::move(raw_keys_);
    result.stats = std::move(stats);
    return result;
}

SessionResult run_session(const SessionConfig& cfg) {
    Session session(cfg);
    session.run_quantum_phase();
    session.exchange_announcements();
    session.measure_all_p3();
    session.run_correlation_test();
    session.sift();
    return session.finish();
}

}  // namespace ghzqkd::protocol
