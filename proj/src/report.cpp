#include "ghzqkd/report.hpp"

#include <atomic>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace ghzqkd::report {

namespace {

using json = nlohmann::ordered_json;
using config::format_double;

constexpr const char* kTranscriptMagic = "ghzqkd-transcript v1";
constexpr const char* kJsonSchema = "ghzqkd-report-v1";
constexpr const char* kCsvMagic = "ghzqkd-report-csv,v1";

json config_echo(const CampaignConfig& cfg) {
    const auto& b = cfg.base;
    json j;
    j["sessions"] = cfg.sessions;
    j["n_rounds"] = b.n_rounds;
    j["test_fraction"] = b.test_fraction;
    j["qber_abort_threshold"] = b.qber_abort_threshold;
    j["seed"] = b.seed;
    j["bit_convention"] = "plus0";
    j["loss_prob"] = b.channel.loss_prob;
    j["depolarize_prob"] = b.channel.depolarize_prob;
    if (std::holds_alternative<threat::NoEve>(b.eve)) {
        j["eve_strategy"] = "none";
    } else if (const auto* ir = std::get_if<threat::InterceptResend>(&b.eve)) {
        j["eve_strategy"] = "intercept_resend";
        j["eve_prob_x"] = ir->prob_x;
    } else if (const auto* ea = std::get_if<threat::EntangleAncilla>(&b.eve)) {
        j["eve_strategy"] = "entangle_ancilla";
        j["eve_strength"] = ea->strength;
    }
    j["recon_passes"] = b.recon_passes;
    j["safety_margin"] = b.safety_margin;
    j["qber_sample_fraction"] = b.qber_sample_fraction;
    j["recon_verify_rounds"] = b.recon_verify_rounds;
    return j;
}

json session_json(const protocol::SessionStats& s, std::uint32_t index, std::uint64_t seed,
                  const std::string& key_hex) {
    json j;
    j["index"] = index;
    j["seed"] = seed;
    j["accepted"] = s.accepted;
    j["rounds"] = s.rounds;
    j["lost"] = s.lost;
    j["delivered"] = s.delivered;
    j["tested"] = s.tested;
    j["violations"] = s.violations;
    j["kept"] = s.kept;
    j["qber_sampled"] = s.qber_sampled;
    j["qber_mismatches"] = s.qber_mismatches;
    j["leaked_bits"] = s.leaked_bits;
    j["recon_verified"] = s.recon_verified;
    j["final_key_len"] = s.final_len;
    j["final_key_hex"] = key_hex;
    return j;
}

json efficiency_json(const EfficiencyReport& e) {
    json j;
    j["kept_qubits"] = e.kept_qubits;
    j["lost_qubits"] = e.lost_qubits;
    j["eta"] = e.eta;
    j["eta_bb84_baseline"] = e.eta_bb84_baseline;
    j["tested_count"] = e.tested_count;
    j["violations"] = e.violations;
    j["violation_rate"] = e.violation_rate;
    j["qber"] = e.qber;
    j["final_key_len"] = e.final_key_len;
    j["triplets_consumed"] = e.triplets_consumed;
    j["p2_qubits_transmitted"] = e.p2_qubits_transmitted;
    return j;
}

json attack_json(const threat::AttackReport& a) {
    json j;
    j["detection_rate_per_tested_round"] = a.detection_rate_per_tested_round;
    j["qber_on_key"] = a.qber_on_key;
    j["eve_bob_mutual_information"] = a.eve_bob_mutual_information;
    j["eve_alice_mutual_information"] = a.eve_alice_mutual_information;
    return j;
}

std::string csv_campaign_row(const CampaignResult& r) {
    const auto& e = r.efficiency;
    const auto& a = r.attack;
    std::string row;
    row += std::to_string(e.kept_qubits) + ',' + std::to_string(e.lost_qubits) + ',';
    row += format_double(e.eta) + ',' + format_double(e.eta_bb84_baseline) + ',';
    row += std::to_string(e.tested_count) + ',' + std::to_string(e.violations) + ',';
    row += format_double(e.violation_rate) + ',' + format_double(e.qber) + ',';
    row += std::to_string(e.final_key_len) + ',' + std::to_string(e.triplets_consumed) + ',';
    row += std::to_string(e.p2_qubits_transmitted) + ',' + std::to_string(r.aborted_sessions);
    row += ',' + format_double(a.detection_rate_per_tested_round);
    row += ',' + format_double(a.qber_on_key);
    row += ',' + format_double(a.eve_bob_mutual_information);
    row += ',' + format_double(a.eve_alice_mutual_information);
    return row;
}

// Counters that an independent reader can recompute from one session's
// public message block.
struct RecomputedSession {
    std::uint64_t seed = 0;
    protocol::SessionStats stats;
    std::string key_hex;  // not recomputable; carried over from the report
};

RecomputedSession recompute_session(std::uint32_t index, std::uint64_t seed,
                                    std::uint32_t n_rounds,
                                    const std::vector<protocol::Message>& messages,
                                    std::vector<std::string>& problems) {
    RecomputedSession out;
    out.seed = seed;
    auto& s = out.stats;
    s.rounds = n_rounds;

    std::uint32_t announced = 0;
    std::uint32_t reveals = 0;
    std::uint64_t parity_msgs = 0;
    std::uint64_t hash_msgs = 0;
    bool last_hash_match = true;
    bool saw_hash = false;
    postproc::BitVec qber_a, qber_b;
    const protocol::PaSpecMsg* pa = nullptr;
    const protocol::TestVerdict* verdict = nullptr;

    for (const auto& msg : messages) {
        if (const auto* m = std::get_if<protocol::LossReport>(&msg.body)) {
            s.lost = static_cast<std::uint32_t>(m->rounds.size());
        } else if (std::holds_alternative<protocol::BasisAnnounce>(msg.body)) {
            ++announced;
        } else if (std::holds_alternative<protocol::TestReveal>(msg.body)) {
            ++reveals;
        } else if (const auto* m = std::get_if<protocol::TestVerdict>(&msg.body)) {
            verdict = m;
        } else if (const auto* m = std::get_if<protocol::QberSample>(&msg.body)) {
            qber_a = m->bits;
        } else if (const auto* m = std::get_if<protocol::QberReply>(&msg.body)) {
            qber_b = m->bits;
        } else if (std::holds_alternative<protocol::ReconParityMsg>(msg.body)) {
            ++parity_msgs;
        } else if (const auto* m = std::get_if<protocol::HashCompareMsg>(&msg.body)) {
            ++hash_msgs;
            last_hash_match = m->match;
            saw_hash = true;
        } else if (const auto* m = std::get_if<protocol::PaSpecMsg>(&msg.body)) {
            pa = m;
        }
    }

    s.delivered = s.rounds - s.lost;
    if (announced != s.delivered)
        problems.push_back("session " + std::to_string(index) +
                           ": basis announcements do not match delivered count");
    s.tested = reveals;
    if (verdict == nullptr) {
        problems.push_back("session " + std::to_string(index) + ": missing verdict");
    } else {
        s.accepted = verdict->accept;
        s.violations = verdict->violations;
        if (verdict->tested != reveals)
            problems.push_back("session " + std::to_string(index) +
                               ": verdict tested count disagrees with reveals");
    }
    s.kept = s.accepted ? s.delivered - s.tested : 0;

    if (qber_a.size() != qber_b.size())
        problems.push_back("session " + std::to_string(index) + ": QBER sample size mismatch");
    s.qber_sampled = static_cast<std::uint32_t>(qber_a.size());
    for (std::size_t i = 0; i < std::min(qber_a.size(), qber_b.size()); ++i)
        if (qber_a[i] != qber_b[i]) ++s.qber_mismatches;
    s.qber_estimate =
        s.qber_sampled == 0 ? 0.0 : static_cast<double>(s.qber_mismatches) / s.qber_sampled;

    const std::uint32_t recon_len = s.kept - s.qber_sampled;
    s.reconciled_len = recon_len;
    s.leaked_bits = std::min<std::uint64_t>(parity_msgs + 64 * hash_msgs, recon_len);
    s.recon_verified = !saw_hash || last_hash_match;

    if (pa != nullptr) {
        s.final_len = pa->out_len;
        if (pa->input_len != recon_len)
            problems.push_back("session " + std::to_string(index) +
                               ": PA input length disagrees with sifted counters");
        if (pa->leaked_bits != s.leaked_bits)
            problems.push_back("session " + std::to_string(index) +
                               ": PA leaked-bit count disagrees with parity messages");
        const std::uint32_t expect =
            s.recon_verified ? postproc::pa_output_length(pa->input_len, s.qber_estimate,
                                                          pa->leaked_bits, pa->safety_margin)
                             : 0;
        if (expect != pa->out_len)
            problems.push_back("session " + std::to_string(index) +
                               ": PA output length disagrees with its formula");
    }
    return out;
}

json build_report_json(const CampaignConfig& cfg,
                       const std::vector<protocol::SessionStats>& sessions,
                       const EfficiencyReport& eff, const threat::AttackReport& attack,
                       std::uint32_t aborted, const std::vector<std::string>& key_hex) {
    json j;
    j["schema_version"] = kJsonSchema;
    j["config"] = config_echo(cfg);
    j["efficiency"] = efficiency_json(eff);
    j["attack"] = attack_json(attack);
    j["aborted_sessions"] = aborted;
    j["sessions"] = json::array();
    CampaignConfig seed_cfg = cfg;
    for (std::size_t i = 0; i < sessions.size(); ++i)
        j["sessions"].push_back(session_json(sessions[i], static_cast<std::uint32_t>(i),
                                             config::session_seed(seed_cfg,
                                                                  static_cast<std::uint32_t>(i)),
                                             key_hex[i]));
    return j;
}

std::string render_csv_impl(const CampaignConfig& cfg,
                            const std::vector<protocol::SessionStats>& sessions,
                            const EfficiencyReport& eff, const threat::AttackReport& attack,
                            std::uint32_t aborted) {
    std::string out = kCsvMagic;
    out += '\n';
    out +=
        "kept_qubits,lost_qubits,eta,eta_bb84_baseline,tested_count,violations,violation_rate,"
        "qber,final_key_len,triplets_consumed,p2_qubits_transmitted,aborted_sessions,"
        "detection_rate_per_tested_round,qber_on_key,eve_bob_mutual_information,"
        "eve_alice_mutual_information\n";
    CampaignResult tmp;
    tmp.efficiency = eff;
    tmp.attack = attack;
    tmp.aborted_sessions = aborted;
    out += csv_campaign_row(tmp);
    out += '\n';
    out +=
        "index,seed,accepted,rounds,lost,delivered,tested,violations,kept,qber_sampled,"
        "qber_mismatches,leaked_bits,recon_verified,final_key_len\n";
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        const auto& s = sessions[i];
        out += std::to_string(i) + ',';
        out += std::to_string(config::session_seed(cfg, static_cast<std::uint32_t>(i))) + ',';
        out += std::string(s.accepted ? "1" : "0") + ',';
        out += std::to_string(s.rounds) + ',' + std::to_string(s.lost) + ',';
        out += std::to_string(s.delivered) + ',' + std::to_string(s.tested) + ',';
        out += std::to_string(s.violations) + ',' + std::to_string(s.kept) + ',';
        out += std::to_string(s.qber_sampled) + ',' + std::to_string(s.qber_mismatches) + ',';
        out += std::to_string(s.leaked_bits) + ',';
        out += std::string(s.recon_verified ? "1" : "0") + ',';
        out += std::to_string(s.final_len) + '\n';
    }
    return out;
}

}  // namespace

std::string bits_to_hex(const postproc::BitVec& bits) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    int nibble = 0;
    int fill = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        nibble = (nibble << 1) | (bits[i] & 1);
        if (++fill == 4) {
            out += digits[nibble];
            nibble = 0;
            fill = 0;
        }
    }
    if (fill > 0) out += digits[nibble << (4 - fill)];
    return out;
}

EfficiencyReport aggregate_efficiency(const std::vector<protocol::SessionStats>& sessions) {
    EfficiencyReport e;
    std::uint64_t sampled = 0, mismatches = 0;
    for (const auto& s : sessions) {
        e.kept_qubits += s.kept;
        e.lost_qubits += s.lost;
        e.tested_count += s.tested;
        e.violations += s.violations;
        e.final_key_len += s.final_len;
        e.triplets_consumed += s.rounds;
        e.p2_qubits_transmitted += s.rounds;
        sampled += s.qber_sampled;
        mismatches += s.qber_mismatches;
    }
    const std::uint64_t denom = e.kept_qubits + e.lost_qubits;
    e.eta = denom == 0 ? 0.0
                       : static_cast<double>(e.kept_qubits) / static_cast<double>(denom);
    e.eta_bb84_baseline = e.eta / 2.0;
    e.violation_rate = e.tested_count == 0 ? 0.0
                                           : static_cast<double>(e.violations) /
                                                 static_cast<double>(e.tested_count);
    e.qber = sampled == 0 ? 0.0
                          : static_cast<double>(mismatches) / static_cast<double>(sampled);
    return e;
}

CampaignResult run_campaign(const CampaignConfig& cfg, bool keep_transcripts) {
    CampaignResult result;
    result.cfg = cfg;
    result.sessions.resize(cfg.sessions);
    if (keep_transcripts) result.transcripts.resize(cfg.sessions);

    auto run_one = [&](std::uint32_t i) {
        protocol::SessionConfig scfg = cfg.base;
        scfg.seed = config::session_seed(cfg, i);
        auto session_result = protocol::run_session(scfg);
        session_result.transcript.session_index = i;
        result.sessions[i] = std::move(session_result.stats);
        if (keep_transcripts) result.transcripts[i] = std::move(session_result.transcript);
    };

    if (cfg.threads <= 1 || cfg.sessions <= 1) {
        for (std::uint32_t i = 0; i < cfg.sessions; ++i) run_one(i);
    } else {
        std::atomic<std::uint32_t> next{0};
        const std::uint32_t n_workers = std::min(cfg.threads, cfg.sessions);
        std::vector<std::thread> workers;
        workers.reserve(n_workers);
        for (std::uint32_t w = 0; w < n_workers; ++w)
            workers.emplace_back([&] {
                for (;;) {
                    const std::uint32_t i = next.fetch_add(1);
                    if (i >= cfg.sessions) return;
                    run_one(i);
                }
            });
        for (auto& t : workers) t.join();
    }

    result.efficiency = aggregate_efficiency(result.sessions);
    result.attack = threat::eve_information(cfg.base.eve);
    for (const auto& s : result.sessions)
        if (!s.accepted) ++result.aborted_sessions;
    return result;
}

std::string render_json(const CampaignResult& result) {
    std::vector<std::string> key_hex(result.sessions.size());
    for (std::size_t i = 0; i < result.sessions.size(); ++i)
        key_hex[i] = bits_to_hex(result.sessions[i].final_alice);
    const json j = build_report_json(result.cfg, result.sessions, result.efficiency,
                                     result.attack, result.aborted_sessions, key_hex);
    return j.dump(2) + "\n";
}

std::string render_csv(const CampaignResult& result) {
    return render_csv_impl(result.cfg, result.sessions, result.efficiency, result.attack,
                           result.aborted_sessions);
}

std::string render_report(const CampaignResult& result) {
    return result.cfg.format == ReportFormat::Json ? render_json(result) : render_csv(result);
}

std::string serialize_campaign_transcript(const CampaignResult& result) {
    if (result.transcripts.size() != result.sessions.size())
        throw std::logic_error("campaign was run without transcript retention");
    std::string out = kTranscriptMagic;
    out += '\n';
    out += "config " + config::canonical_config(result.cfg) + '\n';
    out += "sessions " + std::to_string(result.cfg.sessions) + '\n';
    for (const auto& t : result.transcripts) {
        out += "session " + std::to_string(t.session_index) + " seed=" + std::to_string(t.seed) +
               " rounds=" + std::to_string(t.n_rounds) + '\n';
        out += protocol::serialize_session_messages(t);
        out += "end " + std::to_string(t.session_index) + '\n';
    }
    return out;
}

VerifyResult verify_report(const std::string& transcript_text, const std::string& report_text) {
    VerifyResult vr;
    std::istringstream in(transcript_text);
    std::string line;
    if (!std::getline(in, line) || line != kTranscriptMagic) {
        vr.mismatches.push_back("transcript header missing or unsupported");
        return vr;
    }
    if (!std::getline(in, line) || line.rfind("config ", 0) != 0) {
        vr.mismatches.push_back("transcript config line missing");
        return vr;
    }
    CampaignConfig cfg;
    try {
        cfg = config::parse_canonical_config(line.substr(7));
    } catch (const std::exception& e) {
        vr.mismatches.push_back(std::string("cannot parse transcript config: ") + e.what());
        return vr;
    }
    std::uint32_t declared_sessions = 0;
    if (!std::getline(in, line) || line.rfind("sessions ", 0) != 0) {
        vr.mismatches.push_back("transcript session count missing");
        return vr;
    }
    declared_sessions = static_cast<std::uint32_t>(std::stoul(line.substr(9)));

    std::vector<RecomputedSession> sessions;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("session ", 0) != 0) {
            vr.mismatches.push_back("unexpected transcript line: " + line);
            return vr;
        }
        std::istringstream head(line.substr(8));
        std::uint32_t index = 0;
        std::string seed_field, rounds_field;
        head >> index >> seed_field >> rounds_field;
        const std::uint64_t seed = std::stoull(seed_field.substr(seed_field.find('=') + 1));
        const std::uint32_t rounds =
            static_cast<std::uint32_t>(std::stoul(rounds_field.substr(rounds_field.find('=') + 1)));

        std::vector<protocol::Message> messages;
        while (std::getline(in, line) && line.rfind("end ", 0) != 0)
            messages.push_back(protocol::parse_message_line(line));
        if (seed != config::session_seed(cfg, index))
            vr.mismatches.push_back("session " + std::to_string(index) +
                                    ": seed does not follow the base-seed policy");
        sessions.push_back(recompute_session(index, seed, rounds, messages, vr.mismatches));
    }
    if (sessions.size() != declared_sessions || sessions.size() != cfg.sessions)
        vr.mismatches.push_back("transcript session count disagrees with config");

    std::vector<protocol::SessionStats> stats;
    stats.reserve(sessions.size());
    for (auto& s : sessions) stats.push_back(s.stats);
    const EfficiencyReport eff = aggregate_efficiency(stats);
    const threat::AttackReport attack = threat::eve_information(cfg.base.eve);
    std::uint32_t aborted = 0;
    for (const auto& s : stats)
        if (!s.accepted) ++aborted;

    if (report_text.rfind(kCsvMagic, 0) == 0) {
        const std::string recomputed = render_csv_impl(cfg, stats, eff, attack, aborted);
        if (recomputed != report_text) {
            std::istringstream got(report_text), want(recomputed);
            std::string g, w;
            int line_no = 0;
            while (true) {
                const bool has_g = static_cast<bool>(std::getline(got, g));
                const bool has_w = static_cast<bool>(std::getline(want, w));
                ++line_no;
                if (!has_g && !has_w) break;
                if (g != w)
                    vr.mismatches.push_back("csv line " + std::to_string(line_no) +
                                            ": report '" + (has_g ? g : "<eof>") +
                                            "' != recomputed '" + (has_w ? w : "<eof>") + "'");
            }
        }
    } else {
        json original;
        try {
            original = json::parse(report_text);
        } catch (const std::exception& e) {
            vr.mismatches.push_back(std::string("cannot parse report: ") + e.what());
            return vr;
        }
        // Key material is not derivable from public messages; carry it over so
        // the remaining fields can be compared byte-for-byte.
        std::vector<std::string> key_hex(stats.size());
        if (original.contains("sessions") && original["sessions"].is_array())
            for (std::size_t i = 0; i < stats.size() && i < original["sessions"].size(); ++i)
                key_hex[i] = original["sessions"][i].value("final_key_hex", "");
        const json recomputed =
            build_report_json(cfg, stats, eff, attack, aborted, key_hex);
        if (recomputed != original) {
            const auto diff = json::diff(original, recomputed);
            for (const auto& d : diff)
                vr.mismatches.push_back("json field " + d.value("path", "?") +
                                        " disagrees with recomputation");
        } else if (recomputed.dump(2) + "\n" != report_text) {
            vr.mismatches.push_back("report formatting differs from canonical serialization");
        }
    }

    vr.ok = vr.mismatches.empty();
    return vr;
}

}  // namespace ghzqkd::report
