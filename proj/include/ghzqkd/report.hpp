// Campaign execution over seeded sessions and report generation. Every report
// number is a pure function of counters visible in the serialized transcript,
// and verify_report() recomputes them from the transcript alone.

#pragma once

#include <string>
#include <vector>

#include "ghzqkd/config.hpp"

namespace ghzqkd::report {

using config::CampaignConfig;
using config::ReportFormat;

struct EfficiencyReport {
    std::uint64_t kept_qubits = 0;  // L: sifted raw key bits across sessions
    std::uint64_t lost_qubits = 0;  // l: qubits lost in channel or detection
    double eta = 0.0;               // L / (L + l)
    double eta_bb84_baseline = 0.0; // L / (2 (L + l)), always exactly eta/2
    std::uint64_t tested_count = 0;
    std::uint64_t violations = 0;
    double violation_rate = 0.0;
    double qber = 0.0;              // aggregated sample mismatch fraction
    std::uint64_t final_key_len = 0;
    // Both resource counters are exposed: one triplet is consumed and one P2
    // qubit transmitted per round.
    std::uint64_t triplets_consumed = 0;
    std::uint64_t p2_qubits_transmitted = 0;
};

EfficiencyReport aggregate_efficiency(const std::vector<protocol::SessionStats>& sessions);

struct CampaignResult {
    CampaignConfig cfg;
    std::vector<protocol::SessionStats> sessions;
    std::vector<protocol::Transcript> transcripts;  // filled when retained
    EfficiencyReport efficiency;
    threat::AttackReport attack;
    std::uint32_t aborted_sessions = 0;
};

CampaignResult run_campaign(const CampaignConfig& cfg, bool keep_transcripts);

std::string render_json(const CampaignResult& result);
std::string render_csv(const CampaignResult& result);
std::string render_report(const CampaignResult& result);  // per cfg.format

// Header line, canonical config echo, then per-session message blocks.
std::string serialize_campaign_transcript(const CampaignResult& result);

struct VerifyResult {
    bool ok = false;
    std::vector<std::string> mismatches;
};

// Recomputes every report number from the serialized transcript and compares
// against the given report byte-for-byte (key material, which is not public,
// is carried over verbatim and excluded from the comparison).
VerifyResult verify_report(const std::string& transcript_text, const std::string& report_text);

std::string bits_to_hex(const postproc::BitVec& bits);

}  // namespace ghzqkd::report
