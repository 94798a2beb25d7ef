#include <doctest.h>

#include <json.hpp>

#include "ghzqkd/report.hpp"

using namespace ghzqkd;
using config::CampaignConfig;
using json = nlohmann::ordered_json;

TEST_CASE("minimal config applies defaults") {
    const auto cfg = config::parse_config("[session]\nn_rounds = 1000\n");
    CHECK(cfg.sessions == 1);
    CHECK(cfg.base.n_rounds == 1000);
    CHECK(cfg.base.test_fraction == 0.2);
    CHECK(cfg.base.qber_abort_threshold == 0.11);
    CHECK(cfg.base.seed == 1);
    CHECK(cfg.base.channel.loss_prob == 0.0);
    CHECK(std::holds_alternative<threat::NoEve>(cfg.base.eve));
    CHECK(cfg.base.recon_passes == 4);
    CHECK(cfg.base.safety_margin == 30);
    CHECK(cfg.format == config::ReportFormat::Json);
}

TEST_CASE("range violations name the field and line") {
    try {
        config::parse_config("[channel]\nloss_prob = 1.5\n");
        FAIL("expected a config error");
    } catch (const config::ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("channel.loss_prob") != std::string::npos);
        CHECK(e.line() == 2);
    }
}

TEST_CASE("unknown keys are rejected with their line number") {
    try {
        config::parse_config("[session]\nn_rounds = 10\nbogus = 1\n");
        FAIL("expected a config error");
    } catch (const config::ConfigError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("session.bogus") != std::string::npos);
    }
}

TEST_CASE("eve strategy selection") {
    const auto ir = config::parse_config("[eve]\nstrategy = intercept_resend\n");
    CHECK(std::holds_alternative<threat::InterceptResend>(ir.base.eve));

    const auto ea =
        config::parse_config("[eve]\nstrategy = entangle_ancilla\nstrength = 0.5\n");
    REQUIRE(std::holds_alternative<threat::EntangleAncilla>(ea.base.eve));
    CHECK(std::get<threat::EntangleAncilla>(ea.base.eve).strength == 0.5);

    CHECK_THROWS_AS(config::parse_config("[eve]\nstrategy = photon_splitting\n"),
                    config::ConfigError);
}

TEST_CASE("man-in-the-middle is rejected with an explanation") {
    try {
        config::parse_config("[eve]\nstrategy = man_in_the_middle\n");
        FAIL("expected a config error");
    } catch (const config::ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("not modeled") != std::string::npos);
        CHECK(what.find("identity") != std::string::npos);
    }
}

TEST_CASE("canonical config round-trips") {
    const auto cfg = config::parse_config(
        "[session]\nsessions = 3\nn_rounds = 500\nseed = 99\n"
        "[channel]\nloss_prob = 0.25\n[eve]\nstrategy = entangle_ancilla\nstrength = 0.75\n");
    const std::string canon = config::canonical_config(cfg);
    const auto back = config::parse_canonical_config(canon);
    CHECK(config::canonical_config(back) == canon);
    CHECK(back.sessions == 3);
    CHECK(back.base.channel.loss_prob == 0.25);
    REQUIRE(std::holds_alternative<threat::EntangleAncilla>(back.base.eve));
    CHECK(std::get<threat::EntangleAncilla>(back.base.eve).strength == 0.75);
}

TEST_CASE("efficiency arithmetic") {
    protocol::SessionStats s;
    s.rounds = 1000;
    s.kept = 900;
    s.lost = 100;
    const auto e = report::aggregate_efficiency({s});
    CHECK(e.eta == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(e.eta_bb84_baseline == doctest::Approx(0.45).epsilon(1e-15));
    CHECK(e.eta == 2.0 * e.eta_bb84_baseline);  // exact by construction

    protocol::SessionStats lossless;
    lossless.rounds = 100;
    lossless.kept = 80;
    lossless.lost = 0;
    const auto e2 = report::aggregate_efficiency({lossless});
    CHECK(e2.eta == 1.0);
    CHECK(e2.eta == 2.0 * e2.eta_bb84_baseline);
}

TEST_CASE("campaign report is deterministic and schema-complete") {
    CampaignConfig cfg;
    cfg.sessions = 3;
    cfg.base.n_rounds = 400;
    cfg.base.seed = 11;
    cfg.base.channel.loss_prob = 0.05;

    const auto r1 = report::run_campaign(cfg, true);
    const auto r2 = report::run_campaign(cfg, true);
    CHECK(report::render_json(r1) == report::render_json(r2));
    CHECK(report::render_csv(r1) == report::render_csv(r2));
    CHECK(report::serialize_campaign_transcript(r1) ==
          report::serialize_campaign_transcript(r2));

    const auto j = json::parse(report::render_json(r1));
    CHECK(j["schema_version"] == "ghzqkd-report-v1");
    for (const char* key :
         {"kept_qubits", "lost_qubits", "eta", "eta_bb84_baseline", "tested_count",
          "violations", "violation_rate", "qber", "final_key_len", "triplets_consumed",
          "p2_qubits_transmitted"})
        CHECK(j["efficiency"].contains(key));
    for (const char* key :
         {"detection_rate_per_tested_round", "qber_on_key", "eve_bob_mutual_information",
          "eve_alice_mutual_information"})
        CHECK(j["attack"].contains(key));
    REQUIRE(j["sessions"].size() == 3);
    CHECK(j["sessions"][0]["seed"] == 11);
    CHECK(j["sessions"][2]["seed"] == 13);  // base seed + index policy

    // eta is recomputable from its own counters.
    const double eta = j["efficiency"]["eta"];
    const double L = j["efficiency"]["kept_qubits"];
    const double l = j["efficiency"]["lost_qubits"];
    CHECK(eta == L / (L + l));
}

TEST_CASE("parallel and sequential campaigns produce identical reports") {
    CampaignConfig cfg;
    cfg.sessions = 8;
    cfg.base.n_rounds = 300;
    cfg.base.seed = 77;
    cfg.base.channel.loss_prob = 0.1;

    CampaignConfig par = cfg;
    par.threads = 4;
    const auto seq_result = report::run_campaign(cfg, true);
    const auto par_result = report::run_campaign(par, true);
    CHECK(report::render_json(seq_result) == report::render_json(par_result));
    CHECK(report::serialize_campaign_transcript(seq_result) ==
          report::serialize_campaign_transcript(par_result));
}

TEST_CASE("verify-report accepts faithful reports and flags tampering") {
    CampaignConfig cfg;
    cfg.sessions = 2;
    cfg.base.n_rounds = 600;
    cfg.base.seed = 5;
    cfg.base.channel.loss_prob = 0.02;

    const auto result = report::run_campaign(cfg, true);
    const std::string transcript = report::serialize_campaign_transcript(result);

    SUBCASE("json") {
        const std::string rep = report::render_json(result);
        const auto ok = report::verify_report(transcript, rep);
        CHECK(ok.ok);
        auto j = json::parse(rep);
        j["efficiency"]["lost_qubits"] = 9999;
        const auto bad = report::verify_report(transcript, j.dump(2) + "\n");
        CHECK_FALSE(bad.ok);
        CHECK_FALSE(bad.mismatches.empty());
    }
    SUBCASE("csv") {
        const std::string rep = report::render_csv(result);
        CampaignConfig csv_cfg = cfg;
        csv_cfg.format = config::ReportFormat::Csv;
        const auto ok = report::verify_report(transcript, rep);
        CHECK(ok.ok);
        std::string tampered = rep;
        const auto pos = tampered.rfind(",");
        tampered.insert(pos + 1, "9");
        const auto bad = report::verify_report(transcript, tampered);
        CHECK_FALSE(bad.ok);
    }
}

TEST_CASE("aborting sessions are counted and empty-keyed") {
    CampaignConfig cfg;
    cfg.sessions = 2;
    cfg.base.n_rounds = 4000;
    cfg.base.seed = 17;
    cfg.base.eve = threat::InterceptResend{};
    const auto result = report::run_campaign(cfg, true);
    CHECK(result.aborted_sessions == 2);
    CHECK(result.efficiency.final_key_len == 0);
    CHECK(result.efficiency.kept_qubits == 0);
    CHECK(result.attack.detection_rate_per_tested_round ==
          doctest::Approx(0.25).epsilon(1e-12));

    // Aborted sessions verify too: their transcripts simply end at the verdict.
    const auto ok = report::verify_report(report::serialize_campaign_transcript(result),
                                          report::render_json(result));
    CHECK(ok.ok);
}
