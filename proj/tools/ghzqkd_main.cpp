// Command-line front end: campaign execution, correlation-table and grouping
// verification, probe-attack sweeps and report verification.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ghzqkd/ghzcorr.hpp"
#include "ghzqkd/report.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitEavesdropAbort = 2;

std::string eigen_label(ghzqkd::qcore::Basis b, ghzqkd::qcore::Outcome o) {
    std::string s = "|";
    s += static_cast<char>(std::tolower(ghzqkd::qcore::basis_char(b)));
    s += ghzqkd::qcore::outcome_char(o);
    s += ">";
    return s;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write to '" + path + "'");
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json table_to_json() {
    const auto table = ghzqkd::ghzcorr::derive_table();
    const auto diffs = ghzqkd::ghzcorr::compare_with_reference_table(table);
    const auto decomp = ghzqkd::ghzcorr::verify_decompositions();

    json j;
    j["schema_version"] = "ghzqkd-table-v1";
    j["entries"] = json::array();
    for (const auto& e : table.entries) {
        json row;
        row["p1_basis"] = std::string(1, ghzqkd::qcore::basis_char(e.b1));
        row["p1_outcome"] = std::string(1, ghzqkd::qcore::outcome_char(e.o1));
        row["p2_basis"] = std::string(1, ghzqkd::qcore::basis_char(e.b2));
        row["p2_outcome"] = std::string(1, ghzqkd::qcore::outcome_char(e.o2));
        row["p3_basis"] = std::string(1, ghzqkd::qcore::basis_char(e.b3));
        row["p3_outcome"] = std::string(1, ghzqkd::qcore::outcome_char(e.o3));
        row["conditional_probability"] = e.conditional_probability;
        j["entries"].push_back(row);
    }
    j["reference_discrepancies"] = json::array();
    for (const auto& d : diffs) {
        json row;
        row["p1"] = eigen_label(d.b1, d.o1);
        row["p2"] = eigen_label(d.b2, d.o2);
        row["derived_p3"] = eigen_label(ghzqkd::ghzcorr::third_basis(d.b1, d.b2), d.derived_o3);
        row["reference_p3"] =
            eigen_label(ghzqkd::ghzcorr::third_basis(d.b1, d.b2), d.reference_o3);
        j["reference_discrepancies"].push_back(row);
    }
    j["groupings"] = json::array();
    for (const auto& c : decomp.checks) {
        json row;
        row["combo"] = c.combo_label;
        row["matches_reference"] = c.matches_reference;
        row["max_coefficient_error"] = c.max_coefficient_error;
        row["reexpansion_error"] = c.reexpansion_error;
        row["derived_terms"] = json::array();
        for (const auto& t : c.derived_terms)
            row["derived_terms"].push_back(ghzqkd::ghzcorr::term_label(t));
        row["unsupported_reference_terms"] = json::array();
        for (const auto& t : c.unsupported_reference_terms)
            row["unsupported_reference_terms"].push_back(ghzqkd::ghzcorr::term_label(t));
        row["missing_from_reference"] = json::array();
        for (const auto& t : c.missing_from_reference)
            row["missing_from_reference"].push_back(ghzqkd::ghzcorr::term_label(t));
        j["groupings"].push_back(row);
    }
    return j;
}

std::string table_to_text() {
    const auto table = ghzqkd::ghzcorr::derive_table();
    const auto diffs = ghzqkd::ghzcorr::compare_with_reference_table(table);
    const auto decomp = ghzqkd::ghzcorr::verify_decompositions();

    std::ostringstream out;
    out << "Derived correlation table (forced P3 result given P1 and P2):\n";
    out << "  P1    P2    ->  P3    conditional probability\n";
    for (const auto& e : table.entries) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "  %-5s %-5s ->  %-5s %.15f\n",
                      eigen_label(e.b1, e.o1).c_str(), eigen_label(e.b2, e.o2).c_str(),
                      eigen_label(e.b3, e.o3).c_str(), e.conditional_probability);
        out << buf;
    }
    out << "\nReference-table discrepancies: " << diffs.size() << "\n";
    for (const auto& d : diffs)
        out << "  P1=" << eigen_label(d.b1, d.o1) << " P2=" << eigen_label(d.b2, d.o2)
            << ": derived "
            << eigen_label(ghzqkd::ghzcorr::third_basis(d.b1, d.b2), d.derived_o3)
            << ", reference "
            << eigen_label(ghzqkd::ghzcorr::third_basis(d.b1, d.b2), d.reference_o3) << "\n";
    out << "\nBasis-grouping checks:\n";
    for (const auto& c : decomp.checks) {
        out << "  " << c.combo_label << ": "
            << (c.matches_reference ? "matches reference" : "DIFFERS from reference")
            << " (re-expansion error " << c.reexpansion_error << ")\n";
        for (const auto& t : c.unsupported_reference_terms)
            out << "    reference term not in derived grouping: "
                << ghzqkd::ghzcorr::term_label(t) << "\n";
        for (const auto& t : c.missing_from_reference)
            out << "    derived term missing from reference:    "
                << ghzqkd::ghzcorr::term_label(t) << "\n";
    }
    return out.str();
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            const std::string& format_override, const std::string& transcript_override,
            bool seed_set, std::uint64_t seed, unsigned threads) {
    auto cfg = ghzqkd::config::load_config_file(config_path);
    if (seed_set) cfg.base.seed = seed;
    if (!out_override.empty()) cfg.report_path = out_override;
    if (!transcript_override.empty()) cfg.transcript_path = transcript_override;
    if (!format_override.empty())
        cfg.format = format_override == "csv" ? ghzqkd::config::ReportFormat::Csv
                                              : ghzqkd::config::ReportFormat::Json;
    if (threads > 0) cfg.threads = threads;

    const bool keep_transcripts = !cfg.transcript_path.empty();
    const auto result = ghzqkd::report::run_campaign(cfg, keep_transcripts);
    write_output(cfg.report_path, ghzqkd::report::render_report(result));
    if (keep_transcripts)
        write_output(cfg.transcript_path,
                     ghzqkd::report::serialize_campaign_transcript(result));
    if (result.aborted_sessions > 0) {
        std::cerr << result.aborted_sessions << " of " << result.cfg.sessions
                  << " sessions aborted on the eavesdropping check\n";
        return kExitEavesdropAbort;
    }
    return kExitOk;
}

int cmd_attack_sweep(const std::string& config_path, const std::string& grid,
                     const std::string& out_path) {
    const auto cfg = ghzqkd::config::load_config_file(config_path);
    if (!std::holds_alternative<ghzqkd::threat::EntangleAncilla>(cfg.base.eve))
        throw std::runtime_error(
            "attack-sweep requires eve.strategy = entangle_ancilla in the config");

    double lo = 0.0, hi = 1.0;
    unsigned points = 11;
    if (std::sscanf(grid.c_str(), "%lf:%lf:%u", &lo, &hi, &points) != 3 || points < 1)
        throw std::runtime_error("grid must be of the form a:b:n, e.g. 0:1:11");

    std::string csv =
        "parameter,detection_rate,qber_on_key,eve_bob_information,eve_alice_information,"
        "eve_z_information\n";
    for (unsigned i = 0; i < points; ++i) {
        const double t = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
        const ghzqkd::threat::EveStrategy strategy = ghzqkd::threat::z_probe_attack(t);
        const auto rep = ghzqkd::threat::eve_information(strategy);
        csv += ghzqkd::config::format_double(t) + ',';
        csv += ghzqkd::config::format_double(rep.detection_rate_per_tested_round) + ',';
        csv += ghzqkd::config::format_double(rep.qber_on_key) + ',';
        csv += ghzqkd::config::format_double(rep.eve_bob_mutual_information) + ',';
        csv += ghzqkd::config::format_double(rep.eve_alice_mutual_information) + ',';
        csv += ghzqkd::config::format_double(ghzqkd::threat::eve_z_information(strategy)) + '\n';
    }
    write_output(out_path, csv);
    return kExitOk;
}

int cmd_verify_report(const std::string& transcript_path, const std::string& report_path) {
    const auto outcome = ghzqkd::report::verify_report(read_file(transcript_path),
                                                       read_file(report_path));
    if (outcome.ok) {
        std::cout << "report agrees with recomputation from the transcript\n";
        return kExitOk;
    }
    for (const auto& m : outcome.mismatches) std::cout << "MISMATCH: " << m << "\n";
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for the unsymmetrical triplet-state key distribution protocol"};
    app.require_subcommand(1);

    std::string config_path, out_path, format, transcript_path, grid = "0:1:11", report_path;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool as_json = false;

    auto* run = app.add_subcommand("run", "Run a campaign of sessions from a config file");
    run->add_option("config", config_path, "Config file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "Override the base seed");
    run->add_option("--out", out_path, "Report file (default: config or stdout)");
    run->add_option("--format", format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    run->add_option("--transcript", transcript_path, "Also write the message transcript");
    run->add_option("--threads", threads, "Worker threads for the campaign");

    auto* table = app.add_subcommand("table", "Print the derived correlation table");
    table->add_flag("--json", as_json, "Emit JSON instead of text");

    auto* verify_eqs =
        app.add_subcommand("verify-eqs", "Re-derive the basis groupings and cross-check them");
    verify_eqs->add_flag("--json", as_json, "Emit JSON instead of text");

    auto* sweep = app.add_subcommand("attack-sweep",
                                     "Exact detection/information tradeoff over a probe family");
    sweep->add_option("config", config_path, "Config file")->required();
    sweep->add_option("--grid", grid, "Sweep grid a:b:n")->required();
    sweep->add_option("--out", out_path, "CSV output file (default stdout)");

    auto* verify = app.add_subcommand("verify-report",
                                      "Recompute a report from its transcript and compare");
    verify->add_option("transcript", transcript_path, "Transcript file")->required();
    verify->add_option("--report", report_path, "Report file")->required();

    try {
        app.parse(argc, argv);
        if (run->parsed())
            return cmd_run(config_path, out_path, format, transcript_path,
                           seed_opt->count() > 0, seed, threads);
        if (table->parsed()) {
            write_output("", as_json ? table_to_json().dump(2) + "\n" : table_to_text());
            return kExitOk;
        }
        if (verify_eqs->parsed()) {
            if (as_json) {
                json j = table_to_json();
                json out;
                out["schema_version"] = "ghzqkd-groupings-v1";
                out["groupings"] = j["groupings"];
                write_output("", out.dump(2) + "\n");
            } else {
                write_output("", table_to_text());
            }
            return kExitOk;
        }
        if (sweep->parsed()) return cmd_attack_sweep(config_path, grid, out_path);
        if (verify->parsed()) return cmd_verify_report(transcript_path, report_path);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
