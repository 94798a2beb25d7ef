#include "ghzqkd/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace ghzqkd::config {

namespace {

struct EveSettings {
    std::string strategy = "none";
    double strength = 1.0;
    double prob_x = 0.5;
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& field, const std::string& value, int line) {
    double out = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw ConfigError(field + ": expected a number, got '" + value + "'", line);
    return out;
}

std::uint64_t parse_u64(const std::string& field, const std::string& value, int line) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw ConfigError(field + ": expected a non-negative integer, got '" + value + "'",
                          line);
    return out;
}

void require_range(const std::string& field, double v, double lo, double hi, int line) {
    if (v < lo || v > hi)
        throw ConfigError(field + ": value " + format_double(v) + " out of range [" +
                              format_double(lo) + ", " + format_double(hi) + "]",
                          line);
}

void apply_eve(CampaignConfig& cfg, const EveSettings& eve, int line) {
    if (eve.strategy == "none") {
        cfg.base.eve = threat::NoEve{};
    } else if (eve.strategy == "intercept_resend") {
        require_range("eve.prob_x", eve.prob_x, 0.0, 1.0, line);
        cfg.base.eve = threat::InterceptResend{eve.prob_x};
    } else if (eve.strategy == "entangle_ancilla") {
        require_range("eve.strength", eve.strength, 0.0, 1.0, line);
        cfg.base.eve = threat::z_probe_attack(eve.strength);
    } else if (eve.strategy == "man_in_the_middle") {
        throw ConfigError(
            "eve.strategy: man-in-the-middle impersonation is not modeled here; defeating it "
            "requires authenticating the classical channel with a pre-shared identity key, "
            "which is outside this simulator's scope",
            line);
    } else {
        throw ConfigError("eve.strategy: unknown strategy '" + eve.strategy +
                              "' (expected none, intercept_resend or entangle_ancilla)",
                          line);
    }
}

// Applies one "section.key = value" setting. Shared by the file parser and the
// canonical-line parser.
void apply_setting(CampaignConfig& cfg, EveSettings& eve, const std::string& section,
                   const std::string& key, const std::string& value, int line) {
    const std::string field = section + "." + key;
    if (section == "session") {
        if (key == "sessions") {
            cfg.sessions = static_cast<std::uint32_t>(parse_u64(field, value, line));
            if (cfg.sessions < 1) throw ConfigError(field + ": must be >= 1", line);
        } else if (key == "n_rounds") {
            cfg.base.n_rounds = static_cast<std::uint32_t>(parse_u64(field, value, line));
            if (cfg.base.n_rounds < 1) throw ConfigError(field + ": must be >= 1", line);
        } else if (key == "test_fraction") {
            cfg.base.test_fraction = parse_double(field, value, line);
            if (!(cfg.base.test_fraction > 0.0 && cfg.base.test_fraction < 1.0))
                throw ConfigError(field + ": must lie strictly between 0 and 1", line);
        } else if (key == "qber_abort_threshold") {
            cfg.base.qber_abort_threshold = parse_double(field, value, line);
            require_range(field, cfg.base.qber_abort_threshold, 0.0, 1.0, line);
        } else if (key == "seed") {
            cfg.base.seed = parse_u64(field, value, line);
        } else if (key == "bit_convention") {
            if (value != "plus0")
                throw ConfigError(field + ": unknown convention '" + value +
                                      "' (only plus0 is defined)",
                                  line);
            cfg.base.convention = protocol::BitConvention::PlusIsZero;
        } else {
            throw ConfigError("unknown key '" + field + "'", line);
        }
    } else if (section == "channel") {
        if (key == "loss_prob") {
            cfg.base.channel.loss_prob = parse_double(field, value, line);
            require_range(field, cfg.base.channel.loss_prob, 0.0, 1.0, line);
        } else if (key == "depolarize_prob") {
            cfg.base.channel.depolarize_prob = parse_double(field, value, line);
            require_range(field, cfg.base.channel.depolarize_prob, 0.0, 1.0, line);
        } else {
            throw ConfigError("unknown key '" + field + "'", line);
        }
    } else if (section == "eve") {
        if (key == "strategy") {
            eve.strategy = value;
        } else if (key == "strength") {
            eve.strength = parse_double(field, value, line);
            require_range(field, eve.strength, 0.0, 1.0, line);
        } else if (key == "prob_x") {
            eve.prob_x = parse_double(field, value, line);
            require_range(field, eve.prob_x, 0.0, 1.0, line);
        } else {
            throw ConfigError("unknown key '" + field + "'", line);
        }
    } else if (section == "postproc") {
        if (key == "n_passes") {
            cfg.base.recon_passes = static_cast<std::uint32_t>(parse_u64(field, value, line));
            if (cfg.base.recon_passes < 1) throw ConfigError(field + ": must be >= 1", line);
        } else if (key == "safety_margin") {
            cfg.base.safety_margin = static_cast<std::uint32_t>(parse_u64(field, value, line));
        } else if (key == "qber_sample_fraction") {
            cfg.base.qber_sample_fraction = parse_double(field, value, line);
            if (cfg.base.qber_sample_fraction < 0.0 || cfg.base.qber_sample_fraction >= 1.0)
                throw ConfigError(field + ": must lie in [0, 1)", line);
        } else if (key == "verify_rounds") {
            cfg.base.recon_verify_rounds =
                static_cast<std::uint32_t>(parse_u64(field, value, line));
        } else {
            throw ConfigError("unknown key '" + field + "'", line);
        }
    } else if (section == "output") {
        if (key == "format") {
            if (value == "json")
                cfg.format = ReportFormat::Json;
            else if (value == "csv")
                cfg.format = ReportFormat::Csv;
            else
                throw ConfigError(field + ": expected json or csv, got '" + value + "'", line);
        } else if (key == "report") {
            cfg.report_path = value;
        } else if (key == "transcript") {
            cfg.transcript_path = value;
        } else if (key == "threads") {
            cfg.threads = static_cast<std::uint32_t>(parse_u64(field, value, line));
            if (cfg.threads < 1) throw ConfigError(field + ": must be >= 1", line);
        } else {
            throw ConfigError("unknown key '" + field + "'", line);
        }
    } else {
        throw ConfigError("unknown section '[" + section + "]'", line);
    }
}

const char* eve_strategy_name(const threat::EveStrategy& eve) {
    if (std::holds_alternative<threat::NoEve>(eve)) return "none";
    if (std::holds_alternative<threat::InterceptResend>(eve)) return "intercept_resend";
    return "entangle_ancilla";
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

CampaignConfig parse_config(const std::string& text) {
    CampaignConfig cfg;
    EveSettings eve;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    int eve_line = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header", line_no);
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value', got '" + line + "'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("setting '" + key + "' appears before any [section]", line_no);
        if (section == "eve") eve_line = line_no;
        apply_setting(cfg, eve, section, key, value, line_no);
    }
    apply_eve(cfg, eve, eve_line);
    cfg.base.validate();
    return cfg;
}

CampaignConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string canonical_config(const CampaignConfig& cfg) {
    const auto& b = cfg.base;
    std::string out;
    out += "session.sessions=" + std::to_string(cfg.sessions);
    out += " session.n_rounds=" + std::to_string(b.n_rounds);
    out += " session.test_fraction=" + format_double(b.test_fraction);
    out += " session.qber_abort_threshold=" + format_double(b.qber_abort_threshold);
    out += " session.seed=" + std::to_string(b.seed);
    out += " session.bit_convention=plus0";
    out += " channel.loss_prob=" + format_double(b.channel.loss_prob);
    out += " channel.depolarize_prob=" + format_double(b.channel.depolarize_prob);
    out += std::string(" eve.strategy=") + eve_strategy_name(b.eve);
    if (const auto* ea = std::get_if<threat::EntangleAncilla>(&b.eve))
        out += " eve.strength=" + format_double(ea->strength);
    if (const auto* ir = std::get_if<threat::InterceptResend>(&b.eve))
        out += " eve.prob_x=" + format_double(ir->prob_x);
    out += " postproc.n_passes=" + std::to_string(b.recon_passes);
    out += " postproc.safety_margin=" + std::to_string(b.safety_margin);
    out += " postproc.qber_sample_fraction=" + format_double(b.qber_sample_fraction);
    out += " postproc.verify_rounds=" + std::to_string(b.recon_verify_rounds);
    return out;
}

CampaignConfig parse_canonical_config(const std::string& line) {
    CampaignConfig cfg;
    EveSettings eve;
    std::istringstream in(line);
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        const auto dot = token.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("malformed canonical config token '" + token + "'");
        apply_setting(cfg, eve, token.substr(0, dot), token.substr(dot + 1, eq - dot - 1),
                      token.substr(eq + 1), 0);
    }
    apply_eve(cfg, eve, 0);
    cfg.base.validate();
    return cfg;
}

}  // namespace ghzqkd::config
