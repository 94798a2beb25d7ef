// Campaign configuration: the documented "key = value" file format with
// [session], [channel], [eve], [postproc] and [output] sections, plus the
// canonical one-line echo embedded in transcripts so reports can be recomputed
// by an independent reader.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "ghzqkd/protocol.hpp"

namespace ghzqkd::config {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                      : message),
          line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

enum class ReportFormat : std::uint8_t { Json, Csv };

struct CampaignConfig {
    std::uint32_t sessions = 1;
    protocol::SessionConfig base;  // base.seed is the campaign base seed
    ReportFormat format = ReportFormat::Json;
    std::string report_path;      // empty -> stdout
    std::string transcript_path;  // empty -> transcript not written
    std::uint32_t threads = 1;
};

// Seed policy: session i runs with base seed + i.
inline std::uint64_t session_seed(const CampaignConfig& cfg, std::uint32_t index) {
    return cfg.base.seed + index;
}

CampaignConfig parse_config(const std::string& text);
CampaignConfig load_config_file(const std::string& path);

// Space-separated "section.key=value" echo of every simulation parameter
// (invocation details like output paths are not simulation parameters).
std::string canonical_config(const CampaignConfig& cfg);
CampaignConfig parse_canonical_config(const std::string& line);

std::string format_double(double value);  // shortest round-trip representation

}  // namespace ghzqkd::config
