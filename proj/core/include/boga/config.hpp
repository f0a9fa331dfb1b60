#pragma once

#include "boga/engine.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace boga {

struct SweepSpec {
    CampaignConfig base;
    std::vector<int> k_propose_values; // distinct, each >= m_select
    std::vector<std::uint64_t> seeds;
    int m_select = 1; // fixed across all cells
    std::string output_dir;

    void validate() const; // throws ConfigError
};

/// Parse a campaign config file (JSON, schema in docs/config-schema.md).
/// Syntax and semantic problems raise ConfigError with a line-anchored or
/// field-anchored message.
CampaignConfig parse_campaign_config_file(const std::filesystem::path& path);
CampaignConfig parse_campaign_config_text(const std::string& text, const std::string& origin);

SweepSpec parse_sweep_config_file(const std::filesystem::path& path);
SweepSpec parse_sweep_config_text(const std::string& text, const std::string& origin);

/// Canonical JSON rendering of a config (the form written to log dirs).
std::string campaign_config_to_json(const CampaignConfig& config);

} // namespace boga
