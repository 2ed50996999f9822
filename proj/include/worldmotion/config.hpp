#pragma once

#include "worldmotion/trajectory.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <variant>

namespace wm {

/// Flat key/value view of a small TOML subset: `[section]` headers,
/// `key = value` lines with numbers, booleans or quoted strings, and `#`
/// comments. Keys are stored as "section.key".
using ConfigValue = std::variant<bool, double, std::string>;
std::map<std::string, ConfigValue> parseConfigText(const std::string& text, const std::string& origin = "<config>");

/// Every tunable of the edit and render pipeline with its default.
struct PipelineConfig {
    // [trajectory]
    ArcNorm norm = ArcNorm::L1;
    int smoothingWindow = 9;
    double epsilon = 1e-5;
    bool rescale = true;
    bool yawOnly = false;
    int groundingWindow = 5;
    GroundingMode groundingMode = GroundingMode::Opening;
    bool grounding = true;
    // [hands]
    double handConfidence = 0.5;
    // [bank]
    int blendWindow = 4;
    // [render]
    int width = 512;
    int height = 512;
    double handOcclusionDelta = 0.005;
    double near = 1e-4;
    // top level
    int threads = 0;

    /// Applies one "section.key" setting; unknown keys are rejected.
    void set(const std::string& key, const ConfigValue& value);
    /// Applies "section.key=value" as given on a command line.
    void setFromString(const std::string& assignment);
    void validate() const;
    nlohmann::json toJson() const;
};

PipelineConfig loadConfig(const std::filesystem::path& path);
PipelineConfig configFromText(const std::string& text, const std::string& origin = "<config>");

}  // namespace wm
