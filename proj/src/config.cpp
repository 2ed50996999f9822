#include "worldmotion/config.hpp"

#include "worldmotion/binary_container.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace wm {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool validKey(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
    }
    return true;
}

// Removes a trailing comment that is not inside a quoted string.
std::string stripComment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

ConfigValue parseValue(const std::string& raw, const std::string& where) {
    const std::string v = trim(raw);
    if (v.empty()) throw ValidationError(where + ": missing value");
    if (v == "true") return true;
    if (v == "false") return false;
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') throw ValidationError(where + ": unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) {
                ++i;
                out.push_back(v[i] == 'n' ? '\n' : v[i]);
            } else {
                out.push_back(v[i]);
            }
        }
        return out;
    }
    std::string digits;
    for (char c : v) {
        if (c != '_') digits.push_back(c);
    }
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(digits, &used);
    } catch (const std::exception&) {
        throw ValidationError(where + ": cannot parse value '" + v + "'");
    }
    if (used != digits.size() || !std::isfinite(d)) throw ValidationError(where + ": cannot parse value '" + v + "'");
    return d;
}

double asNumber(const ConfigValue& v, const std::string& key) {
    if (const double* d = std::get_if<double>(&v)) return *d;
    throw ValidationError("config " + key + ": expected a number");
}

int asInt(const ConfigValue& v, const std::string& key) {
    const double d = asNumber(v, key);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ValidationError("config " + key + ": expected an integer");
    return static_cast<int>(d);
}

bool asBool(const ConfigValue& v, const std::string& key) {
    if (const bool* b = std::get_if<bool>(&v)) return *b;
    throw ValidationError("config " + key + ": expected true or false");
}

std::string asString(const ConfigValue& v, const std::string& key) {
    if (const std::string* s = std::get_if<std::string>(&v)) return *s;
    throw ValidationError("config " + key + ": expected a quoted string");
}

}  // namespace

std::map<std::string, ConfigValue> parseConfigText(const std::string& text, const std::string& origin) {
    std::map<std::string, ConfigValue> out;
    std::istringstream in(text);
    std::string line, section;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const std::string where = origin + ":" + std::to_string(lineNo);
        const std::string l = trim(stripComment(line));
        if (l.empty()) continue;
        if (l.front() == '[') {
            if (l.back() != ']') throw ValidationError(where + ": malformed section header");
            section = trim(l.substr(1, l.size() - 2));
            if (!validKey(section)) throw ValidationError(where + ": invalid section name");
            continue;
        }
        const auto eq = l.find('=');
        if (eq == std::string::npos) throw ValidationError(where + ": expected key = value");
        const std::string key = trim(l.substr(0, eq));
        if (!validKey(key)) throw ValidationError(where + ": invalid key '" + key + "'");
        const std::string full = section.empty() ? key : section + "." + key;
        if (out.count(full)) throw ValidationError(where + ": duplicate key '" + full + "'");
        out[full] = parseValue(l.substr(eq + 1), where);
    }
    return out;
}

void PipelineConfig::set(const std::string& key, const ConfigValue& v) {
    if (key == "trajectory.norm") norm = parseArcNorm(asString(v, key));
    else if (key == "trajectory.smoothing_window") smoothingWindow = asInt(v, key);
    else if (key == "trajectory.epsilon") epsilon = asNumber(v, key);
    else if (key == "trajectory.rescale") rescale = asBool(v, key);
    else if (key == "trajectory.yaw_only") yawOnly = asBool(v, key);
    else if (key == "trajectory.grounding_window") groundingWindow = asInt(v, key);
    else if (key == "trajectory.grounding_mode") groundingMode = parseGroundingMode(asString(v, key));
    else if (key == "trajectory.grounding") grounding = asBool(v, key);
    else if (key == "hands.confidence_threshold") handConfidence = asNumber(v, key);
    else if (key == "bank.blend_window") blendWindow = asInt(v, key);
    else if (key == "render.width") width = asInt(v, key);
    else if (key == "render.height") height = asInt(v, key);
    else if (key == "render.hand_occlusion_delta") handOcclusionDelta = asNumber(v, key);
    else if (key == "render.near") near = asNumber(v, key);
    else if (key == "threads") threads = asInt(v, key);
    else throw ValidationError("unknown config key '" + key + "'");
}

void PipelineConfig::setFromString(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ValidationError("config override '" + assignment + "' must look like key=value");
    const std::string key = trim(assignment.substr(0, eq));
    std::string value = trim(assignment.substr(eq + 1));
    ConfigValue parsed;
    try {
        parsed = parseValue(value, "override " + key);
    } catch (const ValidationError&) {
        parsed = value;  // bare words are strings on the command line
    }
    set(key, parsed);
}

void PipelineConfig::validate() const {
    if (smoothingWindow < 1) throw ValidationError("config trajectory.smoothing_window must be >= 1");
    if (!(epsilon > 0.0)) throw ValidationError("config trajectory.epsilon must be positive");
    if (groundingWindow < 1 || groundingWindow % 2 == 0) {
        throw ValidationError("config trajectory.grounding_window must be odd and >= 1");
    }
    if (!(handConfidence >= 0.0 && handConfidence <= 1.0)) {
        throw ValidationError("config hands.confidence_threshold must lie in [0, 1]");
    }
    if (blendWindow < 0) throw ValidationError("config bank.blend_window must be >= 0");
    if (width <= 0 || height <= 0) throw ValidationError("config render width and height must be positive");
    if (!(handOcclusionDelta >= 0.0)) throw ValidationError("config render.hand_occlusion_delta must be >= 0");
    if (!(near > 0.0)) throw ValidationError("config render.near must be positive");
    if (threads < 0) throw ValidationError("config threads must be >= 0");
}

nlohmann::json PipelineConfig::toJson() const {
    return {{"trajectory",
             {{"norm", arcNormName(norm)},
              {"smoothing_window", smoothingWindow},
              {"epsilon", epsilon},
              {"rescale", rescale},
              {"yaw_only", yawOnly},
              {"grounding", grounding},
              {"grounding_window", groundingWindow},
              {"grounding_mode", groundingModeName(groundingMode)}}},
            {"hands", {{"confidence_threshold", handConfidence}}},
            {"bank", {{"blend_window", blendWindow}}},
            {"render",
             {{"width", width}, {"height", height}, {"hand_occlusion_delta", handOcclusionDelta}, {"near", near}}},
            {"threads", threads}};
}

PipelineConfig configFromText(const std::string& text, const std::string& origin) {
    PipelineConfig c;
    for (const auto& [k, v] : parseConfigText(text, origin)) {
        try {
            c.set(k, v);
        } catch (const ValidationError& e) {
            throw ValidationError(origin + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

PipelineConfig loadConfig(const std::filesystem::path& path) { return configFromText(readFileBytes(path), path.string()); }

}  // namespace wm
