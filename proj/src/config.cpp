#include "arrayhd/config.hpp"

#include <unistd.h>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace arrayhd {

namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') {
            quoted = !quoted;
        } else if (s[i] == '#' && !quoted) {
            return s.substr(0, i);
        }
    }
    return s;
}

struct Value {
    std::string raw;
    std::string origin;
    int line;

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + why + " (got '" + raw + "')");
    }

    std::string as_string() const {
        if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
            return raw.substr(1, raw.size() - 2);
        }
        fail("expected a quoted string");
    }

    double as_double() const {
        try {
            std::size_t used = 0;
            double v = std::stod(raw, &used);
            if (used != raw.size()) {
                fail("expected a number");
            }
            return v;
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            fail("expected a number");
        }
    }

    std::int64_t as_int() const {
        try {
            std::size_t used = 0;
            long long v = std::stoll(raw, &used);
            if (used != raw.size()) {
                fail("expected an integer");
            }
            return v;
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            fail("expected an integer");
        }
    }

    std::uint64_t as_uint() const {
        std::int64_t v = as_int();
        if (v < 0) {
            fail("expected a nonnegative integer");
        }
        return static_cast<std::uint64_t>(v);
    }
};

using Setter = std::function<void(RunConfig&, const Value&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"state.family", [](RunConfig& c, const Value& v) { c.family = v.as_string(); }},
        {"state.r", [](RunConfig& c, const Value& v) { c.r = v.as_double(); }},
        {"state.gamma", [](RunConfig& c, const Value& v) { c.gamma = v.as_double(); }},
        {"state.c1", [](RunConfig& c, const Value& v) { c.c1 = v.as_double(); }},
        {"state.c2", [](RunConfig& c, const Value& v) { c.c2 = v.as_double(); }},
        {"state.delta", [](RunConfig& c, const Value& v) { c.delta = v.as_double(); }},
        {"phases.phi1", [](RunConfig& c, const Value& v) { c.phi1 = v.as_double(); }},
        {"phases.phi2", [](RunConfig& c, const Value& v) { c.phi2 = v.as_double(); }},
        {"measurement.grid_n", [](RunConfig& c, const Value& v) { c.grid_n = static_cast<int>(v.as_int()); }},
        {"measurement.n_max", [](RunConfig& c, const Value& v) { c.n_max = static_cast<int>(v.as_int()); }},
        {"measurement.beta", [](RunConfig& c, const Value& v) { c.beta = v.as_double(); }},
        {"measurement.phi", [](RunConfig& c, const Value& v) { c.phi = v.as_double(); }},
        {"measurement.theta", [](RunConfig& c, const Value& v) { c.theta = v.as_double(); }},
        {"measurement.nu", [](RunConfig& c, const Value& v) { c.nu = v.as_double(); }},
        {"measurement.nu1", [](RunConfig& c, const Value& v) { c.nu1 = v.as_double(); }},
        {"measurement.nu2", [](RunConfig& c, const Value& v) { c.nu2 = v.as_double(); }},
        {"basis.family", [](RunConfig& c, const Value& v) { c.basis = v.as_string(); }},
        {"basis.waist", [](RunConfig& c, const Value& v) { c.waist = v.as_double(); }},
        {"selection.strategy", [](RunConfig& c, const Value& v) { c.strategy = v.as_string(); }},
        {"selection.restarts", [](RunConfig& c, const Value& v) { c.restarts = static_cast<int>(v.as_int()); }},
        {"selection.seed", [](RunConfig& c, const Value& v) { c.selection_seed = v.as_uint(); }},
        {"sampling.seed", [](RunConfig& c, const Value& v) { c.seed = v.as_uint(); }},
        {"sampling.samples", [](RunConfig& c, const Value& v) { c.samples = v.as_uint(); }},
        {"sampling.bins", [](RunConfig& c, const Value& v) { c.bins = static_cast<int>(v.as_int()); }},
        {"sampling.range", [](RunConfig& c, const Value& v) { c.range = v.as_double(); }},
        {"output.dir", [](RunConfig& c, const Value& v) { c.out_dir = v.as_string(); }},
        {"execution.threads", [](RunConfig& c, const Value& v) { c.threads = static_cast<int>(v.as_int()); }},
    };
    return table;
}

std::string executable_dir() {
    char buf[4096];
    ssize_t n = ::readlink("/proc/self/exe", buf, sizeof(buf) - 1);
    if (n <= 0) {
        return {};
    }
    buf[n] = '\0';
    return fs::path(buf).parent_path().string();
}

}  // namespace

std::string RunConfig::file_tag() const {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s_seed%llu_n%llu", family.c_str(),
                  static_cast<unsigned long long>(seed), static_cast<unsigned long long>(samples));
    return buf;
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(strip_comment(line));
        if (s.empty()) {
            continue;
        }
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3) {
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header '" + s + "'");
            }
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value', got '" + s + "'");
        }
        std::string key = trim(s.substr(0, eq));
        std::string raw = trim(s.substr(eq + 1));
        if (key.empty() || raw.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key or value");
        }
        std::string full = section.empty() ? key : section + "." + key;
        auto it = setters().find(full);
        if (it == setters().end()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown key '" + full + "'");
        }
        it->second(cfg, Value{raw, origin, line_no});
    }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    apply_config_text(cfg, text.str(), path);
}

std::string find_preset(const std::string& name) {
    std::vector<std::string> dirs;
    if (const char* env = std::getenv("ARRAYHD_PRESET_DIR")) {
        dirs.emplace_back(env);
    }
    dirs.emplace_back("presets");
    const std::string exe_dir = executable_dir();
    if (!exe_dir.empty()) {
        dirs.push_back(exe_dir + "/presets");
        dirs.push_back(exe_dir + "/../presets");
        dirs.push_back(exe_dir + "/../../presets");
    }
    for (const auto& dir : dirs) {
        fs::path candidate = fs::path(dir) / (name + ".toml");
        std::error_code ec;
        if (fs::exists(candidate, ec)) {
            return candidate.string();
        }
    }
    throw ConfigError("preset '" + name + "' not found (searched ARRAYHD_PRESET_DIR and presets/ directories)");
}

void validate(const RunConfig& cfg) {
    if (cfg.family != "perelomov" && cfg.family != "truncated") {
        throw ConfigError("state.family must be 'perelomov' or 'truncated', got '" + cfg.family + "'");
    }
    if (cfg.basis != "hermite-gauss" && cfg.basis != "vortex" && cfg.basis != "constant") {
        throw ConfigError("basis.family must be 'hermite-gauss', 'vortex' or 'constant', got '" +
                          cfg.basis + "'");
    }
    if (cfg.grid_n < 1 || cfg.n_max < 1) {
        throw ConfigError("measurement.grid_n and measurement.n_max must be >= 1");
    }
    if (!(cfg.beta > 0.0)) {
        throw ConfigError("measurement.beta must be > 0");
    }
    if (cfg.samples == 0) {
        throw ConfigError("sampling.samples must be > 0");
    }
    if (cfg.bins < 1 || !(cfg.range > 0.0)) {
        throw ConfigError("sampling.bins must be >= 1 and sampling.range > 0");
    }
    if (cfg.restarts < 1) {
        throw ConfigError("selection.restarts must be >= 1");
    }
}

}  // namespace arrayhd
