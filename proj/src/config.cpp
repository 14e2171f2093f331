#include "efmrf/config.hpp"

#include <istream>
#include <sstream>

#include "efmrf/errors.hpp"
#include "efmrf/io.hpp"

namespace efmrf {

KeyValues KeyValues::parse(std::istream& is) {
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string_view body = line;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key(trim(body.substr(0, eq)));
        const std::string value(trim(body.substr(eq + 1)));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (kv.has(key)) throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        kv.values_[key] = value;
    }
    return kv;
}

KeyValues KeyValues::parse_string(std::string_view text) {
    std::istringstream ss{std::string(text)};
    return parse(ss);
}

const std::string& KeyValues::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
}

std::string KeyValues::get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    try {
        return parse_double(get(key), key);
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
}

long long KeyValues::get_int(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    try {
        return parse_integer(get(key), key);
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
}

std::vector<double> KeyValues::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    try {
        for (const auto& token : split(get(key), ',')) out.push_back(parse_double(token, key));
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
    return out;
}

std::vector<int> KeyValues::get_ints(const std::string& key, const std::vector<int>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<int> out;
    try {
        for (const auto& token : split(get(key), ',')) out.push_back(static_cast<int>(parse_integer(token, key)));
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
    return out;
}

void KeyValues::require_known(const std::set<std::string>& known) const {
    for (const auto& [key, value] : values_) {
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
}

}  // namespace efmrf
