#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tdc {

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

// Shortest round-trippable decimal form; keeps text artifacts byte-stable.
std::string format_double(double v);

// key = value file with '#' comments. Values keep their raw text; typed
// accessors parse on demand.
class KeyValueFile {
public:
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

private:
    std::map<std::string, std::string> values_;
};

KeyValueFile parse_key_value_file(std::istream& in);
KeyValueFile load_key_value_file(const std::string& path);

}  // namespace tdc
