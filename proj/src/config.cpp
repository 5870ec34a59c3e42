#include "rieszlab/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rieszlab/textio.hpp"

namespace rieszlab {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig out;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        out.set(section, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return out;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream buffer;
    buffer << is.rdbuf();
    return parse(buffer.str());
}

std::string RunConfig::to_text() const {
    std::string out;
    std::string current;
    bool first = true;
    for (const auto& e : entries_) {
        if (first || e.section != current) {
            if (!first) out += "\n";
            out += "[" + e.section + "]\n";
            current = e.section;
            first = false;
        }
        out += e.key + " = " + e.value + "\n";
    }
    return out;
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
    for (const auto& e : entries_) {
        if (e.section == section && e.key == key) return true;
    }
    return false;
}

const std::string& RunConfig::get(const std::string& section, const std::string& key) const {
    for (const auto& e : entries_) {
        if (e.section == section && e.key == key) return e.value;
    }
    throw std::runtime_error("config is missing [" + section + "] " + key);
}

std::string RunConfig::get_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double RunConfig::number(const std::string& section, const std::string& key,
                         double fallback) const {
    if (!has(section, key)) return fallback;
    return parse_double(get(section, key));
}

long RunConfig::integer(const std::string& section, const std::string& key, long fallback) const {
    if (!has(section, key)) return fallback;
    return parse_long(get(section, key));
}

namespace {

std::vector<std::string> split_commas(const std::string& value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        std::size_t comma = value.find(',', start);
        if (comma == std::string::npos) comma = value.size();
        const std::string piece = trim(value.substr(start, comma - start));
        if (!piece.empty()) out.push_back(piece);
        start = comma + 1;
    }
    return out;
}

} // namespace

std::vector<double> RunConfig::number_list(const std::string& section, const std::string& key,
                                           const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<double> out;
    for (const auto& piece : split_commas(get(section, key))) out.push_back(parse_double(piece));
    return out;
}

std::vector<long> RunConfig::integer_list(const std::string& section, const std::string& key,
                                          const std::vector<long>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<long> out;
    for (const auto& piece : split_commas(get(section, key))) out.push_back(parse_long(piece));
    return out;
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    for (auto& e : entries_) {
        if (e.section == section && e.key == key) {
            e.value = value;
            return;
        }
    }
    entries_.push_back({section, key, value});
}

} // namespace rieszlab
