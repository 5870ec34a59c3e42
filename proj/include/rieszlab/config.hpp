#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rieszlab {

/// Flat key=value run configuration with section headers. Entries keep
/// their order, so parse -> to_text -> parse is lossless.
class RunConfig {
public:
    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::string& path);
    std::string to_text() const;

    bool has(const std::string& section, const std::string& key) const;
    const std::string& get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double number(const std::string& section, const std::string& key, double fallback) const;
    long integer(const std::string& section, const std::string& key, long fallback) const;
    std::vector<double> number_list(const std::string& section, const std::string& key,
                                    const std::vector<double>& fallback) const;
    std::vector<long> integer_list(const std::string& section, const std::string& key,
                                   const std::vector<long>& fallback) const;
    void set(const std::string& section, const std::string& key, const std::string& value);

    bool operator==(const RunConfig& other) const { return entries_ == other.entries_; }

private:
    struct Entry {
        std::string section;
        std::string key;
        std::string value;
        bool operator==(const Entry&) const = default;
    };
    std::vector<Entry> entries_;
};

} // namespace rieszlab
