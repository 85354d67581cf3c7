#ifndef VOXMARK_CSV_HPP
#define VOXMARK_CSV_HPP

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "voxmark/errors.hpp"

namespace voxmark::csv {

// Minimal CSV handling for the toolkit's own formats: no quoting, no
// embedded separators. Field names are validated on write instead.

inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
        out.back().pop_back();
    return out;
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw FormatError(context + ": cannot parse number '" + std::string(s) + "'");
    return v;
}

inline long parse_long(std::string_view s, const std::string& context) {
    long v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw FormatError(context + ": cannot parse integer '" + std::string(s) + "'");
    return v;
}

// 17 significant digits: enough for exact double round trips.
inline std::string format_double(double v) {
    char buf[40];
    int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

inline void check_field_name(const std::string& name) {
    if (name.empty())
        throw ValidationError("empty CSV field name");
    for (char c : name) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r')
            throw ValidationError("CSV field name contains a separator or quote: '" + name + "'");
    }
}

} // namespace voxmark::csv

#endif
