#pragma once

#include <cstdio>
#include <string>

namespace proptree::detail {

// Shortest decimal representation that round-trips to the same double
// (ties between precisions resolved by printed length, so 20 beats 2e+01).
inline std::string format_double(double v) {
    char best[40];
    std::snprintf(best, sizeof(best), "%.17g", v);
    for (int prec = 1; prec <= 17; ++prec) {
        char candidate[40];
        std::snprintf(candidate, sizeof(candidate), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(candidate, "%lf", &back);
        if (back == v && std::char_traits<char>::length(candidate) <
                             std::char_traits<char>::length(best))
            std::snprintf(best, sizeof(best), "%s", candidate);
    }
    return best;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace proptree::detail
