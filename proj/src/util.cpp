#include "finpanel/util.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace finpanel {

std::optional<Date> parse_date(std::string_view iso) {
    // YYYY-MM-DD
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        return std::nullopt;
    }
    auto y = parse_int(iso.substr(0, 4));
    auto m = parse_int(iso.substr(5, 2));
    auto d = parse_int(iso.substr(8, 2));
    if (!y || !m || !d) {
        return std::nullopt;
    }
    if (*m < 1 || *m > 12 || *d < 1 || *d > 31) {
        return std::nullopt;
    }
    return Date{static_cast<int>(*y), static_cast<int>(*m), static_cast<int>(*d)};
}

std::string to_string(const Date &d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

void parallel_chunks(std::size_t n, int workers,
                     const std::function<void(std::size_t, std::size_t)> &fn) {
    if (n == 0) {
        return;
    }
    const std::size_t w = std::max(1, workers);
    if (w == 1 || n < 2 * w) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(w);
    const std::size_t chunk = (n + w - 1) / w;
    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) {
            break;
        }
        threads.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto &th : threads) {
        th.join();
    }
}

} // namespace finpanel
