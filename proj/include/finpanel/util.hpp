#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace finpanel {

/// Fatal pipeline error with a machine-readable code (CONFIG_INVALID,
/// MISSING_INPUT, KEY_COLLISION, ...).
class PipelineError : public std::runtime_error {
  public:
    PipelineError(std::string code, const std::string &message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string &code() const noexcept { return code_; }

  private:
    std::string code_;
};

/// Calendar date, ISO-8601 text form. No timezone, no arithmetic beyond
/// ordering; that is all the pipeline needs.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date &) const = default;
};

std::optional<Date> parse_date(std::string_view iso);
std::string to_string(const Date &d);

inline bool is_digits(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    for (char c : s) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    return true;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t v = 0;
    const char *first = s.data();
    const char *last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        return std::nullopt;
    }
    return v;
}

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// FNV-1a 64-bit. Used for stable content hashes (dedup tie-breaks); must
/// never change across releases, so it stays hand-rolled.
class Fnv1a {
  public:
    void update(std::string_view s) {
        for (unsigned char c : s) {
            hash_ ^= c;
            hash_ *= 1099511628211ULL;
        }
    }
    void update(std::int64_t v) {
        for (int i = 0; i < 8; ++i) {
            hash_ ^= static_cast<unsigned char>(v >> (i * 8));
            hash_ *= 1099511628211ULL;
        }
    }
    std::uint64_t digest() const noexcept { return hash_; }

  private:
    std::uint64_t hash_ = 14695981039346656037ULL;
};

/// Runs fn(begin, end) over [0, n) split into contiguous chunks, one per
/// worker. Results must be written to pre-sized slots indexed by position so
/// output is identical for any worker count.
void parallel_chunks(std::size_t n, int workers,
                     const std::function<void(std::size_t, std::size_t)> &fn);

} // namespace finpanel
