#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmix {

/// Exact binomial coefficient C(n, k) as a double (exact for the small
/// dimensions used here; n is a matrix dimension, not a grid size).
inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    if (k > n - k) k = n - k;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    // values are ratios of consecutive integers; round to the exact integer
    return static_cast<double>(static_cast<long long>(r + 0.5));
}

/// Thrown when an iterate leaves the admissibility cone. Carries the flat
/// indices of the violating grid points so the solver can report them.
class admissibility_error : public std::domain_error {
public:
    admissibility_error(const std::string& msg, std::vector<std::size_t> points)
        : std::domain_error(msg), points_(std::move(points)) {}

    const std::vector<std::size_t>& points() const { return points_; }

private:
    std::vector<std::size_t> points_;
};

/// Thrown when a problem definition fails its own verification
/// (inadmissible subsolution, inequality violation, boundary mismatch).
class construction_error : public std::runtime_error {
public:
    construction_error(const std::string& msg, std::vector<std::size_t> points = {})
        : std::runtime_error(msg), points_(std::move(points)) {}

    const std::vector<std::size_t>& points() const { return points_; }

private:
    std::vector<std::size_t> points_;
};

/// FNV-1a 64-bit hash, used for artifact content hashes in run manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<std::uint64_t>(p[i]);
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

enum class LogLevel : int { off = 0, error = 1, info = 2, debug = 3 };

/// Log level from HMIX_LOG ("off", "error", "info", "debug"); default "error".
inline LogLevel log_level() {
    static LogLevel lvl = [] {
        const char* e = std::getenv("HMIX_LOG");
        if (!e) return LogLevel::error;
        if (std::strcmp(e, "off") == 0) return LogLevel::off;
        if (std::strcmp(e, "info") == 0) return LogLevel::info;
        if (std::strcmp(e, "debug") == 0) return LogLevel::debug;
        return LogLevel::error;
    }();
    return lvl;
}

inline void log_msg(LogLevel lvl, const std::string& msg) {
    if (static_cast<int>(lvl) <= static_cast<int>(log_level())) {
        const char* tag = lvl == LogLevel::error ? "error" : (lvl == LogLevel::info ? "info" : "debug");
        std::fprintf(stderr, "[hmix:%s] %s\n", tag, msg.c_str());
    }
}

} // namespace hmix
