#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace metric_forest {

/// Raised when input data violates a contract (bad matrix, parse failure).
/// CLI maps this to exit code 2.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised by instrumented (--assert) self-checks. CLI maps this to exit code 3.
class internal_error : public std::logic_error {
public:
    explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Exact power of two as a double, valid for |i| <= 1023.
inline double pow2(std::int64_t i) {
    return std::ldexp(1.0, static_cast<int>(i));
}

/// Smallest integer i with 2^i >= x, for x > 0.
inline std::int64_t ceil_log2(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("ceil_log2: x must be positive");
    int e = 0;
    double m = std::frexp(x, &e);  // x = m * 2^e, m in [0.5, 1)
    if (m == 0.5) return e - 1;
    return e;
}

/// Formats a double with 17 significant digits so that reading it back
/// reproduces the same bits. Infinity prints as the literal "inf".
inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s) {
    if (s == "inf" || s == "+inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r')) ++pos;
    if (pos != s.size()) throw data_error("malformed number: '" + s + "'");
    return v;
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Results must be
/// written to per-index slots; the split is by contiguous blocks, so the
/// outcome does not depend on the schedule.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(count));
    std::vector<std::thread> pool;
    pool.reserve(n);
    std::size_t chunk = (count + n - 1) / n;
    for (unsigned t = 0; t < n; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace metric_forest
