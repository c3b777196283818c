#pragma once

// Shared aliases, error types and small numeric helpers used across the library.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace locap {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr double kPi = 3.14159265358979323846;

using cxd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Raised for invalid arguments and malformed inputs (CLI maps this to exit code 1).
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when a computation cannot produce a trustworthy result
// (CLI maps this to exit code 2).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double log2_safe(double x) { return std::log2(x); }

// x * log2(x) with the 0 * log 0 = 0 convention.
inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

inline double factorial(int k) {
    // Occupation counts stay tiny (photon sectors <= 8 in practice); a loop is exact
    // in double up to 20!.
    if (k < 0) throw InputError("factorial: negative argument");
    if (k > 20) throw InputError("factorial: argument too large for exact double");
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// Deterministic normal deviates.  std::normal_distribution is implementation
// defined; Box-Muller on top of the pinned mt19937_64 stream keeps runs
// reproducible across standard libraries.
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : eng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = unit_(eng_);
        double u2 = unit_(eng_);
        // avoid log(0)
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double uniform() { return unit_(eng_); }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// FNV-1a over a string; used to stamp outputs with a config fingerprint.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string to_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// Fixed-precision float formatting for CSV/tables: deterministic across runs.
inline std::string format_double(double x, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return std::string(buf);
}

}  // namespace locap
