#pragma once

#include <stdexcept>
#include <string>

namespace flowdual {

/// Error carrying a stable machine-readable code (e.g. "measure-moment-divergence").
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

namespace errc {
inline constexpr const char* moment_divergence = "measure-moment-divergence";
inline constexpr const char* domain = "domain-error";
inline constexpr const char* invalid_config = "invalid-config";
inline constexpr const char* noise_mismatch = "noise-mismatch";
inline constexpr const char* direction_mismatch = "direction-mismatch";
inline constexpr const char* barrier_hypothesis = "barrier-hypothesis-violation";
inline constexpr const char* invalid_correlation = "invalid-correlation";
inline constexpr const char* singular_system = "singular-system";
inline constexpr const char* surface_not_convex = "surface-not-convex";
inline constexpr const char* io = "io-error";
}  // namespace errc

}  // namespace flowdual
