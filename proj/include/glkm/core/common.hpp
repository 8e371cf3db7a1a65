#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace glkm {

/// Thrown when a solver hits a non-finite loss or otherwise cannot continue.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Validates a precondition; throws std::invalid_argument with context on failure.
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_io(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

} // namespace glkm
