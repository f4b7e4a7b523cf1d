#pragma once

#include <stdexcept>
#include <string>

namespace qtl {

/// Invalid run configuration (unknown key, bad value, violated invariant).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// The integration itself failed: probability leaked to the grid edges,
/// a classical orbit diverged, or the separation tracker saw no separation.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double t)
        : std::runtime_error(what), time_(t) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace qtl
