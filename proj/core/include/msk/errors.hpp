#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace msk {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidMatrix : Error { using Error::Error; };
struct SpeciesTooSmall : Error { using Error::Error; };
struct DegenerateModel : Error { using Error::Error; };
struct SensitivitySingular : Error { using Error::Error; };
struct TooLargeForExact : Error { using Error::Error; };
struct InvalidGamma : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

/// Fixed-point iteration ran out of iterations; carries the last iterate.
struct NoConvergence : Error {
    NoConvergence(const std::string& msg, std::vector<double> iterate, double res)
        : Error(msg), last_iterate(std::move(iterate)), residual(res) {}
    std::vector<double> last_iterate;
    double residual;
};

} // namespace msk
