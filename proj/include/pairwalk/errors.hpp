#pragma once

#include <stdexcept>
#include <string>

namespace pairwalk {

// All library errors derive from Error so callers can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonnegativityViolation : Error { using Error::Error; };
struct DegenerateModel        : Error { using Error::Error; };
struct InvalidParameter       : Error { using Error::Error; };
struct DomainError            : Error { using Error::Error; };

// transforms
struct BranchAmbiguity        : Error { using Error::Error; };
struct PoleHit                : Error { using Error::Error; };
struct TailTruncationError    : Error { using Error::Error; };

// numerics
struct QuadratureNonConvergence : Error { using Error::Error; };
struct UnstableInversion        : Error { using Error::Error; };

// oracle
struct TruncationDominates    : Error { using Error::Error; };

// simulator
struct CapacityViolation      : Error { using Error::Error; };
struct InsufficientSamples    : Error { using Error::Error; };

} // namespace pairwalk
