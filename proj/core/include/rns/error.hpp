#pragma once

#include <stdexcept>
#include <string>

namespace rns {

// Tensor shape disagreement. There is no broadcasting anywhere in the
// engine, so every mismatch is a hard error naming the offending shapes.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Out-of-range element, row, or convolution window access.
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// An operation was used against its contract (non-scalar loss, a tape run
// backward twice, a selection replay that ran dry, ...).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// A forward value turned NaN/Inf.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration, detected before any work starts.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// File parsing or IO failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training-time failure (NaN loss and friends).
struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rns
