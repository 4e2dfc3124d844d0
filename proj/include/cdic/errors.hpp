#pragma once

#include <stdexcept>
#include <string>

namespace cdic {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File could not be read/written or has an unsupported format.
struct IoError : Error {
    using Error::Error;
};

/// Invalid user-facing configuration (bad key, seed off grid, ROI too large, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// Subset intensity variance below the usable floor.
struct DegenerateSubsetError : Error {
    using Error::Error;
};

/// Coordinate outside an interpolant's evaluation region or a field's grid.
struct OutOfDomainError : Error {
    using Error::Error;
};

/// Every seed of a frame failed to correlate.
struct FrameFailureError : Error {
    using Error::Error;
};

/// MAE requested on a field with no valid points.
struct NoValidPointsError : Error {
    using Error::Error;
};

/// CTOD probe point falls outside the valid field region.
struct ProbeError : Error {
    using Error::Error;
};

/// No contiguous CTOD plateau of the required size; carries the probe-grid dump.
struct NoPlateauError : Error {
    std::string grid_dump;
    NoPlateauError(const std::string& msg, std::string dump)
        : Error(msg), grid_dump(std::move(dump)) {}
};

}  // namespace cdic
