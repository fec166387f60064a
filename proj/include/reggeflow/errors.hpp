#pragma once

#include <stdexcept>
#include <string>

namespace rrf {

/// Base class for all reggeflow errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateSimplex : Error {
    using Error::Error;
};

struct DuplicateTetrahedron : Error {
    using Error::Error;
};

struct MissingEdgeLength : Error {
    using Error::Error;
};

/// A simplex whose Cayley-Menger determinant is negative beyond tolerance:
/// the given squared lengths cannot be realized in Euclidean space.
struct NonRealizable : Error {
    using Error::Error;
};

struct DegenerateFace : Error {
    using Error::Error;
};

struct ZeroDualArea : Error {
    using Error::Error;
};

struct ZeroWeightSum : Error {
    using Error::Error;
};

struct MatrixSingular : Error {
    using Error::Error;
};

struct StepTooSmall : Error {
    using Error::Error;
};

struct CollapseExceeded : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace rrf
