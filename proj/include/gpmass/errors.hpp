#pragma once

#include <stdexcept>
#include <string>

namespace gpmass {

// Fields on different grids were combined.
struct MismatchedGrid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative solver exhausted its budget before reaching tolerance.
struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Constraint data is outside the feasible set (alpha below threshold, bad masses).
struct InfeasibleConstraint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scattering parameters violate every nondegeneracy clause; solving is refused.
struct DegenerateRegime : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Constraint retraction Newton could not be solved at this iterate.
struct RetractFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Multiplier least-squares normal equations are rank-deficient.
struct SingularFit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Physical rescaling requested with gamma <= 0.
struct NonpositiveGamma : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// theta outside (0, pi/2); the trivial branch degenerates at multiples of pi/2.
struct ThetaDegenerate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Right-hand side of the kernel solve is not orthogonal to the eigenfunction.
struct RhsNotOrthogonal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Query outside the data range (interpolation, branch lookup).
struct OutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inner linear solve failed to reach its tolerance.
struct LinearSolveFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad or missing configuration (file syntax, missing keys, invalid values).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem / format errors on field dumps and outputs.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gpmass
