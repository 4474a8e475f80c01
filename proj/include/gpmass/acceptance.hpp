#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gpmass {

struct CriterionOutcome {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // one-line measurement summary
  double seconds = 0.0;
};

struct AcceptanceOptions {
  int only = 0;   // 0 = run everything, otherwise the single numbered criterion
  int scale = 1;  // divides grid resolutions; discretization-limited tolerances
                  // widen by scale^2 so the suite stays honest under refinement
                  // in reverse (tolerances are resolution-aware, not elastic)
};

// Runs the acceptance suite, streaming one PASS/FAIL line per criterion to
// log. Quantitative tolerances and runtime ceilings are pinned inside; the
// suite fails honestly on any miss. Overall success = every outcome passed.
std::vector<CriterionOutcome> run_acceptance(const AcceptanceOptions& opts,
                                             std::ostream& log);

}  // namespace gpmass
