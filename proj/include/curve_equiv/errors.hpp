// Error taxonomy: input problems (bad files, bad parameters) versus
// statistical-procedure failures (non-convergence, singular information,
// too many dropped replicates).  The CLI maps them to exit codes 1 and 2.
#pragma once

#include <stdexcept>
#include <string>

namespace curve_equiv {

// Malformed or inconsistent user input: unreadable CSV, out-of-domain x,
// parameter/box mismatches, degenerate designs (an empty group).
class input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A well-posed request the numerics could not complete: fit non-convergence
// where convergence is required, singular information matrix, constrained-fit
// failure, excess dropped bootstrap replicates.
class procedure_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Adaptive quadrature exhausted its refinement budget.
class quadrature_error : public procedure_error {
public:
    using procedure_error::procedure_error;
};

}  // namespace curve_equiv
