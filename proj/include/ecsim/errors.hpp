#ifndef ECSIM_ERRORS_HPP
#define ECSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ecsim {

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive quadrature ran out of panel budget before reaching the tolerance.
struct non_convergence : numeric_error {
    using numeric_error::numeric_error;
};

// Root bracketing failed: f(lo) and f(hi) have the same sign.
struct no_sign_change : numeric_error {
    using numeric_error::numeric_error;
};

struct invalid_gain : numeric_error {
    using numeric_error::numeric_error;
};

struct invalid_amplitudes : numeric_error {
    using numeric_error::numeric_error;
};

// Effective rotations diverge at alpha = 0 (displacement i*theta/alpha).
struct zero_amplitude : numeric_error {
    using numeric_error::numeric_error;
};

// No closed-form correlator covers the requested scenario.
struct unsupported_closed_form : numeric_error {
    using numeric_error::numeric_error;
};

struct truncation_too_small : numeric_error {
    using numeric_error::numeric_error;
};

struct zero_norm : numeric_error {
    using numeric_error::numeric_error;
};

} // namespace ecsim

#endif
