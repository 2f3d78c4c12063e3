#ifndef ECSIM_STATE_KERNELS_HPP
#define ECSIM_STATE_KERNELS_HPP

#include <array>
#include <cmath>
#include <complex>

#include "errors.hpp"
#include "special_math.hpp"

// Closed-form amplitude kernels for the homodyne branches: ideal rotation
// coefficients on the span {|a>, |-a>}, the noiseless amplifier acting on
// coherent amplitudes, and the position-representation branch amplitudes
// for ideal (Gamma) and Kerr-cascade effective (Pi) rotations.

namespace ecsim {

using complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Amplifier model
// ---------------------------------------------------------------------------

enum class amplifier_kind { none, full_exp, first_order };

struct amplifier_model {
    amplifier_kind kind = amplifier_kind::none;
    double gain = 1.0;

    void validate() const {
        if (gain < 1.0) throw invalid_gain("amplifier gain must be >= 1");
    }
    /// Gain actually applied; kind none behaves exactly like g = 1.
    double effective_gain() const {
        return kind == amplifier_kind::none ? 1.0 : gain;
    }
};

/// exp[(g-1) n] maps |alpha> to |alpha e^{g-1}>.
inline double full_amp_amplitude(double alpha, double g) {
    if (g < 1.0) throw invalid_gain("full_amp_amplitude: g must be >= 1");
    return alpha * std::exp(g - 1.0);
}

// ---------------------------------------------------------------------------
// Ideal rotation
// ---------------------------------------------------------------------------

struct rotation_matrix2 {
    // acts on the ordered basis (|alpha>, |-alpha>)
    std::array<std::array<double, 2>, 2> m;
};

/// [[cos t, sin t], [sin t, -cos t]]: symmetric involution, det = -1.
inline rotation_matrix2 ideal_rotation(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {{{{c, s}, {s, -c}}}};
}

// ---------------------------------------------------------------------------
// Ideal-rotation branch kernels
// ---------------------------------------------------------------------------

/// xi_{+a}(y) (branch=+1) or xi_{-a}(y) (branch=-1):
/// e^{-(y -/+ a)^2} [1 + (g-1)(+/- 2 a y - a^2)].
inline double xi_kernel(double y, int branch, double alpha, double g) {
    const double s = branch >= 0 ? 1.0 : -1.0;
    return std::exp(-(y - s * alpha) * (y - s * alpha)) *
           (1.0 + (g - 1.0) * (s * 2.0 * alpha * y - alpha * alpha));
}

/// Gamma^g_{+/-a}(x, theta) = pi^{-1/4} [xi_{-/+a}(x) sin(theta)
///                             +/- xi_{+/-a}(x) cos(theta)].
inline double gamma_branch(double x, double theta, double alpha, double g,
                           int branch) {
    const double s = branch >= 0 ? 1.0 : -1.0;
    const double xi_same = xi_kernel(x, branch, alpha, g);
    const double xi_opp = xi_kernel(x, -branch, alpha, g);
    return (xi_opp * std::sin(theta) + s * xi_same * std::cos(theta)) /
           std::pow(pi, 0.25);
}

// ---------------------------------------------------------------------------
// Effective (Kerr-cascade) rotation
// ---------------------------------------------------------------------------

struct coherent_component {
    complex coefficient;
    complex amplitude;
};

/// The cascade e^{-i pi n^2/2} D(i theta/alpha) e^{-i pi n^2/2} maps each
/// branch of {|a>, |-a>} to four coherent components with displaced
/// amplitudes +/-chi_+, +/-chi_- where chi_+/- = alpha +/- i theta/alpha.
/// Coefficients are exact up to one branch-independent global phase.
inline std::array<coherent_component, 4>
effective_rotation_components(double theta, double alpha, int branch) {
    if (alpha == 0.0)
        throw zero_amplitude("effective rotation undefined at alpha = 0");
    const complex i_unit(0.0, 1.0);
    const complex chi_p = complex(alpha, theta / alpha);
    const complex chi_m = complex(alpha, -theta / alpha);
    const complex ep = std::exp(i_unit * theta);
    const complex em = std::exp(-i_unit * theta);
    if (branch >= 0) {
        return {{{0.5 * ep, chi_p},
                 {0.5 * i_unit * ep, -chi_p},
                 {0.5 * i_unit * em, -chi_m},
                 {-0.5 * em, chi_m}}};
    }
    return {{{0.5 * i_unit * ep, chi_p},
             {-0.5 * ep, -chi_p},
             {0.5 * em, -chi_m},
             {0.5 * i_unit * em, chi_m}}};
}

/// Overlap of two coherent states, <b1|b2> = exp[-|b1|^2/2 - |b2|^2/2
/// + conj(b1) b2].
inline complex coherent_overlap(complex b1, complex b2) {
    return std::exp(-0.5 * std::norm(b1) - 0.5 * std::norm(b2) +
                    std::conj(b1) * b2);
}

/// xi^{+/-}_{chi}(x) = e^{-(x -/+ chi)^2} [1 + (g-1)(+/- 2 chi x - chi^2)],
/// the first-order-amplified kernel at the complex displaced amplitude.
inline complex xi_complex_kernel(double x, complex chi, double g, int branch) {
    const complex b = (branch >= 0 ? 1.0 : -1.0) * chi;
    return std::exp(-(x - b) * (x - b)) *
           (1.0 + (g - 1.0) * (2.0 * b * x - b * b));
}

namespace detail {

// <x|(1 + (g-1) n)|b> up to the constant (2/pi)^{1/4}: the Gaussian kernel
// carries the amplitude-dependent normalization-and-phase factor
// exp[(b^2 - |b|^2)/2], folded into the exponent to avoid overflow when
// Im(b) is large.
inline complex position_kernel(double x, complex b, double g) {
    const complex expo = -(x - b) * (x - b) + 0.5 * (b * b - std::norm(b));
    return std::exp(expo) * (1.0 + (g - 1.0) * (2.0 * b * x - b * b));
}

} // namespace detail

/// Pi^g_{+/-a}(x, theta) = <x| G V(theta) |+/-a> up to one global constant
/// shared by both branches: the four-component expansion of the effective
/// rotation with first-order amplified position kernels.
inline complex pi_branch(double x, double theta, double alpha, double g,
                         int branch) {
    const auto comps = effective_rotation_components(theta, alpha, branch);
    complex acc = 0.0;
    for (const auto& c : comps)
        acc += c.coefficient * detail::position_kernel(x, c.amplitude, g);
    return acc / std::pow(pi, 0.25);
}

/// Same as pi_branch but for the full amplifier: exp[(g-1) n] rescales each
/// coherent component amplitude by e^{g-1} with the corresponding
/// amplitude-dependent weight (branch independent here, kept for
/// exactness of relative weights).
inline complex pi_branch_full_amp(double x, double theta, double alpha,
                                  double g, int branch) {
    const auto comps = effective_rotation_components(theta, alpha, branch);
    const double scale = std::exp(g - 1.0);
    complex acc = 0.0;
    for (const auto& c : comps) {
        const complex b = c.amplitude * scale;
        // exp[(g-1)n]|beta> = e^{(|beta e^{g-1}|^2 - |beta|^2)/2} |beta e^{g-1}>
        const double w =
            0.5 * (std::norm(b) - std::norm(c.amplitude));
        acc += c.coefficient * std::exp(w) * detail::position_kernel(x, b, 1.0);
    }
    return acc / std::pow(pi, 0.25);
}

} // namespace ecsim

#endif
