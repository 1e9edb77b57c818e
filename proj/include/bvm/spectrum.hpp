#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bvm/diagram.hpp"
#include "bvm/numeration.hpp"
#include "bvm/schedule.hpp"

namespace bvm {

using Complex = std::complex<double>;

/// Everything the fibered iteration needs: the 2x2 exponent schedule (level
/// matrices, last repeated), the probability schedule, iteration budget and
/// escape radius. radius == 0 means "derive it via escape_radius()".
struct SpectralParams {
    std::vector<std::array<std::int64_t, 4>> coeffs;  // (a,b,c,d) per level
    ProbSchedule schedule = ProbSchedule::constant(Rational(1, 2));
    int budget = 64;
    double radius = 0.0;
    bool radius_is_analytic = false;
    double pt_stall_epsilon = 1e-12;  // per-level DP gain below this counts as stalled
    int pt_stall_levels = 8;

    static SpectralParams from_diagram(const BratteliDiagram& d, ProbSchedule ps);

    const std::array<std::int64_t, 4>& coeff(int level) const;  // level >= 1
    bool stationary() const { return coeffs.size() == 1; }
    std::int64_t det(int level = 1) const;
    bool ab_equals_cd() const;  // a+b == c+d at every level
    /// det < 0 and bc > (ad-bc)^2 at the first level (stationary hypothesis
    /// of the nesting lemma).
    bool nesting_hypothesis() const;
    double min_p() const;  // infimum of the schedule over its cached horizon
    void validate() const;
};

enum class SetKind { F, E, PT };

SetKind parse_set_kind(const std::string& s);
std::string to_string(SetKind k);

struct MembershipResult {
    Complex lambda{0.0, 0.0};
    SetKind kind = SetKind::F;
    bool escaped = false;
    int escape_index = -1;    // first n with the tracked norm > R (0 = seed)
    int u_escape_index = -1;  // per-component diagnostics
    int w_escape_index = -1;
    double log_growth = 0.0;  // PT: digit-product log supremum; F/E: log max |u|
    bool stabilized = false;  // PT digit DP converged within budget
    double max_abs_u = 0.0;   // sup |u_{F_n}| while finite
    double radius = 0.0;
    int budget = 0;
};

/// One step of the fibered map: from (u_{F_{n-1}}, w_{F_{n-1}}) to index n
/// (uses p_{n+1} and the level-n exponents).
std::pair<Complex, Complex> uw_step(Complex u, Complex w, int n, const SpectralParams& params);

/// Seed value u_{F_0} = w_{F_0} = (lambda - (1 - p_1)) / p_1.
Complex seed_value(Complex lambda, double p1);

/// Escape test on the subsequence u_{F_n} alone.
MembershipResult f_membership(Complex lambda, const SpectralParams& params);

/// Escape test on the joint pair (u_{F_n}, w_{F_n}) (sup norm).
MembershipResult e_membership(Complex lambda, const SpectralParams& params);

/// Point-spectrum surrogate: escape necessity on u_{F_n} plus a two-state
/// dynamic program bounding log sup_n |u_n| over the digit automaton.
MembershipResult pt_membership(Complex lambda, const SpectralParams& params);

/// Direct escape-time iteration of z -> (z^exponent - (1-p)) / p from the
/// same seed; the classical one-variable route the 2x2 recursion collapses
/// to when all matrix rows agree.
MembershipResult kt_membership(Complex lambda, int exponent, const SpectralParams& params);

struct EscapeRadius {
    double value = 0.0;
    bool analytic = false;  // backed by the nesting bound, not probing
};

/// Analytic radius when det < 0 and bc > (ad-bc)^2 (doubling until one
/// escape step certifies divergence); otherwise a probe-stabilized radius
/// flagged heuristic.
EscapeRadius escape_radius(const SpectralParams& params);

/// Eigenvector coordinate u_n as the digit product over u_{F_i}, w_{F_i}.
Complex u_n_value(Complex lambda, const DigitString& ds, const SpectralParams& params);

/// max_N |(S z)_N - lambda z_N| over rows N < rows with z_N = u_N(lambda).
double eigen_residual(Complex lambda, std::shared_ptr<const BratteliDiagram> d,
                      const ProbSchedule& ps, std::size_t rows);

struct CriticalEscape {
    bool applicable = false;
    bool escaped = false;
    int escape_index = -1;
    std::string reason;  // why inapplicable, when it is
};

/// Orbit of the critical value (1-p)/p under the fibered iteration; escape
/// certifies the bounded set is disconnected (constant p < 1/2, det < 0,
/// bc > (ad-bc)^2).
CriticalEscape critical_escape_test(const SpectralParams& params);

struct GridSpec {
    double re_min = -2, re_max = 2;
    double im_min = -2, im_max = 2;
    int width = 512, height = 512;
    SetKind kind = SetKind::F;

    Complex pixel(int x, int y) const;
    void validate() const;
};

/// Parses "re+imi" literals: "1.0+0.5i", "-0.25i", "2".
Complex parse_complex(const std::string& text);

/// Parses "REMIN,REMAXxIMMIN,IMMAX:WxH", e.g. "-2,2x-2,2:512x512".
GridSpec parse_grid(const std::string& text);

struct Raster {
    int width = 0, height = 0;
    SetKind kind = SetKind::F;
    int budget = 0;
    std::vector<std::uint32_t> cells;  // 0 = bounded, else escape index + 1

    std::uint32_t at(int x, int y) const {
        return cells[static_cast<std::size_t>(y) * width + x];
    }
};

/// Per-pixel membership over the grid; rows are rendered in parallel tiles,
/// output independent of the schedule.
Raster render_set(const GridSpec& grid, const SpectralParams& params);

/// Same grid walked with the one-variable direct iteration.
Raster render_kt(const GridSpec& grid, int exponent, const SpectralParams& params);

/// Binary PGM (P5, maxval 255): bounded pixels black, escapes shaded by index.
void write_pgm(std::ostream& os, const Raster& r);
/// PPM (P6) color variant with a fixed integer palette.
void write_ppm(std::ostream& os, const Raster& r);

/// Orbit of z in C^l under the general fibered maps built from the given
/// incidence matrices (last one repeated); sup-norm escape test.
MembershipResult fibered_orbit_general(std::vector<Complex> z,
                                       const std::vector<IntMatrix>& matrices,
                                       const ProbSchedule& ps, int budget, double radius);

}  // namespace bvm
