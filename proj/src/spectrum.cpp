#include "bvm/spectrum.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "bvm/process.hpp"

namespace bvm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Monomial u^a w^b as a flat left-to-right product. The order matters: it
// makes u^a w^b and u^c w^d bitwise identical whenever u == w and
// a+b == c+d, and matches the one-variable z^e route exactly.
Complex monomial(Complex u, Complex w, std::int64_t a, std::int64_t b) {
    Complex acc(1.0, 0.0);
    for (std::int64_t i = 0; i < a; ++i) acc *= u;
    for (std::int64_t i = 0; i < b; ++i) acc *= w;
    return acc;
}

bool crossed(Complex z, double radius) {
    const double n = std::abs(z);
    return !std::isfinite(n) || n > radius;
}

}  // namespace

SpectralParams SpectralParams::from_diagram(const BratteliDiagram& d, ProbSchedule ps) {
    if (!d.is_2x2()) throw std::invalid_argument("spectral parameters need a 2x2 diagram");
    SpectralParams params;
    for (int level = 1; level <= static_cast<int>(d.explicit_levels()); ++level)
        params.coeffs.push_back({d.a(level), d.b(level), d.c(level), d.d(level)});
    params.schedule = std::move(ps);
    params.validate();
    return params;
}

const std::array<std::int64_t, 4>& SpectralParams::coeff(int level) const {
    if (level < 1) throw std::invalid_argument("coefficient level must be >= 1");
    const std::size_t i =
        std::min<std::size_t>(static_cast<std::size_t>(level) - 1, coeffs.size() - 1);
    return coeffs[i];
}

std::int64_t SpectralParams::det(int level) const {
    const auto& m = coeff(level);
    return m[0] * m[3] - m[1] * m[2];
}

bool SpectralParams::ab_equals_cd() const {
    for (const auto& m : coeffs)
        if (m[0] + m[1] != m[2] + m[3]) return false;
    return true;
}

bool SpectralParams::nesting_hypothesis() const {
    if (!stationary()) return false;
    const auto& m = coeffs.front();
    const std::int64_t dt = m[0] * m[3] - m[1] * m[2];
    return dt < 0 && m[1] * m[2] > dt * dt;
}

double SpectralParams::min_p() const {
    switch (schedule.kind()) {
        case ProbSchedule::Kind::Geometric:
            return 0.0;  // infimum over all levels
        case ProbSchedule::Kind::OneMinusGeometric:
            return schedule.p_double(1);
        default: {
            double m = 1.0;
            for (std::size_t j = 1; j <= 96; ++j) m = std::min(m, schedule.p_double(j));
            return m;
        }
    }
}

void SpectralParams::validate() const {
    if (coeffs.empty()) throw std::invalid_argument("spectral parameters: no coefficients");
    for (const auto& m : coeffs) {
        if (m[0] < 1 || m[1] < 1 || m[2] < 1 || m[3] < 0)
            throw std::invalid_argument(
                "spectral parameters need a, b, c >= 1 and d >= 0 at every level");
    }
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    if (radius < 0 || radius > 1e50) throw std::invalid_argument("radius out of range");
}

SetKind parse_set_kind(const std::string& s) {
    if (s == "F" || s == "f") return SetKind::F;
    if (s == "E" || s == "e") return SetKind::E;
    if (s == "PT" || s == "pt" || s == "Pt") return SetKind::PT;
    throw std::invalid_argument("set kind must be one of F, E, PT");
}

std::string to_string(SetKind k) {
    switch (k) {
        case SetKind::F: return "F";
        case SetKind::E: return "E";
        case SetKind::PT: return "PT";
    }
    return "F";
}

Complex seed_value(Complex lambda, double p1) { return (lambda - (1.0 - p1)) / p1; }

std::pair<Complex, Complex> uw_step(Complex u, Complex w, int n, const SpectralParams& params) {
    const auto& m = params.coeff(n);
    const double p = params.schedule.p_double(static_cast<std::size_t>(n) + 1);
    const Complex nu = (monomial(u, w, m[0], m[1]) - (1.0 - p)) / p;
    const Complex nw = (monomial(u, w, m[2], m[3]) - (1.0 - p)) / p;
    return {nu, nw};
}

namespace {

double resolve_radius(const SpectralParams& params) {
    if (params.radius > 0) return params.radius;
    return escape_radius(params).value;
}

// Shared F/E iteration: tracks both components and their first crossings.
MembershipResult joint_membership(Complex lambda, const SpectralParams& params, SetKind kind) {
    MembershipResult res;
    res.lambda = lambda;
    res.kind = kind;
    res.budget = params.budget;
    res.radius = resolve_radius(params);

    Complex u = seed_value(lambda, params.schedule.p_double(1));
    Complex w = u;
    double max_u = 0.0;
    for (int n = 0; n <= params.budget; ++n) {
        if (n > 0) {
            auto [nu, nw] = uw_step(u, w, n, params);
            u = nu;
            w = nw;
        }
        const double au = std::abs(u);
        if (std::isfinite(au)) max_u = std::max(max_u, au);
        if (res.u_escape_index < 0 && crossed(u, res.radius)) res.u_escape_index = n;
        if (res.w_escape_index < 0 && crossed(w, res.radius)) res.w_escape_index = n;
        if (res.u_escape_index >= 0 && res.w_escape_index >= 0) break;
        if (!std::isfinite(std::abs(u)) && !std::isfinite(std::abs(w))) break;
    }

    const int joint = (res.u_escape_index < 0 || res.w_escape_index < 0)
                          ? std::max(res.u_escape_index, res.w_escape_index)
                          : std::min(res.u_escape_index, res.w_escape_index);
    const int tracked = (kind == SetKind::F) ? res.u_escape_index : joint;
    res.escaped = tracked >= 0;
    res.escape_index = tracked;
    res.max_abs_u = max_u;
    res.log_growth = max_u > 0 ? std::log(max_u) : -kInf;
    return res;
}

}  // namespace

MembershipResult f_membership(Complex lambda, const SpectralParams& params) {
    return joint_membership(lambda, params, SetKind::F);
}

MembershipResult e_membership(Complex lambda, const SpectralParams& params) {
    return joint_membership(lambda, params, SetKind::E);
}

MembershipResult pt_membership(Complex lambda, const SpectralParams& params) {
    MembershipResult res;
    res.lambda = lambda;
    res.kind = SetKind::PT;
    res.budget = params.budget;
    res.radius = resolve_radius(params);

    // B1/B2: max over automaton-valid digit prefixes ending at vertex 1/2 of
    // the accumulated log |u_{F_i}^d1 w_{F_i}^d2| products. sup_n log|u_n|
    // over strings of length <= j is exactly B1 after level j.
    Complex u = seed_value(lambda, params.schedule.p_double(1));
    Complex w = u;
    double b1 = 0.0, b2 = 0.0;
    int stall_streak = 0;
    double max_u = 0.0;
    const double dp_blowup = std::log(1e100);

    for (int level = 1; level <= params.budget; ++level) {
        const double au = std::abs(u);
        if (std::isfinite(au)) max_u = std::max(max_u, au);
        if (res.u_escape_index < 0 && crossed(u, res.radius)) {
            res.u_escape_index = level - 1;
            break;  // necessity: u_{F_n} is a subsequence of u_n
        }

        const auto& m = params.coeff(level);
        const double lu = std::log(std::abs(u));
        const double lw = std::log(std::abs(w));
        const double g11 = static_cast<double>(m[0] - 1) * std::max(lu, 0.0);
        const double g21 = static_cast<double>(m[0]) * lu +
                           static_cast<double>(m[1] - 1) * std::max(lw, 0.0);
        const double g12 = static_cast<double>(m[2] - 1) * std::max(lu, 0.0);
        const double g22 = m[3] > 0 ? static_cast<double>(m[2]) * lu +
                                          static_cast<double>(m[3] - 1) * std::max(lw, 0.0)
                                    : -kInf;
        const double n1 = std::max(b1 + g11, b2 + g21);
        const double n2 = std::max(b1 + g12, m[3] > 0 ? b2 + g22 : -kInf);
        const double d1 = n1 - b1;
        const double d2 = (std::isfinite(n2) || std::isfinite(b2)) ? n2 - b2 : 0.0;
        if (d1 < params.pt_stall_epsilon && (!std::isfinite(d2) || d2 < params.pt_stall_epsilon))
            ++stall_streak;
        else
            stall_streak = 0;
        b1 = n1;
        b2 = n2;
        if (b1 > dp_blowup) {
            res.escape_index = level;
            res.escaped = true;
            break;
        }

        auto [nu, nw] = uw_step(u, w, level, params);
        u = nu;
        w = nw;
    }
    if (!res.escaped && res.u_escape_index < 0) {
        const double au = std::abs(u);
        if (std::isfinite(au)) max_u = std::max(max_u, au);
        if (crossed(u, res.radius)) res.u_escape_index = params.budget;
    }

    res.log_growth = b1;
    res.max_abs_u = max_u;
    if (res.u_escape_index >= 0) {
        res.escaped = true;
        res.escape_index = res.u_escape_index;
    }
    res.stabilized = !res.escaped && stall_streak >= params.pt_stall_levels;
    return res;
}

MembershipResult kt_membership(Complex lambda, int exponent, const SpectralParams& params) {
    if (exponent < 1) throw std::invalid_argument("exponent must be >= 1");
    MembershipResult res;
    res.lambda = lambda;
    res.kind = SetKind::F;
    res.budget = params.budget;
    res.radius = resolve_radius(params);

    Complex z = seed_value(lambda, params.schedule.p_double(1));
    double max_z = 0.0;
    for (int n = 0; n <= params.budget; ++n) {
        if (n > 0) {
            const double p = params.schedule.p_double(static_cast<std::size_t>(n) + 1);
            z = (monomial(z, z, exponent, 0) - (1.0 - p)) / p;
        }
        const double az = std::abs(z);
        if (std::isfinite(az)) max_z = std::max(max_z, az);
        if (crossed(z, res.radius)) {
            res.escaped = true;
            res.escape_index = n;
            res.u_escape_index = n;
            break;
        }
    }
    res.max_abs_u = max_z;
    res.log_growth = max_z > 0 ? std::log(max_z) : -kInf;
    return res;
}

namespace {

// One escape step past R must certify divergence (the induction step of the
// nesting bound): (p (pR - (1-p))^{c/e} - (1-p))^{b/e} > R with e = bc - ad.
bool analytic_radius_ok(double r, double p, const std::array<std::int64_t, 4>& m) {
    const double e = static_cast<double>(m[1] * m[2] - m[0] * m[3]);
    const double inner = p * r - (1.0 - p);
    if (inner <= 1.0) return false;
    const double mid = p * std::pow(inner, static_cast<double>(m[2]) / e) - (1.0 - p);
    if (mid <= 1.0) return false;
    const double lifted = std::pow(mid, static_cast<double>(m[1]) / e);
    if (!(lifted > r)) return false;
    // base case of the nested-disk claim
    return std::pow(p * r + 1.0 - p, 1.0 / static_cast<double>(m[0] + m[1])) < r;
}

std::vector<Complex> probe_points() {
    std::vector<Complex> pts;
    for (int i = -4; i <= 4; ++i)
        for (int j = -4; j <= 4; ++j)
            pts.emplace_back(0.5 * i, 0.5 * j);
    return pts;
}

}  // namespace

EscapeRadius escape_radius(const SpectralParams& params) {
    const double pmin = params.min_p();

    if (params.nesting_hypothesis() && pmin > 0) {
        double r = (2.0 - pmin) / pmin + 1.0;
        for (int i = 0; i < 200; ++i) {
            if (analytic_radius_ok(r, pmin, params.coeffs.front())) return {r, true};
            r *= 2.0;
        }
    }

    // Probe-stabilized fallback: grow R until a sample of verdicts stops
    // changing between R and 2R.
    SpectralParams probe = params;
    double r = std::max(3.0, pmin > 0 ? (2.0 - pmin) / pmin + 0.5 : 3.0);
    const std::vector<Complex> pts = probe_points();
    for (int i = 0; i < 20; ++i) {
        bool stable = true;
        for (const Complex& lambda : pts) {
            probe.radius = r;
            const bool a = joint_membership(lambda, probe, SetKind::E).escaped;
            probe.radius = 2.0 * r;
            const bool b = joint_membership(lambda, probe, SetKind::E).escaped;
            if (a != b) {
                stable = false;
                break;
            }
        }
        if (stable) return {r, false};
        r *= 2.0;
    }
    return {r, false};
}

Complex u_n_value(Complex lambda, const DigitString& ds, const SpectralParams& params) {
    Complex u = seed_value(lambda, params.schedule.p_double(1));
    Complex w = u;
    Complex product(1.0, 0.0);
    for (std::size_t j = 0; j < ds.size(); ++j) {
        if (j > 0) {
            auto [nu, nw] = uw_step(u, w, static_cast<int>(j), params);
            u = nu;
            w = nw;
        }
        product *= monomial(u, w, ds.pairs[j].f_digit, ds.pairs[j].g_digit);
    }
    return product;
}

double eigen_residual(Complex lambda, std::shared_ptr<const BratteliDiagram> d,
                      const ProbSchedule& ps, std::size_t rows) {
    if (rows < 1) throw std::invalid_argument("eigen_residual needs at least one row");
    SpectralParams params = SpectralParams::from_diagram(*d, ps);

    // z_N = u_N(lambda) for every label touched by rows 0..rows-1.
    std::vector<Complex> z(rows + 1);
    PathOps ops(d);
    for (std::size_t n = 0; n <= rows; ++n) {
        z[n] = u_n_value(lambda, path_digits(ops.state()), params);
        ops.advance();
    }

    double worst = 0.0;
    for (std::size_t n = 0; n < rows; ++n) {
        const SparseRow<double> row = operator_row(BigInt(n), d, ps);
        Complex sum(0.0, 0.0);
        for (const auto& [col, p] : row.entries)
            sum += p * z[col.convert_to<std::size_t>()];
        worst = std::max(worst, std::abs(sum - lambda * z[n]));
    }
    return worst;
}

CriticalEscape critical_escape_test(const SpectralParams& params) {
    CriticalEscape out;
    const bool constant_p = params.schedule.is_constant();
    const double p = params.schedule.p_double(1);

    if (!constant_p)
        out.reason = "needs a constant schedule";
    else if (!params.nesting_hypothesis())
        out.reason = "needs det M < 0 and bc > (ad-bc)^2";
    else if (!(p < 0.5))
        out.reason = "the disconnection certificate requires p < 1/2";
    out.applicable = out.reason.empty();

    const double radius = resolve_radius(params);
    Complex u((1.0 - p) / p, 0.0);
    Complex w = u;
    for (int n = 0; n <= params.budget; ++n) {
        if (n > 0) {
            auto [nu, nw] = uw_step(u, w, n, params);
            u = nu;
            w = nw;
        }
        if (crossed(u, radius) || crossed(w, radius)) {
            out.escaped = true;
            out.escape_index = n;
            break;
        }
    }
    return out;
}

Complex parse_complex(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw std::invalid_argument("empty complex literal");

    if (s.back() == 'i' || s.back() == 'I') {
        s.pop_back();
        // split at the sign separating re from im (not an exponent sign)
        for (std::size_t i = s.size(); i-- > 1;) {
            if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
                const double re = std::stod(s.substr(0, i));
                const std::string imag = s.substr(i);
                const double im = (imag == "+" || imag == "-") ? (imag == "-" ? -1.0 : 1.0)
                                                               : std::stod(imag);
                return {re, im};
            }
        }
        if (s.empty() || s == "+") return {0.0, 1.0};
        if (s == "-") return {0.0, -1.0};
        return {0.0, std::stod(s)};
    }
    return {std::stod(s), 0.0};
}

GridSpec parse_grid(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("grid format is REMIN,REMAXxIMMIN,IMMAX:WxH");
    const std::string ranges = text.substr(0, colon);
    const std::string dims = text.substr(colon + 1);

    const auto pair_of = [](const std::string& s) {
        const auto comma = s.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("grid: expected a,b");
        return std::pair<double, double>(std::stod(s.substr(0, comma)),
                                         std::stod(s.substr(comma + 1)));
    };

    // the range separator is the 'x' after the first comma pair
    const auto comma = ranges.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("grid: missing comma");
    const auto xsep = ranges.find('x', comma);
    if (xsep == std::string::npos) throw std::invalid_argument("grid: missing 'x'");

    GridSpec g;
    std::tie(g.re_min, g.re_max) = pair_of(ranges.substr(0, xsep));
    std::tie(g.im_min, g.im_max) = pair_of(ranges.substr(xsep + 1));

    const auto dimx = dims.find('x');
    if (dimx == std::string::npos) throw std::invalid_argument("grid: dimensions must be WxH");
    g.width = std::stoi(dims.substr(0, dimx));
    g.height = std::stoi(dims.substr(dimx + 1));
    g.validate();
    return g;
}

Complex GridSpec::pixel(int x, int y) const {
    // Centered coordinates: exact mirror pairs for conjugation-symmetric
    // grids (dy negates exactly, and center 0 keeps the negation exact).
    const double pw = (re_max - re_min) / width;
    const double ph = (im_max - im_min) / height;
    const double cx = 0.5 * (re_min + re_max);
    const double cy = 0.5 * (im_min + im_max);
    const double dx = static_cast<double>(x) - 0.5 * (width - 1);
    const double dy = static_cast<double>(y) - 0.5 * (height - 1);
    return Complex(cx + dx * pw, cy + dy * ph);
}

void GridSpec::validate() const {
    if (width < 1 || height < 1) throw std::invalid_argument("grid: dimensions must be >= 1");
    if (!(re_min < re_max) || !(im_min < im_max))
        throw std::invalid_argument("grid: rectangle is degenerate");
}

namespace {

template <class PixelFn>
Raster render_tiles(const GridSpec& grid, int budget, SetKind kind, PixelFn&& fn) {
    grid.validate();
    Raster raster;
    raster.width = grid.width;
    raster.height = grid.height;
    raster.kind = kind;
    raster.budget = budget;
    raster.cells.assign(static_cast<std::size_t>(grid.width) * grid.height, 0);

    const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(grid.height));
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned t = 0; t < workers; ++t)
        threads.emplace_back([&, t] {
            for (int y = static_cast<int>(t); y < grid.height; y += static_cast<int>(workers))
                for (int x = 0; x < grid.width; ++x) {
                    const MembershipResult m = fn(grid.pixel(x, y));
                    raster.cells[static_cast<std::size_t>(y) * grid.width + x] =
                        m.escaped ? static_cast<std::uint32_t>(m.escape_index) + 1 : 0;
                }
        });
    for (std::thread& th : threads) th.join();
    return raster;
}

}  // namespace

Raster render_set(const GridSpec& grid, const SpectralParams& params) {
    SpectralParams fixed = params;
    fixed.radius = resolve_radius(params);  // resolve once, not per pixel
    switch (grid.kind) {
        case SetKind::F:
            return render_tiles(grid, fixed.budget, grid.kind,
                                [&](Complex l) { return f_membership(l, fixed); });
        case SetKind::E:
            return render_tiles(grid, fixed.budget, grid.kind,
                                [&](Complex l) { return e_membership(l, fixed); });
        case SetKind::PT:
            return render_tiles(grid, fixed.budget, grid.kind,
                                [&](Complex l) { return pt_membership(l, fixed); });
    }
    throw std::logic_error("unreachable set kind");
}

Raster render_kt(const GridSpec& grid, int exponent, const SpectralParams& params) {
    SpectralParams fixed = params;
    fixed.radius = resolve_radius(params);
    return render_tiles(grid, fixed.budget, grid.kind,
                        [&](Complex l) { return kt_membership(l, exponent, fixed); });
}

namespace {

std::uint8_t shade(std::uint32_t cell, int budget) {
    if (cell == 0) return 0;
    const std::uint32_t e = std::min<std::uint32_t>(cell - 1, static_cast<std::uint32_t>(budget));
    const std::uint32_t span = static_cast<std::uint32_t>(std::max(budget, 1));
    return static_cast<std::uint8_t>(55 + (200 * (span - e)) / span);
}

}  // namespace

void write_pgm(std::ostream& os, const Raster& r) {
    os << "P5\n" << r.width << ' ' << r.height << "\n255\n";
    for (std::uint32_t cell : r.cells) {
        const char byte = static_cast<char>(shade(cell, r.budget));
        os.write(&byte, 1);
    }
}

void write_ppm(std::ostream& os, const Raster& r) {
    os << "P6\n" << r.width << ' ' << r.height << "\n255\n";
    for (std::uint32_t cell : r.cells) {
        const std::uint8_t g = shade(cell, r.budget);
        const char rgb[3] = {static_cast<char>(g), static_cast<char>((g * 97) % 256),
                             static_cast<char>(cell == 0 ? 40 : 255 - g)};
        os.write(rgb, 3);
    }
}

MembershipResult fibered_orbit_general(std::vector<Complex> z,
                                       const std::vector<IntMatrix>& matrices,
                                       const ProbSchedule& ps, int budget, double radius) {
    if (matrices.empty()) throw std::invalid_argument("fibered orbit: no matrices");
    const int l = static_cast<int>(z.size());
    if (l < 2) throw std::invalid_argument("fibered orbit: dimension must be >= 2");
    for (const IntMatrix& m : matrices) {
        if (m.rows != l || m.cols != l)
            throw std::invalid_argument("fibered orbit: matrix shape must match the point dimension");
        for (int r = 0; r < m.rows; ++r) {
            std::int64_t sum = 0;
            for (int c = 0; c < m.cols; ++c) {
                if (m.at(r, c) < 0) throw std::invalid_argument("fibered orbit: negative exponent");
                sum += m.at(r, c);
            }
            if (sum <= 1) throw std::invalid_argument("fibered orbit: row sums must exceed one");
        }
    }
    if (!(radius > 0)) throw std::invalid_argument("fibered orbit: radius must be positive");

    MembershipResult res;
    res.kind = SetKind::E;
    res.budget = budget;
    res.radius = radius;

    std::vector<Complex> next(static_cast<std::size_t>(l));
    for (int n = 0; n <= budget; ++n) {
        if (n > 0) {
            const IntMatrix& m =
                matrices[std::min<std::size_t>(static_cast<std::size_t>(n) - 1, matrices.size() - 1)];
            const double p = ps.p_double(static_cast<std::size_t>(n) + 1);
            for (int i = 0; i < l; ++i) {
                Complex acc(1.0, 0.0);
                for (int j = 0; j < l; ++j)
                    for (std::int64_t e = 0; e < m.at(i, j); ++e) acc *= z[static_cast<std::size_t>(j)];
                next[static_cast<std::size_t>(i)] = (acc - (1.0 - p)) / p;
            }
            z.swap(next);
        }
        double sup = 0.0;
        bool finite = true;
        for (const Complex& zi : z) {
            const double a = std::abs(zi);
            if (!std::isfinite(a)) finite = false;
            sup = std::max(sup, a);
        }
        if (std::isfinite(sup) && finite) res.max_abs_u = std::max(res.max_abs_u, sup);
        if (!finite || sup > radius) {
            res.escaped = true;
            res.escape_index = n;
            break;
        }
    }
    res.log_growth = res.max_abs_u > 0 ? std::log(res.max_abs_u) : -kInf;
    return res;
}

}  // namespace bvm
