#include "bvm/process.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "bvm/numeration.hpp"

namespace bvm {

unsigned worker_count() {
    if (const char* env = std::getenv("BVM_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

namespace {

// Probabilities of the four-branch law in target order; exact and double
// views computed independently so the float path is genuine binary
// floating-point arithmetic, not a rounded rational.
struct BranchProbs {
    std::vector<Rational> exact;
    std::vector<double> flt;
};

BranchProbs branch_probs(const ProbSchedule& ps, const std::vector<int>& carries, int depth) {
    BranchProbs out;
    const std::size_t theta = carries.size();
    const int first = theta ? carries[0] : depth;
    out.exact.push_back(Rational(1) - ps.p(static_cast<std::size_t>(first)));
    out.flt.push_back(1.0 - ps.p_double(static_cast<std::size_t>(first)));

    Rational prod = 1;
    double prod_d = 1.0;
    for (std::size_t j = 0; j < theta; ++j) {
        prod *= ps.p(static_cast<std::size_t>(carries[j]));
        prod_d *= ps.p_double(static_cast<std::size_t>(carries[j]));
        const int next = (j + 1 < theta) ? carries[j + 1] : depth;
        out.exact.push_back(prod * (Rational(1) - ps.p(static_cast<std::size_t>(next))));
        out.flt.push_back(prod_d * (1.0 - ps.p_double(static_cast<std::size_t>(next))));
    }
    out.exact.push_back(prod * ps.p(static_cast<std::size_t>(depth)));
    out.flt.push_back(prod_d * ps.p_double(static_cast<std::size_t>(depth)));
    return out;
}

}  // namespace

PathDistribution transition_distribution(const PathState& x, const ProbSchedule& ps) {
    const int depth = carry_depth(x);
    const std::vector<int> carries = carry_set(x);
    BranchProbs probs = branch_probs(ps, carries, depth);

    PathDistribution dist;
    dist.targets.reserve(carries.size() + 2);
    dist.targets.push_back(x);
    for (std::size_t j = 0; j < carries.size(); ++j)
        dist.targets.push_back(reset_target(x, static_cast<int>(j) + 1));
    dist.targets.push_back(successor(x));
    dist.probs = std::move(probs.exact);
    dist.probs_d = std::move(probs.flt);
    return dist;
}

namespace {

template <class P>
P prob_of(const ProbSchedule& ps, std::size_t j);

template <>
Rational prob_of<Rational>(const ProbSchedule& ps, std::size_t j) {
    return ps.p(j);
}

template <>
double prob_of<double>(const ProbSchedule& ps, std::size_t j) {
    return ps.p_double(j);
}

template <class P>
SparseRow<P> operator_row_impl(const BigInt& n, std::shared_ptr<const BratteliDiagram> d,
                               const ProbSchedule& ps) {
    SparseRow<P> row;
    row.state = n;

    if (d->hypothesis_a() && d->is_2x2() && d->canonical()) {
        // Closed form: the carry depth and reset offsets read off the digit
        // expansion of N.
        const DigitString ds = encode(n, d);
        const FgSequences fg = fg_sequences(*d, ds.size());
        int depth = static_cast<int>(ds.size()) + 1;
        for (std::size_t j = 0; j < ds.size(); ++j) {
            const DigitPair& p = ds.pairs[j];
            const std::int64_t indeg = (p.range == 1)
                                           ? d->a(static_cast<int>(j) + 1) + d->b(static_cast<int>(j) + 1)
                                           : d->c(static_cast<int>(j) + 1) + d->d(static_cast<int>(j) + 1);
            if (p.f_digit + p.g_digit != indeg - 1) {
                depth = static_cast<int>(j) + 1;
                break;
            }
        }

        row.entries.emplace_back(n, P(1) - prob_of<P>(ps, 1));
        P prod = prob_of<P>(ps, 1);
        BigInt offset = 0;
        for (int r = 1; r < depth; ++r) {
            offset += ds.pairs[static_cast<std::size_t>(r) - 1].f_digit * fg.f(static_cast<std::size_t>(r) - 1) +
                      ds.pairs[static_cast<std::size_t>(r) - 1].g_digit * fg.g(static_cast<std::size_t>(r) - 1);
            row.entries.emplace_back(n - offset,
                                     prod * (P(1) - prob_of<P>(ps, static_cast<std::size_t>(r) + 1)));
            prod *= prob_of<P>(ps, static_cast<std::size_t>(r) + 1);
        }
        row.entries.emplace_back(n + 1, prod);
    } else {
        const PathState x = path_at_index(d, n);
        const PathDistribution dist = transition_distribution(x, ps);
        for (std::size_t i = 0; i < dist.targets.size(); ++i) {
            P p;
            if constexpr (std::is_same_v<P, Rational>)
                p = dist.probs[i];
            else
                p = dist.probs_d[i];
            row.entries.emplace_back(path_index(dist.targets[i]), p);
        }
    }

    std::sort(row.entries.begin(), row.entries.end(),
              [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
    return row;
}

}  // namespace

SparseRow<Rational> operator_row_exact(const BigInt& n, std::shared_ptr<const BratteliDiagram> d,
                                       const ProbSchedule& ps) {
    return operator_row_impl<Rational>(n, std::move(d), ps);
}

SparseRow<double> operator_row(const BigInt& n, std::shared_ptr<const BratteliDiagram> d,
                               const ProbSchedule& ps) {
    return operator_row_impl<double>(n, std::move(d), ps);
}

OperatorTriplets build_operator(std::shared_ptr<const BratteliDiagram> d, const ProbSchedule& ps,
                                std::size_t size, ArithmeticMode mode) {
    if (size < 1) throw std::invalid_argument("operator size must be >= 1");
    OperatorTriplets op;
    op.size = size;
    op.mode = mode;
    for (std::size_t n = 0; n < size; ++n) {
        if (mode == ArithmeticMode::Rational) {
            SparseRow<Rational> row = operator_row_exact(BigInt(n), d, ps);
            for (auto& [col, p] : row.entries)
                op.exact.emplace_back(n, col.convert_to<std::uint64_t>(), std::move(p));
        } else {
            SparseRow<double> row = operator_row(BigInt(n), d, ps);
            for (auto& [col, p] : row.entries)
                op.values.emplace_back(n, col.convert_to<std::uint64_t>(), p);
        }
    }
    return op;
}

void write_operator_csv(std::ostream& os, const OperatorTriplets& op) {
    os << "row,col,prob\n";
    if (op.mode == ArithmeticMode::Rational) {
        for (const auto& [r, c, p] : op.exact)
            os << r << ',' << c << ',' << rational_to_string(p) << '\n';
    } else {
        char buf[64];
        for (const auto& [r, c, p] : op.values) {
            std::snprintf(buf, sizeof buf, "%.17g", p);
            os << r << ',' << c << ',' << buf << '\n';
        }
    }
}

Walker::Walker(std::shared_ptr<const BratteliDiagram> d, const ProbSchedule& ps,
               std::uint64_t seed, std::uint64_t stream, bool track_label)
    : diagram_(std::move(d)),
      schedule_(&ps),
      ops_(diagram_),
      rng_(seed, stream),
      track_label_(track_label) {
    count_table_.emplace_back(static_cast<std::size_t>(diagram_->level_size(0)), BigInt(1));
}

void Walker::set_state(const PathState& x) {
    if (x.diagram_ptr() != diagram_) throw std::invalid_argument("walker: diagram mismatch");
    ops_.set(x);
    label_ = track_label_ ? path_index(x) : BigInt(0);
}

const BigInt& Walker::counts(int level, int vertex) const {
    while (static_cast<int>(count_table_.size()) <= level) {
        const int next_level = static_cast<int>(count_table_.size());
        const IncidenceMatrix& m = diagram_->incidence(next_level);
        std::vector<BigInt> next(static_cast<std::size_t>(m.rows), BigInt(0));
        for (int r = 0; r < m.rows; ++r)
            for (int c = 0; c < m.cols; ++c)
                if (m.at(r, c) > 0)
                    next[static_cast<std::size_t>(r)] +=
                        m.at(r, c) * count_table_.back()[static_cast<std::size_t>(c)];
        count_table_.push_back(std::move(next));
    }
    return count_table_[static_cast<std::size_t>(level)][static_cast<std::size_t>(vertex) - 1];
}

BigInt Walker::level_offset_sum(int through_level) const {
    BigInt sum = 0;
    for (int level = 1; level <= through_level; ++level) {
        const Edge e = ops_.edge(level);
        for (const auto& g : diagram_->edge_groups(level, e.range)) {
            if (e.order_index < g.first_order_index) break;
            const std::int64_t before =
                std::min<std::int64_t>(e.order_index - g.first_order_index, g.multiplicity);
            if (before > 0) sum += before * counts(level - 1, g.source);
        }
    }
    return sum;
}

Walker::Move Walker::step() {
    const int depth = ops_.carry_depth();
    ops_.carry_levels(depth, carry_buf_);
    const std::size_t theta = carry_buf_.size();
    const ProbSchedule& ps = *schedule_;

    const double u = rng_.uniform();
    const int first = theta ? carry_buf_[0] : depth;
    double acc = 1.0 - ps.p_double(static_cast<std::size_t>(first));
    if (u < acc) return Move::Stay;

    double prod = 1.0;
    for (std::size_t j = 0; j < theta; ++j) {
        prod *= ps.p_double(static_cast<std::size_t>(carry_buf_[j]));
        const int next = (j + 1 < theta) ? carry_buf_[j + 1] : depth;
        acc += prod * (1.0 - ps.p_double(static_cast<std::size_t>(next)));
        if (u < acc) {
            if (track_label_) label_ -= level_offset_sum(carry_buf_[j]);
            ops_.reset(carry_buf_[j]);
            return Move::Reset;
        }
    }
    if (track_label_) ++label_;
    ops_.advance();
    return Move::Advance;
}

SimulationSummary simulate(std::shared_ptr<const BratteliDiagram> d, const ProbSchedule& ps,
                           const PathState& start, std::uint64_t steps, std::uint64_t seed) {
    Walker w(std::move(d), ps, seed);
    w.set_state(start);

    SimulationSummary s;
    s.seed = seed;
    s.steps = steps;
    s.start = w.label();
    s.visits[w.label()]++;
    for (std::uint64_t t = 1; t <= steps; ++t) {
        w.step();
        s.visits[w.label()]++;
        if (w.at_minimal()) s.returns_to_minimal.push_back(t);
    }
    s.final_state = w.label();
    return s;
}

void write_simulation_report(std::ostream& os, const SimulationSummary& s) {
    os << "seed: " << s.seed << '\n';
    os << "steps: " << s.steps << '\n';
    os << "start: " << s.start << '\n';
    os << "final: " << s.final_state << '\n';
    os << "returns_to_minimal: " << s.returns_to_minimal.size() << '\n';
    os << "return_times:";
    for (std::uint64_t t : s.returns_to_minimal) os << ' ' << t;
    os << '\n';
    os << "visits:\n";
    for (const auto& [state, count] : s.visits) os << "  " << state << ": " << count << '\n';
}

std::optional<std::uint64_t> first_return_time(std::shared_ptr<const BratteliDiagram> d,
                                               const ProbSchedule& ps, std::uint64_t cap,
                                               std::uint64_t seed, std::uint64_t stream) {
    Walker w(std::move(d), ps, seed, stream, /*track_label=*/false);
    for (std::uint64_t t = 1; t <= cap; ++t) {
        w.step();
        if (w.at_minimal()) return t;
    }
    return std::nullopt;
}

namespace {

template <class Fn>
void parallel_replicas(std::uint64_t replicas, Fn&& fn) {
    const unsigned workers = std::min<std::uint64_t>(worker_count(), std::max<std::uint64_t>(replicas, 1));
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        threads.emplace_back([&, w] {
            for (std::uint64_t r = w; r < replicas; r += workers) fn(r);
        });
    for (std::thread& t : threads) t.join();
}

}  // namespace

std::uint64_t count_never_returned(std::shared_ptr<const BratteliDiagram> d,
                                   const ProbSchedule& ps, std::uint64_t steps,
                                   std::uint64_t replicas, std::uint64_t seed) {
    std::vector<std::uint8_t> returned(replicas, 0);
    parallel_replicas(replicas, [&](std::uint64_t r) {
        returned[r] = first_return_time(d, ps, steps, seed, r).has_value() ? 1 : 0;
    });
    std::uint64_t never = 0;
    for (std::uint8_t flag : returned) never += flag ? 0 : 1;
    return never;
}

std::vector<std::uint64_t> completed_return_times(std::shared_ptr<const BratteliDiagram> d,
                                                  const ProbSchedule& ps, std::uint64_t cap,
                                                  std::size_t count, std::uint64_t seed) {
    std::vector<std::uint64_t> times;
    std::uint64_t base = 0;
    while (times.size() < count) {
        const std::uint64_t batch = std::max<std::uint64_t>(count - times.size(), 64);
        std::vector<std::optional<std::uint64_t>> results(batch);
        parallel_replicas(batch, [&](std::uint64_t r) {
            results[r] = first_return_time(d, ps, cap, seed, base + r);
        });
        for (const auto& r : results) {
            if (r && times.size() < count) times.push_back(*r);
        }
        base += batch;
        if (base > count * 1000ULL + 100000ULL)
            throw std::runtime_error("completed_return_times: excursions keep exceeding the cap");
    }
    return times;
}

std::string to_string(Recurrence r) {
    switch (r) {
        case Recurrence::Transient: return "transient";
        case Recurrence::NullRecurrent: return "null_recurrent";
        case Recurrence::PositiveRecurrent: return "positive_recurrent";
        case Recurrence::Unknown: return "unknown";
    }
    return "unknown";
}

RecurrenceVerdict classify_recurrence(const BratteliDiagram& d, const ProbSchedule& ps) {
    if (!ps.infinitely_many_below_one())
        return {Recurrence::Unknown,
                "only finitely many p_j < 1; irreducibility is not established"};
    if (ps.product_positive())
        return {Recurrence::Transient, "prod p_j > 0, so escape to infinity has positive probability"};
    if (d.stationary() && ps.is_constant())
        return {Recurrence::NullRecurrent, "stationary diagram with constant p in (0,1)"};
    if (d.hypothesis_a())
        return {Recurrence::NullRecurrent, "Hypothesis A with prod p_j = 0"};
    if (d.is_2x2() && d.stationary() && d.canonical() && d.a() == 1 && d.c() == 1 && d.d() == 0 &&
        d.b() >= 1) {
        const ReturnTimeBound bound = return_time_bound(d.b(), ps, 40);
        if (!bound.divergent)
            return {Recurrence::PositiveRecurrent,
                    "a=c=1, d=0 and the carry-cost series C_j max(p_{j-1},p_j) converges"};
        return {Recurrence::Unknown, "a=c=1, d=0 but the carry-cost series does not converge"};
    }
    return {Recurrence::Unknown, "outside the classified families"};
}

ReturnTimeBound return_time_bound(std::int64_t b, const ProbSchedule& ps, int depth) {
    if (b < 1) throw std::invalid_argument("return_time_bound: b must be >= 1");
    if (depth < 6) throw std::invalid_argument("return_time_bound: depth must be >= 6");

    // C_1 = 1+b, C_2 = 1+2b, C_3 = 1+2b+b^2, then C_{j+2} = 2 C_j.
    std::vector<double> c(static_cast<std::size_t>(depth) + 1);
    c[1] = 1.0 + static_cast<double>(b);
    if (depth >= 2) c[2] = 1.0 + 2.0 * static_cast<double>(b);
    if (depth >= 3) c[3] = 1.0 + 2.0 * static_cast<double>(b) + static_cast<double>(b) * b;
    for (int j = 4; j <= depth; ++j) c[static_cast<std::size_t>(j)] = 2.0 * c[static_cast<std::size_t>(j) - 2];

    ReturnTimeBound out;
    std::vector<double> terms(static_cast<std::size_t>(depth) + 1, 0.0);
    out.partial = c[1];
    double prev_p = 1.0;  // p_0 := 1
    for (int j = 1; j <= depth; ++j) {
        const double pj = ps.p_double(static_cast<std::size_t>(j));
        terms[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)] * std::max(prev_p, pj);
        out.partial += terms[static_cast<std::size_t>(j)];
        prev_p = pj;
    }

    // Geometric tail: the recursion doubles C every two steps, so the series
    // converges only if the two-step term ratio settles below one.
    double rho = 0.0;
    for (int j = depth - 3; j <= depth; ++j)
        rho = std::max(rho, terms[static_cast<std::size_t>(j)] / terms[static_cast<std::size_t>(j) - 2]);
    if (rho >= 1.0 || !std::isfinite(rho)) {
        out.divergent = true;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    out.tail = (terms[static_cast<std::size_t>(depth)] + terms[static_cast<std::size_t>(depth) - 1]) *
               rho / (1.0 - rho);
    out.value = out.partial + out.tail;
    return out;
}

}  // namespace bvm
