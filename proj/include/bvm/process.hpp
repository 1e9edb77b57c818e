#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "bvm/diagram.hpp"
#include "bvm/ints.hpp"
#include "bvm/rng.hpp"
#include "bvm/schedule.hpp"
#include "bvm/vershik.hpp"

namespace bvm {

enum class ArithmeticMode { Rational, Float };

/// Outgoing distribution of one state under the random Vershik map, in the
/// fixed order: stay, carry resets (shallowest first), advance. Probabilities
/// are exact; the double view is computed natively in binary floating point.
struct PathDistribution {
    std::vector<PathState> targets;
    std::vector<Rational> probs;
    std::vector<double> probs_d;

    std::size_t stay() const { return 0; }
    std::size_t advance() const { return targets.size() - 1; }
};

PathDistribution transition_distribution(const PathState& x, const ProbSchedule& ps);

/// One row of the transition operator over integer state labels.
template <class P>
struct SparseRow {
    BigInt state;
    std::vector<std::pair<BigInt, P>> entries;  // sorted by target
};

/// Row of the operator from the digit expansion of N (the closed form for
/// Hypothesis A diagrams); falls back to the path construction otherwise.
SparseRow<Rational> operator_row_exact(const BigInt& n, std::shared_ptr<const BratteliDiagram> d,
                                       const ProbSchedule& ps);
SparseRow<double> operator_row(const BigInt& n, std::shared_ptr<const BratteliDiagram> d,
                               const ProbSchedule& ps);

struct OperatorTriplets {
    std::size_t size = 0;
    ArithmeticMode mode = ArithmeticMode::Float;
    std::vector<std::tuple<std::uint64_t, std::uint64_t, Rational>> exact;
    std::vector<std::tuple<std::uint64_t, std::uint64_t, double>> values;
};

OperatorTriplets build_operator(std::shared_ptr<const BratteliDiagram> d, const ProbSchedule& ps,
                                std::size_t size, ArithmeticMode mode);

/// CSV triplets `row,col,prob`; rationals as num/den, doubles with 17
/// significant digits.
void write_operator_csv(std::ostream& os, const OperatorTriplets& op);

/// Stepper for the Bratteli-Vershik process. Keeps the current path and its
/// integer label in sync; draws moves from the exact transition law using the
/// schedule's double view.
class Walker {
public:
    Walker(std::shared_ptr<const BratteliDiagram> d, const ProbSchedule& ps, std::uint64_t seed,
           std::uint64_t stream = 0, bool track_label = true);

    void set_state(const PathState& x);

    enum class Move { Stay, Reset, Advance };
    Move step();

    bool at_minimal() const { return ops_.is_minimal(); }
    PathState state() const { return ops_.state(); }
    const BigInt& label() const { return label_; }

private:
    BigInt level_offset_sum(int through_level) const;
    const BigInt& counts(int level, int vertex) const;

    std::shared_ptr<const BratteliDiagram> diagram_;
    const ProbSchedule* schedule_;
    PathOps ops_;
    SplitMix64 rng_;
    bool track_label_;
    BigInt label_ = 0;
    std::vector<int> carry_buf_;
    mutable std::vector<std::vector<BigInt>> count_table_;  // per level, per vertex
};

struct SimulationSummary {
    std::uint64_t seed = 0;
    std::uint64_t steps = 0;
    BigInt start;
    BigInt final_state;
    std::map<BigInt, std::uint64_t> visits;          // state label -> visit count
    std::vector<std::uint64_t> returns_to_minimal;   // times t >= 1 with Y_t minimal
};

SimulationSummary simulate(std::shared_ptr<const BratteliDiagram> d, const ProbSchedule& ps,
                           const PathState& start, std::uint64_t steps, std::uint64_t seed);

void write_simulation_report(std::ostream& os, const SimulationSummary& s);

/// First time the chain started at the minimal path returns to it, if that
/// happens within `cap` steps.
std::optional<std::uint64_t> first_return_time(std::shared_ptr<const BratteliDiagram> d,
                                               const ProbSchedule& ps, std::uint64_t cap,
                                               std::uint64_t seed, std::uint64_t stream = 0);

/// Number of replicas (streams 0..replicas-1) that never return to the
/// minimal path within `steps`. Replicas run in parallel.
std::uint64_t count_never_returned(std::shared_ptr<const BratteliDiagram> d,
                                   const ProbSchedule& ps, std::uint64_t steps,
                                   std::uint64_t replicas, std::uint64_t seed);

/// Lengths of the first `count` completed excursions from the minimal path,
/// scanning replica streams in order and skipping ones that exceed `cap`.
std::vector<std::uint64_t> completed_return_times(std::shared_ptr<const BratteliDiagram> d,
                                                  const ProbSchedule& ps, std::uint64_t cap,
                                                  std::size_t count, std::uint64_t seed);

enum class Recurrence { Transient, NullRecurrent, PositiveRecurrent, Unknown };

struct RecurrenceVerdict {
    Recurrence kind = Recurrence::Unknown;
    std::string justification;
};

std::string to_string(Recurrence r);

RecurrenceVerdict classify_recurrence(const BratteliDiagram& d, const ProbSchedule& ps);

/// Upper bound on the expected return time to the minimal path for the
/// a = c = 1, d = 0 family: C_1 + sum_j C_j max(p_{j-1}, p_j) with
/// C_1 = 1+b, C_2 = 1+2b, C_3 = 1+2b+b^2, C_{j+2} = 2 C_j and p_0 = 1.
struct ReturnTimeBound {
    double value = 0;      // partial + tail when finite
    double partial = 0;    // series truncated at `depth`
    double tail = 0;       // geometric remainder estimate
    bool divergent = false;
};

ReturnTimeBound return_time_bound(std::int64_t b, const ProbSchedule& ps, int depth);

/// Worker count for parallel sections: BVM_THREADS if set, else the hardware
/// concurrency.
unsigned worker_count();

}  // namespace bvm
