#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bvm/ints.hpp"

namespace bvm {

/// The carry-success probabilities p_1, p_2, ... of the stochastic machine.
/// Every value lies in (0, 1]. Values are exact rationals; a double view is
/// precomputed for the simulation and rendering paths.
class ProbSchedule {
public:
    enum class Kind { Constant, List, Geometric, OneMinusGeometric };
    enum class Tail { RepeatLast, Cycle };

    static ProbSchedule constant(Rational p);
    static ProbSchedule list(std::vector<Rational> values, Tail tail = Tail::RepeatLast);
    /// p_j = q^j with q in (0, 1].
    static ProbSchedule geometric(Rational q);
    /// p_j = 1 - q^j with q in [0, 1).
    static ProbSchedule one_minus_geometric(Rational q);

    Rational p(std::size_t j) const;  // j >= 1
    double p_double(std::size_t j) const;

    Kind kind() const { return kind_; }
    bool is_constant() const;
    Rational constant_value() const;

    /// #{ j : p_j < 1 } is infinite (the irreducibility hypothesis).
    bool infinitely_many_below_one() const;
    /// prod p_j > 0, i.e. sum (1 - p_j) converges.
    bool product_positive() const;

    std::string describe() const;

private:
    ProbSchedule() = default;
    Kind kind_ = Kind::Constant;
    Tail tail_ = Tail::RepeatLast;
    std::vector<Rational> values_;  // constant/list payload
    Rational q_ = 0;                // generator payload
    std::vector<double> cache_;     // first values as doubles

    Rational value_at(std::size_t j) const;
    void fill_cache();
};

}  // namespace bvm
