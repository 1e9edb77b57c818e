#include "bvm/schedule.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bvm {

namespace {

constexpr std::size_t kCacheDepth = 96;

void check_prob(const Rational& p, const std::string& what) {
    if (p <= 0 || p > 1)
        throw std::invalid_argument(what + " must lie in (0, 1], got " + rational_to_string(p));
}

Rational rational_pow(Rational base, std::size_t e) {
    Rational out = 1;
    while (e) {
        if (e & 1) out *= base;
        base *= base;
        e >>= 1;
    }
    return out;
}

}  // namespace

ProbSchedule ProbSchedule::constant(Rational p) {
    check_prob(p, "schedule.p");
    ProbSchedule s;
    s.kind_ = Kind::Constant;
    s.values_ = {std::move(p)};
    s.fill_cache();
    return s;
}

ProbSchedule ProbSchedule::list(std::vector<Rational> values, Tail tail) {
    if (values.empty()) throw std::invalid_argument("schedule.values must be nonempty");
    for (std::size_t i = 0; i < values.size(); ++i)
        check_prob(values[i], "schedule.values[" + std::to_string(i) + "]");
    ProbSchedule s;
    s.kind_ = Kind::List;
    s.tail_ = tail;
    s.values_ = std::move(values);
    s.fill_cache();
    return s;
}

ProbSchedule ProbSchedule::geometric(Rational q) {
    if (q <= 0 || q > 1)
        throw std::invalid_argument("schedule.q must lie in (0, 1] for p_j = q^j");
    ProbSchedule s;
    s.kind_ = Kind::Geometric;
    s.q_ = std::move(q);
    s.fill_cache();
    return s;
}

ProbSchedule ProbSchedule::one_minus_geometric(Rational q) {
    if (q < 0 || q >= 1)
        throw std::invalid_argument("schedule.q must lie in [0, 1) for p_j = 1 - q^j");
    ProbSchedule s;
    s.kind_ = Kind::OneMinusGeometric;
    s.q_ = std::move(q);
    s.fill_cache();
    return s;
}

Rational ProbSchedule::value_at(std::size_t j) const {
    switch (kind_) {
        case Kind::Constant:
            return values_.front();
        case Kind::List: {
            if (j <= values_.size()) return values_[j - 1];
            if (tail_ == Tail::RepeatLast) return values_.back();
            return values_[(j - 1) % values_.size()];
        }
        case Kind::Geometric:
            return rational_pow(q_, j);
        case Kind::OneMinusGeometric:
            return Rational(1) - rational_pow(q_, j);
    }
    throw std::logic_error("unreachable schedule kind");
}

Rational ProbSchedule::p(std::size_t j) const {
    if (j == 0) throw std::invalid_argument("schedule index starts at 1");
    return value_at(j);
}

void ProbSchedule::fill_cache() {
    cache_.resize(kCacheDepth);
    for (std::size_t j = 1; j <= kCacheDepth; ++j) cache_[j - 1] = to_double(value_at(j));
}

double ProbSchedule::p_double(std::size_t j) const {
    if (j == 0) throw std::invalid_argument("schedule index starts at 1");
    if (j <= cache_.size()) return cache_[j - 1];
    return to_double(value_at(j));
}

bool ProbSchedule::is_constant() const {
    if (kind_ == Kind::Constant) return true;
    if (kind_ == Kind::List) {
        for (const Rational& v : values_)
            if (v != values_.front()) return false;
        return true;
    }
    return false;
}

Rational ProbSchedule::constant_value() const {
    if (!is_constant()) throw std::logic_error("schedule is not constant");
    return values_.front();
}

bool ProbSchedule::infinitely_many_below_one() const {
    switch (kind_) {
        case Kind::Constant:
            return values_.front() < 1;
        case Kind::List:
            if (tail_ == Tail::RepeatLast) return values_.back() < 1;
            for (const Rational& v : values_)
                if (v < 1) return true;
            return false;
        case Kind::Geometric:
            return q_ < 1;
        case Kind::OneMinusGeometric:
            return q_ > 0;
    }
    return false;
}

bool ProbSchedule::product_positive() const {
    switch (kind_) {
        case Kind::Constant:
            return values_.front() == 1;
        case Kind::List:
            if (tail_ == Tail::RepeatLast) return values_.back() == 1;
            for (const Rational& v : values_)
                if (v < 1) return false;
            return true;
        case Kind::Geometric:
            return q_ == 1;
        case Kind::OneMinusGeometric:
            // sum q^j converges for q < 1, so the product stays positive
            return true;
    }
    return false;
}

std::string ProbSchedule::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Constant:
            os << "constant p=" << rational_to_string(values_.front());
            break;
        case Kind::List:
            os << "list [";
            for (std::size_t i = 0; i < values_.size(); ++i)
                os << (i ? "," : "") << rational_to_string(values_[i]);
            os << "] " << (tail_ == Tail::RepeatLast ? "repeat_last" : "cycle");
            break;
        case Kind::Geometric:
            os << "p_j = q^j, q=" << rational_to_string(q_);
            break;
        case Kind::OneMinusGeometric:
            os << "p_j = 1-q^j, q=" << rational_to_string(q_);
            break;
    }
    return os.str();
}

}  // namespace bvm
