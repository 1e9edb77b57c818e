#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bvm/diagram.hpp"
#include "bvm/ints.hpp"
#include "bvm/vershik.hpp"

namespace bvm {

/// Path counts into the two vertices of a 2x2 diagram, level by level:
/// f[n] and g[n] count the paths from V(0) into vertex 1 resp. 2 at level n,
/// with f[0] = g[0] = 1.
class FgSequences {
public:
    static FgSequences for_diagram(const BratteliDiagram& d, std::size_t depth);

    const BigInt& f(std::size_t i) const { return f_.at(i); }
    const BigInt& g(std::size_t i) const { return g_.at(i); }
    std::size_t depth() const { return f_.size() - 1; }

private:
    std::vector<BigInt> f_, g_;
};

FgSequences fg_sequences(const BratteliDiagram& d, std::size_t depth);

/// One level of the numeration: the digit pair weighting (F_{j-1}, G_{j-1}),
/// annotated with the source/range pair of the edge it came from.
struct DigitPair {
    std::int64_t f_digit = 0;
    std::int64_t g_digit = 0;
    int source = 1;
    int range = 1;

    bool operator==(const DigitPair&) const = default;
};

struct DigitString {
    std::vector<DigitPair> pairs;

    bool empty() const { return pairs.empty(); }
    std::size_t size() const { return pairs.size(); }
    std::vector<std::pair<std::int64_t, std::int64_t>> bare() const;
    std::string to_string() const;  // ((d1,g1),(d2,g2),...)

    bool operator==(const DigitString&) const = default;
};

/// Digit extraction from a path over a 2x2 canonical-ordered diagram:
/// per level, (source, range) decides which of the four digit shapes applies.
DigitString path_digits(const PathState& x);

/// N = sum of f_digit[j] * F_{j-1} + g_digit[j] * G_{j-1}.
BigInt decode(const DigitString& ds, const FgSequences& fg);
BigInt decode(const DigitString& ds, const BratteliDiagram& d);

/// The unique valid digit string with decode(encode(N)) == N; computed
/// arithmetically through path_at_index. Agrees with
/// path_digits(iterate(minimal, N)).
DigitString encode(const BigInt& n, std::shared_ptr<const BratteliDiagram> d);

/// Reconstructs the path a digit string denotes.
PathState digits_to_path(std::shared_ptr<const BratteliDiagram> d, const DigitString& ds);

/// Checks annotated pairs against the digit automaton: per-pair ranges,
/// range-to-source chaining, final range on the minimal path's vertex.
bool validate_digits(const BratteliDiagram& d, const DigitString& ds);

/// Validates bare pairs by searching for an accepting annotation.
bool validate_digits(const BratteliDiagram& d,
                     const std::vector<std::pair<std::int64_t, std::int64_t>>& bare);

/// Recovers the unique accepting annotation of bare pairs, if any.
std::optional<DigitString> annotate_digits(
    const BratteliDiagram& d, const std::vector<std::pair<std::int64_t, std::int64_t>>& bare);

/// Parses "((1,2),(1,3),(1,1))" into bare pairs.
std::vector<std::pair<std::int64_t, std::int64_t>> parse_digit_pairs(const std::string& text);

}  // namespace bvm
