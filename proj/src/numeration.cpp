#include "bvm/numeration.hpp"

#include <array>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace bvm {

namespace {

void require_numeration_diagram(const BratteliDiagram& d) {
    if (!d.is_2x2()) throw std::invalid_argument("numeration needs a 2x2 diagram");
    if (!d.canonical())
        throw std::invalid_argument("numeration needs the canonical consecutive ordering");
    for (int level = 1; level <= static_cast<int>(d.explicit_levels()); ++level) {
        if (d.a(level) < 1 || d.b(level) < 1 || d.c(level) < 1)
            throw std::invalid_argument(
                "numeration needs a, b, c >= 1 in every incidence matrix (relabel so a > 0)");
    }
    if (d.minimal_path_vertex(0) != 1)
        throw std::invalid_argument("numeration expects the minimal path through vertex 1");
}

DigitPair classify_edge(const BratteliDiagram& d, const Edge& e) {
    const std::int64_t a = d.a(e.level), b = d.b(e.level);
    const std::int64_t c = d.c(e.level), dd = d.d(e.level);
    DigitPair p;
    p.source = e.source;
    p.range = e.range;
    const std::int64_t m = e.order_index;
    if (e.source == 1 && e.range == 1) {
        if (m >= a) throw std::logic_error("digit extraction: order index outside the a block");
        p.f_digit = m;
    } else if (e.source == 2 && e.range == 1) {
        if (m < a || m >= a + b) throw std::logic_error("digit extraction: outside the b block");
        p.f_digit = a;
        p.g_digit = m - a;
    } else if (e.source == 1 && e.range == 2) {
        if (m >= c) throw std::logic_error("digit extraction: outside the c block");
        p.f_digit = m;
    } else {
        if (m < c || m >= c + dd) throw std::logic_error("digit extraction: outside the d block");
        p.f_digit = c;
        p.g_digit = m - c;
    }
    return p;
}

// Possible range states of one digit pair read from source state s.
std::array<bool, 2> pair_targets(const BratteliDiagram& d, int level, int s,
                                 std::int64_t fd, std::int64_t gd) {
    const std::int64_t a = d.a(level), b = d.b(level);
    const std::int64_t c = d.c(level), dd = d.d(level);
    std::array<bool, 2> r{false, false};
    if (fd < 0 || gd < 0) return r;
    if (s == 1) {
        if (gd == 0 && fd < a) r[0] = true;
        if (gd == 0 && fd < c) r[1] = true;
    } else {
        if (fd == a && gd < b) r[0] = true;
        if (fd == c && gd < dd) r[1] = true;
    }
    return r;
}

}  // namespace

FgSequences FgSequences::for_diagram(const BratteliDiagram& d, std::size_t depth) {
    require_numeration_diagram(d);
    FgSequences fg;
    fg.f_.reserve(depth + 1);
    fg.g_.reserve(depth + 1);
    BigInt f = 1, g = 1;
    fg.f_.push_back(f);
    fg.g_.push_back(g);
    for (std::size_t n = 1; n <= depth; ++n) {
        const int level = static_cast<int>(n);
        const BigInt nf = d.a(level) * f + d.b(level) * g;
        const BigInt ng = d.c(level) * f + d.d(level) * g;
        f = nf;
        g = ng;
        fg.f_.push_back(f);
        fg.g_.push_back(g);
    }
    return fg;
}

FgSequences fg_sequences(const BratteliDiagram& d, std::size_t depth) {
    return FgSequences::for_diagram(d, depth);
}

std::vector<std::pair<std::int64_t, std::int64_t>> DigitString::bare() const {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    out.reserve(pairs.size());
    for (const DigitPair& p : pairs) out.emplace_back(p.f_digit, p.g_digit);
    return out;
}

std::string DigitString::to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i) os << ',';
        os << '(' << pairs[i].f_digit << ',' << pairs[i].g_digit << ')';
    }
    os << ')';
    return os.str();
}

DigitString path_digits(const PathState& x) {
    require_numeration_diagram(x.diagram());
    DigitString ds;
    ds.pairs.reserve(static_cast<std::size_t>(x.prefix_length()));
    for (const Edge& e : x.prefix()) ds.pairs.push_back(classify_edge(x.diagram(), e));
    return ds;
}

BigInt decode(const DigitString& ds, const FgSequences& fg) {
    if (!ds.empty() && fg.depth() + 1 < ds.size())
        throw std::invalid_argument("decode: F,G sequences shorter than the digit string");
    BigInt n = 0;
    for (std::size_t j = 0; j < ds.size(); ++j)
        n += ds.pairs[j].f_digit * fg.f(j) + ds.pairs[j].g_digit * fg.g(j);
    return n;
}

BigInt decode(const DigitString& ds, const BratteliDiagram& d) {
    return decode(ds, fg_sequences(d, ds.size()));
}

DigitString encode(const BigInt& n, std::shared_ptr<const BratteliDiagram> d) {
    require_numeration_diagram(*d);
    return path_digits(path_at_index(std::move(d), n));
}

PathState digits_to_path(std::shared_ptr<const BratteliDiagram> d, const DigitString& ds) {
    if (!validate_digits(*d, ds)) throw std::invalid_argument("invalid digit string");
    std::vector<Edge> prefix;
    prefix.reserve(ds.size());
    for (std::size_t j = 0; j < ds.size(); ++j) {
        const DigitPair& p = ds.pairs[j];
        prefix.push_back(Edge{static_cast<int>(j) + 1, p.source,
                              static_cast<int>(p.f_digit + p.g_digit), p.range});
    }
    return PathState(std::move(d), std::move(prefix));
}

bool validate_digits(const BratteliDiagram& d, const DigitString& ds) {
    try {
        require_numeration_diagram(d);
    } catch (const std::invalid_argument&) {
        return false;
    }
    int prev_range = 0;
    for (std::size_t j = 0; j < ds.size(); ++j) {
        const DigitPair& p = ds.pairs[j];
        if (p.source < 1 || p.source > 2 || p.range < 1 || p.range > 2) return false;
        if (j > 0 && p.source != prev_range) return false;
        const auto targets = pair_targets(d, static_cast<int>(j) + 1, p.source, p.f_digit,
                                          p.g_digit);
        if (!targets[static_cast<std::size_t>(p.range) - 1]) return false;
        prev_range = p.range;
    }
    return ds.empty() || prev_range == d.minimal_path_vertex(static_cast<int>(ds.size()));
}

std::optional<DigitString> annotate_digits(
    const BratteliDiagram& d, const std::vector<std::pair<std::int64_t, std::int64_t>>& bare) {
    try {
        require_numeration_diagram(d);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    const std::size_t n = bare.size();
    if (n == 0) return DigitString{};

    // Forward reachable range states; digit strings are recognized by a
    // two-state automaton whose state is the current range vertex.
    std::vector<std::array<bool, 2>> forward(n + 1, {false, false});
    forward[0] = {true, d.level_size(0) >= 2};
    for (std::size_t j = 0; j < n; ++j) {
        for (int s = 1; s <= 2; ++s) {
            if (!forward[j][static_cast<std::size_t>(s) - 1]) continue;
            const auto targets =
                pair_targets(d, static_cast<int>(j) + 1, s, bare[j].first, bare[j].second);
            forward[j + 1][0] = forward[j + 1][0] || targets[0];
            forward[j + 1][1] = forward[j + 1][1] || targets[1];
        }
    }
    const int final_vertex = d.minimal_path_vertex(static_cast<int>(n));
    if (!forward[n][static_cast<std::size_t>(final_vertex) - 1]) return std::nullopt;

    // Backward pass pins the accepting run; it is unique because states
    // biject with integers.
    std::vector<int> run(n + 1);
    run[n] = final_vertex;
    for (std::size_t j = n; j-- > 0;) {
        int chosen = 0;
        for (int s = 1; s <= 2; ++s) {
            if (!forward[j][static_cast<std::size_t>(s) - 1]) continue;
            const auto targets =
                pair_targets(d, static_cast<int>(j) + 1, s, bare[j].first, bare[j].second);
            if (targets[static_cast<std::size_t>(run[j + 1]) - 1]) {
                if (chosen != 0)
                    throw std::logic_error("digit automaton: ambiguous accepting run");
                chosen = s;
            }
        }
        if (chosen == 0) return std::nullopt;
        run[j] = chosen;
    }

    DigitString ds;
    ds.pairs.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        ds.pairs.push_back(DigitPair{bare[j].first, bare[j].second, run[j], run[j + 1]});
    return ds;
}

bool validate_digits(const BratteliDiagram& d,
                     const std::vector<std::pair<std::int64_t, std::int64_t>>& bare) {
    return annotate_digits(d, bare).has_value();
}

std::vector<std::pair<std::int64_t, std::int64_t>> parse_digit_pairs(const std::string& text) {
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    std::vector<std::int64_t> current;
    std::int64_t value = 0;
    bool in_number = false, negative = false;
    int depth = 0;
    auto flush = [&] {
        if (!in_number) return;
        current.push_back(negative ? -value : value);
        value = 0;
        in_number = negative = false;
    };
    for (char ch : text) {
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            value = value * 10 + (ch - '0');
            in_number = true;
        } else if (ch == '-') {
            negative = true;
        } else if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
            flush();
        } else if (ch == '(' || ch == '[') {
            ++depth;
        } else if (ch == ')' || ch == ']') {
            flush();
            --depth;
            if (depth < 0) throw std::invalid_argument("digit pairs: unbalanced brackets");
            if (depth >= 1 || (depth == 0 && !current.empty())) {
                if (current.size() != 2)
                    throw std::invalid_argument("digit pairs: each pair needs two entries");
                pairs.emplace_back(current[0], current[1]);
                current.clear();
            }
        } else {
            throw std::invalid_argument(std::string("digit pairs: unexpected character '") + ch +
                                        "'");
        }
    }
    flush();
    if (depth != 0 || !current.empty())
        throw std::invalid_argument("digit pairs: unbalanced input");
    return pairs;
}

}  // namespace bvm
