#include "bvm/vershik.hpp"

#include <stdexcept>
#include <string>

namespace bvm {

namespace {

Edge minimal_edge_at(const BratteliDiagram& d, int level) {
    const int range = d.minimal_path_vertex(level);
    return Edge{level, d.minimal_path_vertex(level - 1), 0, range};
}

bool is_maximal(const BratteliDiagram& d, const Edge& e) {
    return e.order_index == d.indegree(e.level, e.range) - 1;
}

void validate_prefix(const BratteliDiagram& d, const std::vector<Edge>& prefix) {
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        const Edge& e = prefix[i];
        const int level = static_cast<int>(i) + 1;
        if (e.level != level)
            throw std::invalid_argument("path: edge at position " + std::to_string(i + 1) +
                                        " carries level " + std::to_string(e.level));
        if (e.range < 1 || e.range > d.level_size(level))
            throw std::invalid_argument("path: range out of bounds at level " +
                                        std::to_string(level));
        if (e.order_index < 0 || e.order_index >= d.indegree(level, e.range))
            throw std::invalid_argument("path: order index out of bounds at level " +
                                        std::to_string(level));
        if (e.source != d.edge_source(level, e.range, e.order_index))
            throw std::invalid_argument("path: source inconsistent with ordering at level " +
                                        std::to_string(level));
        if (i + 1 < prefix.size() && prefix[i + 1].source != e.range)
            throw std::invalid_argument("path: broken chain between levels " +
                                        std::to_string(level) + " and " + std::to_string(level + 1));
    }
    if (!prefix.empty() && prefix.back().range != d.minimal_path_vertex(prefix.back().level))
        throw std::invalid_argument(
            "path: prefix must end on the minimal path's vertex so the implicit tail connects");
}

void normalize_prefix(const BratteliDiagram& d, std::vector<Edge>& prefix) {
    while (!prefix.empty()) {
        const Edge tail = minimal_edge_at(d, static_cast<int>(prefix.size()));
        if (prefix.back() != tail) break;
        prefix.pop_back();
    }
}

// Forced levels are both minimal and maximal; a long forced run past the
// prefix only happens on malformed (non-simple) configurations.
constexpr int kTailSearchCap = 64;

int carry_depth_core(const BratteliDiagram& d, const std::vector<Edge>& prefix) {
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (!is_maximal(d, prefix[i])) return static_cast<int>(i) + 1;
    const int base = static_cast<int>(prefix.size());
    for (int level = base + 1; level <= base + kTailSearchCap; ++level)
        if (d.indegree(level, d.minimal_path_vertex(level)) > 1) return level;
    throw std::logic_error(
        "carry depth search exceeded " + std::to_string(kTailSearchCap) +
        " forced levels past the prefix; the diagram cannot represent this successor");
}

}  // namespace

PathState::PathState(std::shared_ptr<const BratteliDiagram> diagram, std::vector<Edge> prefix)
    : diagram_(std::move(diagram)), prefix_(std::move(prefix)) {
    if (!diagram_) throw std::invalid_argument("path: null diagram");
    validate_prefix(*diagram_, prefix_);
    normalize_prefix(*diagram_, prefix_);
}

PathState PathState::minimal(std::shared_ptr<const BratteliDiagram> diagram) {
    return PathState(std::move(diagram), {});
}

Edge PathState::edge(int level) const {
    if (level < 1) throw std::invalid_argument("edge level must be >= 1");
    if (level <= prefix_length()) return prefix_[static_cast<std::size_t>(level) - 1];
    return minimal_edge_at(*diagram_, level);
}

bool PathState::operator==(const PathState& other) const {
    return diagram_ == other.diagram_ && prefix_ == other.prefix_;
}

std::vector<Edge> minimal_path_to(const BratteliDiagram& d, int level, int vertex) {
    if (level < 0) throw std::invalid_argument("level must be >= 0");
    std::vector<Edge> edges(static_cast<std::size_t>(level));
    int v = vertex;
    for (int k = level; k >= 1; --k) {
        const int src = d.minimal_source(k, v);
        edges[static_cast<std::size_t>(k) - 1] = Edge{k, src, 0, v};
        v = src;
    }
    return edges;
}

int carry_depth(const PathState& x) { return carry_depth_core(x.diagram(), x.prefix()); }

int last_active_level(const PathState& x) { return x.prefix_length(); }

std::vector<int> carry_set(const PathState& x) {
    const int depth = carry_depth(x);
    std::vector<int> levels;
    for (int k = 1; k < depth && k <= x.prefix_length(); ++k)
        if (x.prefix()[static_cast<std::size_t>(k) - 1].order_index > 0) levels.push_back(k);
    return levels;
}

PathOps::PathOps(std::shared_ptr<const BratteliDiagram> diagram) : diagram_(std::move(diagram)) {
    if (!diagram_) throw std::invalid_argument("path: null diagram");
}

Edge PathOps::edge(int level) const {
    if (level <= static_cast<int>(prefix_.size()))
        return prefix_[static_cast<std::size_t>(level) - 1];
    return minimal_edge_at(*diagram_, level);
}

int PathOps::carry_depth() const { return carry_depth_core(*diagram_, prefix_); }

void PathOps::carry_levels(int depth, std::vector<int>& out) const {
    out.clear();
    const int limit = std::min(depth - 1, static_cast<int>(prefix_.size()));
    for (int k = 1; k <= limit; ++k)
        if (prefix_[static_cast<std::size_t>(k) - 1].order_index > 0) out.push_back(k);
}

void PathOps::normalize() { normalize_prefix(*diagram_, prefix_); }

void PathOps::advance() {
    const BratteliDiagram& d = *diagram_;
    const int depth = carry_depth();
    const Edge old = edge(depth);
    const int m = old.order_index + 1;
    const Edge bumped{depth, d.edge_source(depth, old.range, m), m, old.range};

    std::vector<Edge> next = minimal_path_to(d, depth - 1, bumped.source);
    next.push_back(bumped);
    for (int k = depth + 1; k <= static_cast<int>(prefix_.size()); ++k)
        next.push_back(prefix_[static_cast<std::size_t>(k) - 1]);
    prefix_ = std::move(next);
    normalize();
}

void PathOps::reset(int carry_level) {
    const BratteliDiagram& d = *diagram_;
    const Edge kept = edge(carry_level + 1);
    std::vector<Edge> next = minimal_path_to(d, carry_level, kept.source);
    for (int k = carry_level + 1; k <= static_cast<int>(prefix_.size()); ++k)
        next.push_back(prefix_[static_cast<std::size_t>(k) - 1]);
    prefix_ = std::move(next);
    normalize();
}

PathState successor(const PathState& x) {
    PathOps ops(x.diagram_ptr());
    ops.set(x);
    ops.advance();
    return ops.state();
}

PathState reset_target(const PathState& x, int j) {
    const std::vector<int> levels = carry_set(x);
    if (j < 1 || j > static_cast<int>(levels.size()))
        throw std::invalid_argument("reset index out of range: " + std::to_string(j));
    PathOps ops(x.diagram_ptr());
    ops.set(x);
    ops.reset(levels[static_cast<std::size_t>(j) - 1]);
    return ops.state();
}

PathState iterate(const PathState& x, std::uint64_t n) {
    PathOps ops(x.diagram_ptr());
    ops.set(x);
    for (std::uint64_t i = 0; i < n; ++i) ops.advance();
    return ops.state();
}

BigInt path_index(const PathState& x) {
    const BratteliDiagram& d = x.diagram();
    const int depth = x.prefix_length();

    std::vector<BigInt> counts(static_cast<std::size_t>(d.level_size(0)), BigInt(1));
    BigInt index = 0;
    for (int level = 1; level <= depth; ++level) {
        const Edge& e = x.prefix()[static_cast<std::size_t>(level) - 1];
        for (const auto& g : d.edge_groups(level, e.range)) {
            if (e.order_index < g.first_order_index) break;
            const std::int64_t edges_before =
                std::min<std::int64_t>(e.order_index - g.first_order_index, g.multiplicity);
            index += edges_before * counts[static_cast<std::size_t>(g.source) - 1];
        }
        const IncidenceMatrix& m = d.incidence(level);
        std::vector<BigInt> next(static_cast<std::size_t>(m.rows), BigInt(0));
        for (int r = 0; r < m.rows; ++r)
            for (int c = 0; c < m.cols; ++c)
                if (m.at(r, c) > 0)
                    next[static_cast<std::size_t>(r)] += m.at(r, c) * counts[static_cast<std::size_t>(c)];
        counts = std::move(next);
    }
    return index;
}

PathState path_at_index(std::shared_ptr<const BratteliDiagram> d, const BigInt& n) {
    if (n < 0) throw std::invalid_argument("path index must be nonnegative");
    if (n == 0) return PathState::minimal(std::move(d));

    // Grow the count table until the terminal vertex of the minimal path can
    // hold n + 1 paths, then unwind level by level.
    std::vector<std::vector<BigInt>> counts;
    counts.emplace_back(static_cast<std::size_t>(d->level_size(0)), BigInt(1));
    int depth = 0;
    while (counts.back()[static_cast<std::size_t>(d->minimal_path_vertex(depth)) - 1] <= n) {
        const int level = depth + 1;
        const IncidenceMatrix& m = d->incidence(level);
        std::vector<BigInt> next(static_cast<std::size_t>(m.rows), BigInt(0));
        for (int r = 0; r < m.rows; ++r)
            for (int c = 0; c < m.cols; ++c)
                if (m.at(r, c) > 0)
                    next[static_cast<std::size_t>(r)] +=
                        m.at(r, c) * counts.back()[static_cast<std::size_t>(c)];
        counts.push_back(std::move(next));
        ++depth;
    }

    std::vector<Edge> prefix(static_cast<std::size_t>(depth));
    BigInt remaining = n;
    int vertex = d->minimal_path_vertex(depth);
    for (int level = depth; level >= 1; --level) {
        const auto& below = counts[static_cast<std::size_t>(level) - 1];
        bool placed = false;
        for (const auto& g : d->edge_groups(level, vertex)) {
            const BigInt per_edge = below[static_cast<std::size_t>(g.source) - 1];
            const BigInt block = per_edge * g.multiplicity;
            if (remaining < block) {
                const BigInt within = remaining / per_edge;
                const int m = static_cast<int>(g.first_order_index) +
                              within.convert_to<int>();
                prefix[static_cast<std::size_t>(level) - 1] = Edge{level, g.source, m, vertex};
                remaining -= within * per_edge;
                vertex = g.source;
                placed = true;
                break;
            }
            remaining -= block;
        }
        if (!placed) throw std::logic_error("path index unwind overran the edge groups");
    }
    if (remaining != 0) throw std::logic_error("path index unwind left a remainder");
    return PathState(std::move(d), std::move(prefix));
}

}  // namespace bvm
