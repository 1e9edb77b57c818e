#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bvm/ints.hpp"

namespace bvm {

/// Dense integer matrix, row-major. Used both for edge multiplicities
/// (incidence) and for the per-row source ranking (ordering).
struct IntMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<std::int64_t> data;

    IntMatrix() = default;
    IntMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0) {}

    std::int64_t& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    std::int64_t at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    static IntMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);
    bool operator==(const IntMatrix&) const = default;
};

using IncidenceMatrix = IntMatrix;
using OrderingMatrix = IntMatrix;

/// Canonical ordering for an incidence matrix: each row ranks its nonzero
/// columns in index order.
OrderingMatrix canonical_ordering(const IncidenceMatrix& m);

struct SimplicityReport {
    bool simple = false;
    int from_level = -1;  // first k with an all-positive product
    int to_level = -1;    // the matching k~
    int failing_level = -1;
};

/// Finite description of an ordered Bratteli diagram with consecutive
/// ordering: an explicit list of (incidence, ordering) level pairs, the last
/// pair repeating forever. A stationary diagram is a single repeated pair.
///
/// Vertices are 1-based per level; edge order indices are 0-based. Level k's
/// incidence matrix has one row per level-k vertex (range) and one column per
/// level-(k-1) vertex (source).
class BratteliDiagram {
public:
    /// Single repeated (M, Q); Q omitted means canonical. Rejects matrices
    /// with zero rows/columns, inconsistent orderings and non-primitive M
    /// (no power of M is entrywise positive).
    static std::shared_ptr<const BratteliDiagram> stationary(
        IncidenceMatrix m, std::optional<OrderingMatrix> q = std::nullopt, int probe_depth = 16);

    /// Same but skips the primitivity check; for diagnostics and tests.
    static std::shared_ptr<const BratteliDiagram> stationary_unchecked(
        IncidenceMatrix m, std::optional<OrderingMatrix> q = std::nullopt, int probe_depth = 16,
        std::optional<int> minimal_tail_vertex = std::nullopt);

    /// Explicit level list, last pair repeated. `ordering` may be empty
    /// (canonical everywhere) or match `incidence` in length.
    /// `minimal_tail_vertex` resolves the minimal path when the minimal-edge
    /// graph admits more than one coherent tail.
    static std::shared_ptr<const BratteliDiagram> from_levels(
        std::vector<IncidenceMatrix> incidence, std::vector<OrderingMatrix> ordering = {},
        std::optional<int> minimal_tail_vertex = std::nullopt, int probe_depth = 16);

    bool stationary() const { return levels_.size() == 1; }
    int probe_depth() const { return probe_depth_; }
    std::size_t explicit_levels() const { return levels_.size(); }

    /// Vertex count at `level` >= 0.
    int level_size(int level) const;

    /// Incidence/ordering matrix of edge level `level` >= 1.
    const IncidenceMatrix& incidence(int level) const { return at(level).m; }
    const OrderingMatrix& ordering(int level) const { return at(level).q; }

    int indegree(int level, int vertex) const;

    /// Source vertex of the edge with the given order index among the edges
    /// into `range` at `level`.
    int edge_source(int level, int range, int order_index) const;

    /// Source of the order-minimal edge into `vertex` at `level`.
    int minimal_source(int level, int vertex) const { return edge_source(level, vertex, 0); }

    /// Incoming edges of (level, range) grouped by source in order rank:
    /// list of (source, multiplicity), plus running order-index offsets.
    struct EdgeGroup {
        int source;
        std::int64_t multiplicity;
        std::int64_t first_order_index;
    };
    const std::vector<EdgeGroup>& edge_groups(int level, int range) const;

    bool canonical() const { return canonical_; }

    /// Vertex the minimal path passes through at `level` >= 0.
    int minimal_path_vertex(int level) const;

    /// True iff every incidence row sums to more than one at every level.
    bool hypothesis_a() const;

    /// For every k < horizon, looks for k~ <= horizon making the product
    /// M(k~)...M(k+1) entrywise positive. Witness is the first (k, k~) pair.
    SimplicityReport check_simplicity(int horizon) const;
    SimplicityReport check_simplicity() const { return check_simplicity(probe_depth_); }

    /// Counts of paths from V(0) into each vertex of `level`, i.e.
    /// M(level)...M(1) applied to the all-ones vector.
    std::vector<BigInt> path_counts(int level) const;

    /// Convenience accessors for the 2x2 theory. Throw unless the level-k
    /// matrix is 2x2.
    std::int64_t a(int level = 1) const { return entry(level, 0, 0); }
    std::int64_t b(int level = 1) const { return entry(level, 0, 1); }
    std::int64_t c(int level = 1) const { return entry(level, 1, 0); }
    std::int64_t d(int level = 1) const { return entry(level, 1, 1); }
    bool is_2x2() const;

private:
    struct Level {
        IncidenceMatrix m;
        OrderingMatrix q;
        // per range vertex: incoming edge groups in order rank
        std::vector<std::vector<EdgeGroup>> groups;
    };

    const Level& at(int level) const;
    std::int64_t entry(int level, int r, int c) const;
    void validate_and_finish(std::optional<int> minimal_tail_vertex, bool require_primitive);

    std::vector<Level> levels_;
    std::vector<int> minimal_prefix_vertices_;  // levels 0 .. explicit count
    int minimal_tail_vertex_ = 1;
    int level0_size_ = 0;
    int probe_depth_ = 16;
    bool canonical_ = true;
};

}  // namespace bvm
