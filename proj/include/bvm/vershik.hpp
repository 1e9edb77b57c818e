#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "bvm/diagram.hpp"
#include "bvm/ints.hpp"

namespace bvm {

/// One edge of an ordered diagram: level, source vertex, order index among
/// the edges sharing its range, range vertex. The source is redundant with
/// (level, range, order_index); it is kept because the paper's (s, m, r)
/// notation is the working currency of every algorithm here.
struct Edge {
    int level = 0;
    int source = 0;
    int order_index = 0;
    int range = 0;

    auto operator<=>(const Edge&) const = default;
};

/// A path cofinal with the minimal path: an explicit edge prefix, the rest
/// implicitly the minimal path's edges. Normalized so the prefix never ends
/// in minimal-path edges; the empty prefix is the minimal path itself.
class PathState {
public:
    PathState(std::shared_ptr<const BratteliDiagram> diagram, std::vector<Edge> prefix);

    static PathState minimal(std::shared_ptr<const BratteliDiagram> diagram);

    const BratteliDiagram& diagram() const { return *diagram_; }
    const std::shared_ptr<const BratteliDiagram>& diagram_ptr() const { return diagram_; }

    const std::vector<Edge>& prefix() const { return prefix_; }
    int prefix_length() const { return static_cast<int>(prefix_.size()); }
    bool is_minimal() const { return prefix_.empty(); }

    /// Edge at any level >= 1, materializing the implicit tail.
    Edge edge(int level) const;

    bool operator==(const PathState& other) const;

private:
    PathState() = default;
    std::shared_ptr<const BratteliDiagram> diagram_;
    std::vector<Edge> prefix_;
    friend class PathOps;
};

/// The order-minimal path segment through levels 1..level with the given
/// range: every edge is the order-0 edge into its range.
std::vector<Edge> minimal_path_to(const BratteliDiagram& d, int level, int vertex);

/// First level whose edge is not maximal (the carry depth). Searches past the
/// prefix into the implicit tail; a run of more than 64 forced levels beyond
/// the prefix means the diagram cannot represent the successor and throws.
int carry_depth(const PathState& x);

/// Last level whose edge differs from the minimal path's; 0 for the minimal
/// path. Equals the normalized prefix length.
int last_active_level(const PathState& x);

/// Strictly increasing levels below carry_depth(x) whose edges are not
/// minimal. Under Hypothesis A this is 1..carry_depth(x)-1.
std::vector<int> carry_set(const PathState& x);

/// The Vershik successor: bump the first non-maximal edge to its order
/// successor and reset everything below to the minimal path into its source.
PathState successor(const PathState& x);

/// Carry-reset target: levels 1..carry_set(x)[j-1] replaced by the minimal
/// path into the source of the next retained edge. j is 1-based.
PathState reset_target(const PathState& x, int j);

/// n-fold successor.
PathState iterate(const PathState& x, std::uint64_t n);

/// Order index of x among all paths that agree with the minimal path beyond
/// level last_active_level(x); the nonnegative integer this state encodes.
BigInt path_index(const PathState& x);

/// Inverse of path_index: the n-th state in successor order from the minimal
/// path, computed arithmetically from the diagram's path counts.
PathState path_at_index(std::shared_ptr<const BratteliDiagram> d, const BigInt& n);

/// Mutating core used by the simulation hot path; PathState wraps these.
class PathOps {
public:
    explicit PathOps(std::shared_ptr<const BratteliDiagram> diagram);

    const std::vector<Edge>& prefix() const { return prefix_; }
    void set(const PathState& x) { prefix_ = x.prefix(); }
    PathState state() const { return PathState(diagram_, prefix_); }
    bool is_minimal() const { return prefix_.empty(); }

    int carry_depth() const;
    void carry_levels(int depth, std::vector<int>& out) const;  // carry set given depth
    void advance();                                             // successor in place
    void reset(int carry_level);  // minimal path through 1..carry_level
    Edge edge(int level) const;

private:
    void normalize();
    std::shared_ptr<const BratteliDiagram> diagram_;
    std::vector<Edge> prefix_;
};

}  // namespace bvm
