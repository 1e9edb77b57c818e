#include "bvm/diagram.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace bvm {

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
    if (rows.empty()) throw std::invalid_argument("matrix: no rows");
    IntMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int r = 0; r < m.rows; ++r) {
        if (static_cast<int>(rows[r].size()) != m.cols)
            throw std::invalid_argument("matrix: ragged rows");
        for (int c = 0; c < m.cols; ++c) m.at(r, c) = rows[r][c];
    }
    return m;
}

OrderingMatrix canonical_ordering(const IncidenceMatrix& m) {
    OrderingMatrix q(m.rows, m.cols);
    for (int r = 0; r < m.rows; ++r) {
        std::int64_t rank = 1;
        for (int c = 0; c < m.cols; ++c)
            if (m.at(r, c) > 0) q.at(r, c) = rank++;
    }
    return q;
}

namespace {

void check_incidence(const IncidenceMatrix& m, int level) {
    const std::string where = "incidence[" + std::to_string(level) + "]";
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c)
            if (m.at(r, c) < 0) throw std::invalid_argument(where + ": negative entry");
    for (int r = 0; r < m.rows; ++r) {
        std::int64_t sum = 0;
        for (int c = 0; c < m.cols; ++c) sum += m.at(r, c);
        if (sum == 0) throw std::invalid_argument(where + ": zero row " + std::to_string(r + 1));
        if (sum > (std::int64_t{1} << 30))
            throw std::invalid_argument(where + ": row sum too large");
    }
    for (int c = 0; c < m.cols; ++c) {
        std::int64_t sum = 0;
        for (int r = 0; r < m.rows; ++r) sum += m.at(r, c);
        if (sum == 0) throw std::invalid_argument(where + ": zero column " + std::to_string(c + 1));
    }
}

void check_ordering(const IncidenceMatrix& m, const OrderingMatrix& q, int level) {
    const std::string where = "ordering[" + std::to_string(level) + "]";
    if (q.rows != m.rows || q.cols != m.cols)
        throw std::invalid_argument(where + ": shape mismatch with incidence");
    for (int r = 0; r < m.rows; ++r) {
        std::int64_t nonzero = 0;
        for (int c = 0; c < m.cols; ++c) {
            if ((q.at(r, c) == 0) != (m.at(r, c) == 0))
                throw std::invalid_argument(where + ": zero pattern differs from incidence in row " +
                                            std::to_string(r + 1));
            if (m.at(r, c) > 0) ++nonzero;
        }
        std::vector<bool> seen(static_cast<std::size_t>(nonzero) + 1, false);
        for (int c = 0; c < m.cols; ++c) {
            const std::int64_t rank = q.at(r, c);
            if (rank == 0) continue;
            if (rank < 1 || rank > nonzero || seen[static_cast<std::size_t>(rank)])
                throw std::invalid_argument(where + ": row " + std::to_string(r + 1) +
                                            " ranks are not a permutation of 1.." +
                                            std::to_string(nonzero));
            seen[static_cast<std::size_t>(rank)] = true;
        }
    }
}

// Boolean matrix product, positivity only.
std::vector<bool> bool_mul(const std::vector<bool>& a, int ar, int ac, const std::vector<bool>& b,
                           int bc) {
    std::vector<bool> out(static_cast<std::size_t>(ar) * bc, false);
    for (int i = 0; i < ar; ++i)
        for (int k = 0; k < ac; ++k) {
            if (!a[static_cast<std::size_t>(i) * ac + k]) continue;
            for (int j = 0; j < bc; ++j)
                if (b[static_cast<std::size_t>(k) * bc + j])
                    out[static_cast<std::size_t>(i) * bc + j] = true;
        }
    return out;
}

std::vector<bool> to_bool(const IntMatrix& m) {
    std::vector<bool> out(m.data.size());
    for (std::size_t i = 0; i < m.data.size(); ++i) out[i] = m.data[i] > 0;
    return out;
}

bool all_true(const std::vector<bool>& v) {
    return std::all_of(v.begin(), v.end(), [](bool x) { return x; });
}

}  // namespace

const BratteliDiagram::Level& BratteliDiagram::at(int level) const {
    if (level < 1) throw std::invalid_argument("edge level must be >= 1");
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(level) - 1,
                                                levels_.size() - 1);
    return levels_[i];
}

std::int64_t BratteliDiagram::entry(int level, int r, int c) const {
    const IncidenceMatrix& m = incidence(level);
    if (m.rows != 2 || m.cols != 2) throw std::invalid_argument("diagram is not 2x2");
    return m.at(r, c);
}

bool BratteliDiagram::is_2x2() const {
    for (const Level& lv : levels_)
        if (lv.m.rows != 2 || lv.m.cols != 2) return false;
    return true;
}

int BratteliDiagram::level_size(int level) const {
    if (level < 0) throw std::invalid_argument("level must be >= 0");
    if (level == 0) return level0_size_;
    return at(level).m.rows;
}

int BratteliDiagram::indegree(int level, int vertex) const {
    const IncidenceMatrix& m = incidence(level);
    if (vertex < 1 || vertex > m.rows) throw std::invalid_argument("vertex out of range");
    std::int64_t sum = 0;
    for (int c = 0; c < m.cols; ++c) sum += m.at(vertex - 1, c);
    return static_cast<int>(sum);
}

const std::vector<BratteliDiagram::EdgeGroup>& BratteliDiagram::edge_groups(int level,
                                                                            int range) const {
    const Level& lv = at(level);
    if (range < 1 || range > static_cast<int>(lv.groups.size()))
        throw std::invalid_argument("vertex out of range");
    return lv.groups[static_cast<std::size_t>(range) - 1];
}

int BratteliDiagram::edge_source(int level, int range, int order_index) const {
    for (const EdgeGroup& g : edge_groups(level, range))
        if (order_index < g.first_order_index + g.multiplicity) return g.source;
    throw std::invalid_argument("edge order index out of range");
}

int BratteliDiagram::minimal_path_vertex(int level) const {
    if (level < 0) throw std::invalid_argument("level must be >= 0");
    if (level >= static_cast<int>(minimal_prefix_vertices_.size()))
        return minimal_tail_vertex_;
    return minimal_prefix_vertices_[static_cast<std::size_t>(level)];
}

bool BratteliDiagram::hypothesis_a() const {
    for (const Level& lv : levels_)
        for (int r = 0; r < lv.m.rows; ++r) {
            std::int64_t sum = 0;
            for (int c = 0; c < lv.m.cols; ++c) sum += lv.m.at(r, c);
            if (sum <= 1) return false;
        }
    return true;
}

SimplicityReport BratteliDiagram::check_simplicity(int horizon) const {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    SimplicityReport report;
    // Every k past the explicit levels sees the same repeated matrices, so
    // k = explicit level count is a representative for the whole tail.
    const int last_k = static_cast<int>(levels_.size());
    for (int k = 0; k <= last_k; ++k) {
        // grow the product M(k~) ... M(k+1) one level at a time
        std::vector<bool> prod = to_bool(incidence(k + 1));
        int cols = incidence(k + 1).cols;
        int found = all_true(prod) ? k + 1 : -1;
        for (int kt = k + 2; kt <= k + horizon && found < 0; ++kt) {
            const IncidenceMatrix& next = incidence(kt);
            prod = bool_mul(to_bool(next), next.rows, next.cols, prod, cols);
            if (all_true(prod)) found = kt;
        }
        if (found < 0) {
            report.simple = false;
            report.failing_level = k;
            return report;
        }
        if (report.from_level < 0) {
            report.from_level = k;
            report.to_level = found;
        }
    }
    report.simple = true;
    return report;
}

std::vector<BigInt> BratteliDiagram::path_counts(int level) const {
    std::vector<BigInt> counts(static_cast<std::size_t>(level_size(0)), BigInt(1));
    for (int k = 1; k <= level; ++k) {
        const IncidenceMatrix& m = incidence(k);
        std::vector<BigInt> next(static_cast<std::size_t>(m.rows), BigInt(0));
        for (int r = 0; r < m.rows; ++r)
            for (int c = 0; c < m.cols; ++c)
                if (m.at(r, c) > 0) next[static_cast<std::size_t>(r)] +=
                        m.at(r, c) * counts[static_cast<std::size_t>(c)];
        counts = std::move(next);
    }
    return counts;
}

void BratteliDiagram::validate_and_finish(std::optional<int> minimal_tail_vertex,
                                          bool require_primitive) {
    if (levels_.empty()) throw std::invalid_argument("diagram: no levels");
    level0_size_ = levels_.front().m.cols;

    canonical_ = true;
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        Level& lv = levels_[i];
        check_incidence(lv.m, static_cast<int>(i + 1));
        if (lv.q.rows == 0) lv.q = canonical_ordering(lv.m);
        check_ordering(lv.m, lv.q, static_cast<int>(i + 1));
        if (lv.q != canonical_ordering(lv.m)) canonical_ = false;
        if (i + 1 < levels_.size() && levels_[i + 1].m.cols != lv.m.rows)
            throw std::invalid_argument("incidence[" + std::to_string(i + 2) +
                                        "]: column count does not match previous level size");
    }
    if (levels_.back().m.rows != levels_.back().m.cols)
        throw std::invalid_argument("tail incidence matrix must be square (it repeats forever)");

    // Incoming edge groups per (level, range), in order rank.
    for (Level& lv : levels_) {
        lv.groups.resize(static_cast<std::size_t>(lv.m.rows));
        for (int r = 0; r < lv.m.rows; ++r) {
            std::int64_t nonzero = 0;
            for (int c = 0; c < lv.m.cols; ++c)
                if (lv.m.at(r, c) > 0) ++nonzero;
            auto& groups = lv.groups[static_cast<std::size_t>(r)];
            groups.clear();
            std::int64_t offset = 0;
            for (std::int64_t rank = 1; rank <= nonzero; ++rank) {
                for (int c = 0; c < lv.m.cols; ++c) {
                    if (lv.q.at(r, c) == rank) {
                        groups.push_back({c + 1, lv.m.at(r, c), offset});
                        offset += lv.m.at(r, c);
                        break;
                    }
                }
            }
        }
    }

    if (require_primitive) {
        // The repeated tail must admit an all-positive power, otherwise the
        // diagram cannot be simple. Wielandt's bound (l-1)^2 + 1 is decisive.
        const IncidenceMatrix& tail = levels_.back().m;
        const int l = tail.rows;
        const int bound = (l - 1) * (l - 1) + 1;
        std::vector<bool> prod = to_bool(tail);
        const std::vector<bool> base = to_bool(tail);
        bool primitive = all_true(prod);
        for (int e = 2; e <= bound && !primitive; ++e) {
            prod = bool_mul(base, l, l, prod, l);
            primitive = all_true(prod);
        }
        if (!primitive)
            throw std::invalid_argument(
                "incidence: no power of the repeated matrix is entrywise positive; "
                "the diagram is not simple");
    }

    // Resolve the minimal path. Each vertex has a unique minimal incoming
    // edge, so a minimal path is fixed by its vertex at large levels; the
    // repeated tail admits a coherent constant tail only at a fixed point of
    // v -> minimal_source(v).
    const int tail_level = static_cast<int>(levels_.size());
    const int tail_size = levels_.back().m.rows;
    std::vector<int> fixed;
    for (int v = 1; v <= tail_size; ++v)
        if (minimal_source(tail_level, v) == v) fixed.push_back(v);
    if (minimal_tail_vertex) {
        const int v = *minimal_tail_vertex;
        if (std::find(fixed.begin(), fixed.end(), v) == fixed.end())
            throw std::invalid_argument("minimal_tail_vertex " + std::to_string(v) +
                                        " is not a fixed point of the minimal-edge map");
        minimal_tail_vertex_ = v;
    } else if (fixed.size() == 1) {
        minimal_tail_vertex_ = fixed.front();
    } else if (fixed.empty()) {
        throw std::invalid_argument(
            "minimal path is not representable: the minimal-edge map of the repeated "
            "level has no fixed point");
    } else {
        throw std::invalid_argument(
            "minimal path is ambiguous: set minimal_tail_vertex to one of the " +
            std::to_string(fixed.size()) + " fixed points of the minimal-edge map");
    }

    // Walk the minimal-edge sources down through the explicit prefix.
    minimal_prefix_vertices_.assign(levels_.size() + 1, 0);
    minimal_prefix_vertices_.back() = minimal_tail_vertex_;
    for (int k = static_cast<int>(levels_.size()); k >= 1; --k)
        minimal_prefix_vertices_[static_cast<std::size_t>(k) - 1] =
            minimal_source(k, minimal_prefix_vertices_[static_cast<std::size_t>(k)]);
}

std::shared_ptr<const BratteliDiagram> BratteliDiagram::stationary(
    IncidenceMatrix m, std::optional<OrderingMatrix> q, int probe_depth) {
    if (m.rows != m.cols) throw std::invalid_argument("stationary incidence matrix must be square");
    auto d = std::make_shared<BratteliDiagram>();
    d->probe_depth_ = probe_depth;
    d->levels_.push_back({std::move(m), q ? std::move(*q) : OrderingMatrix{}, {}});
    d->validate_and_finish(std::nullopt, true);
    return d;
}

std::shared_ptr<const BratteliDiagram> BratteliDiagram::stationary_unchecked(
    IncidenceMatrix m, std::optional<OrderingMatrix> q, int probe_depth,
    std::optional<int> minimal_tail_vertex) {
    auto d = std::make_shared<BratteliDiagram>();
    d->probe_depth_ = probe_depth;
    d->levels_.push_back({std::move(m), q ? std::move(*q) : OrderingMatrix{}, {}});
    d->validate_and_finish(minimal_tail_vertex, false);
    return d;
}

std::shared_ptr<const BratteliDiagram> BratteliDiagram::from_levels(
    std::vector<IncidenceMatrix> incidence, std::vector<OrderingMatrix> ordering,
    std::optional<int> minimal_tail_vertex, int probe_depth) {
    if (!ordering.empty() && ordering.size() != incidence.size())
        throw std::invalid_argument("ordering list must be empty or match incidence list length");
    auto d = std::make_shared<BratteliDiagram>();
    d->probe_depth_ = probe_depth;
    for (std::size_t i = 0; i < incidence.size(); ++i)
        d->levels_.push_back({std::move(incidence[i]),
                              ordering.empty() ? OrderingMatrix{} : std::move(ordering[i]),
                              {}});
    d->validate_and_finish(minimal_tail_vertex, false);
    return d;
}

}  // namespace bvm
