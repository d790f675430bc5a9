#ifndef TREESPEC_TRUNCATED_TREE_HPP
#define TREESPEC_TRUNCATED_TREE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace treespec {

/// Finite window of T_d of given depth, laid out level by level in BFS
/// order. The root is vertex 0 and has d children; every other internal
/// vertex has d-1 children, so children of consecutive vertices are
/// consecutive. All structure (parent, children, level) is arithmetic on
/// the level offsets; nothing per-vertex is stored.
class TruncatedTree {
public:
    TruncatedTree(int degree, int depth, std::vector<std::uint64_t> offsets)
        : degree_(degree), depth_(depth), offsets_(std::move(offsets)) {}

    int degree() const { return degree_; }
    int depth() const { return depth_; }
    std::uint64_t vertex_count() const { return offsets_.back(); }

    std::uint64_t level_begin(int level) const { return offsets_[std::size_t(level)]; }
    std::uint64_t level_end(int level) const { return offsets_[std::size_t(level) + 1]; }
    std::uint64_t level_size(int level) const { return level_end(level) - level_begin(level); }

    int level_of(std::uint64_t v) const {
        int lo = 0, hi = depth_;
        while (lo < hi) {
            const int mid = (lo + hi + 1) / 2;
            if (offsets_[std::size_t(mid)] <= v) lo = mid; else hi = mid - 1;
        }
        return lo;
    }

    std::uint64_t parent(std::uint64_t v) const {
        const int lv = level_of(v);
        if (lv == 0) throw std::invalid_argument("TruncatedTree::parent: root has no parent");
        if (lv == 1) return 0;
        return level_begin(lv - 1) + (v - level_begin(lv)) / std::uint64_t(degree_ - 1);
    }

    int child_count(std::uint64_t v) const {
        const int lv = level_of(v);
        if (lv == depth_) return 0;
        return v == 0 ? degree_ : degree_ - 1;
    }

    /// First child of v; valid only when child_count(v) > 0.
    std::uint64_t first_child(std::uint64_t v) const {
        const int lv = level_of(v);
        if (v == 0) return 1;
        return level_begin(lv + 1) + (v - level_begin(lv)) * std::uint64_t(degree_ - 1);
    }

private:
    int degree_;
    int depth_;
    std::vector<std::uint64_t> offsets_; // offsets_[l] = index of first level-l vertex
};

/// Builds the depth-D window of T_d. Vertex counts above 10^8 are refused.
inline TruncatedTree build_tree(int degree, int depth) {
    if (degree < 2) throw std::invalid_argument("build_tree: degree must be >= 2");
    if (depth < 0) throw std::invalid_argument("build_tree: depth must be >= 0");
    constexpr std::uint64_t kBudget = 100000000;
    if (std::uint64_t(depth) >= kBudget) {
        throw std::invalid_argument("build_tree: depth " + std::to_string(depth) +
                                    " exceeds the 10^8 vertex budget");
    }
    std::vector<std::uint64_t> offsets(std::size_t(depth) + 2);
    offsets[0] = 0;
    std::uint64_t total = 1, level = 1;
    offsets[1] = 1;
    for (int l = 1; l <= depth; ++l) {
        level = (l == 1) ? std::uint64_t(degree) : level * std::uint64_t(degree - 1);
        total += level;
        if (total > kBudget) {
            throw std::invalid_argument("build_tree: vertex count " + std::to_string(total) +
                                        "+ at depth " + std::to_string(l) +
                                        " exceeds the 10^8 budget");
        }
        offsets[std::size_t(l) + 1] = total;
    }
    return TruncatedTree(degree, depth, std::move(offsets));
}

} // namespace treespec

#endif
