#include "viewcast/shap.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>

#include "viewcast/errors.hpp"

namespace viewcast {

namespace {

constexpr std::size_t kMaxExactFeatures = 15;

// s! (m-1-s)! / m! for the Shapley sum; m <= 15 keeps factorials exact.
double shapley_coeff(std::size_t s, std::size_t m) {
    static const auto fact = [] {
        std::array<double, kMaxExactFeatures + 1> f{};
        f[0] = 1.0;
        for (std::size_t i = 1; i < f.size(); ++i) f[i] = f[i - 1] * static_cast<double>(i);
        return f;
    }();
    return fact[s] * fact[m - 1 - s] / fact[m];
}

double expectation_rec(const Tree& tree, int node_id, std::span<const double> row,
                       const std::vector<bool>& in_subset) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    if (node.is_leaf()) return node.weight;
    if (in_subset[static_cast<std::size_t>(node.feature)]) {
        const int next =
            row[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
        return expectation_rec(tree, next, row, in_subset);
    }
    const TreeNode& left = tree.nodes[static_cast<std::size_t>(node.left)];
    const TreeNode& right = tree.nodes[static_cast<std::size_t>(node.right)];
    return (left.cover * expectation_rec(tree, node.left, row, in_subset) +
            right.cover * expectation_rec(tree, node.right, row, in_subset)) /
           node.cover;
}

// One root-to-leaf path, grouped by feature: `follow` is 1 when the row
// takes every edge toward this leaf at that feature's nodes, `fraction` the
// product of cover fractions of those edges.
struct PathFactor {
    int feature;
    double follow;
    double fraction;
};

// Exact Shapley contribution of a single leaf's multiplicative game,
// enumerated over the <= depth distinct features on its path. Features off
// the path are dummies and receive nothing from this leaf.
void accumulate_leaf(const std::vector<PathFactor>& factors, double leaf_weight,
                     std::vector<double>& phi, double& phi0) {
    const std::size_t m = factors.size();
    if (m == 0) {
        phi0 += leaf_weight;
        return;
    }

    // v[S] = prod_{j in S} follow_j * prod_{j not in S} fraction_j
    const std::size_t subsets = std::size_t{1} << m;
    std::vector<double> v(subsets);
    double empty = 1.0;
    for (const auto& f : factors) empty *= f.fraction;
    v[0] = empty;
    for (std::size_t s = 1; s < subsets; ++s) {
        const int bit = std::countr_zero(s);
        const auto& f = factors[static_cast<std::size_t>(bit)];
        // fractions are cover ratios of nonempty children, always > 0
        v[s] = v[s & (s - 1)] / f.fraction * f.follow;
    }

    phi0 += leaf_weight * v[0];
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t jbit = std::size_t{1} << j;
        double contrib = 0.0;
        for (std::size_t s = 0; s < subsets; ++s) {
            if (s & jbit) continue;
            const auto size = static_cast<std::size_t>(std::popcount(s));
            contrib += shapley_coeff(size, m) * (v[s | jbit] - v[s]);
        }
        phi[static_cast<std::size_t>(factors[j].feature)] += leaf_weight * contrib;
    }
}

void tree_shap(const Tree& tree, std::span<const double> row, std::vector<double>& phi,
               double& phi0) {
    std::vector<PathFactor> path;
    // Depth-first walk carrying the per-feature factors of the current path.
    auto walk = [&](auto&& self, int node_id) -> void {
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
        if (node.is_leaf()) {
            accumulate_leaf(path, node.weight, phi, phi0);
            return;
        }
        const bool goes_left = row[static_cast<std::size_t>(node.feature)] < node.threshold;
        for (int child : {node.left, node.right}) {
            const TreeNode& c = tree.nodes[static_cast<std::size_t>(child)];
            const double fraction = c.cover / node.cover;
            const double follow = (child == node.left) == goes_left ? 1.0 : 0.0;

            auto it = std::find_if(path.begin(), path.end(),
                                   [&](const PathFactor& p) { return p.feature == node.feature; });
            if (it == path.end()) {
                path.push_back({node.feature, follow, fraction});
                self(self, child);
                path.pop_back();
            } else {
                const PathFactor saved = *it;
                it->follow *= follow;
                it->fraction *= fraction;
                self(self, child);
                *it = saved;
            }
        }
    };
    walk(walk, 0);
}

}  // namespace

double tree_set_expectation(const Tree& tree, std::span<const double> row,
                            const std::vector<bool>& in_subset) {
    return expectation_rec(tree, 0, row, in_subset);
}

Attribution brute_force_shapley(const Tree& tree, std::span<const double> row,
                                std::size_t n_columns) {
    const std::vector<int> features = tree.used_features();
    const std::size_t m = features.size();
    if (m > kMaxExactFeatures) throw TooManyFeaturesError(m);

    Attribution out;
    out.values.assign(n_columns, 0.0);

    std::vector<bool> in_subset(n_columns, false);
    const std::size_t subsets = std::size_t{1} << m;
    std::vector<double> v(subsets);
    for (std::size_t s = 0; s < subsets; ++s) {
        for (std::size_t j = 0; j < m; ++j)
            in_subset[static_cast<std::size_t>(features[j])] = (s >> j) & 1;
        v[s] = tree_set_expectation(tree, row, in_subset);
        for (std::size_t j = 0; j < m; ++j)
            in_subset[static_cast<std::size_t>(features[j])] = false;
    }

    out.base_value = v[0];
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t jbit = std::size_t{1} << j;
        double phi = 0.0;
        for (std::size_t s = 0; s < subsets; ++s) {
            if (s & jbit) continue;
            const auto size = static_cast<std::size_t>(std::popcount(s));
            phi += shapley_coeff(size, m) * (v[s | jbit] - v[s]);
        }
        out.values[static_cast<std::size_t>(features[j])] = phi;
    }
    return out;
}

Attribution shap_values(const TreeEnsemble& ensemble, std::span<const double> row) {
    if (row.size() != ensemble.columns().size())
        throw MissingFeatureError(row.size() < ensemble.columns().size()
                                      ? ensemble.columns()[row.size()]
                                      : "(extra values)");
    Attribution out;
    out.base_value = ensemble.base_score();
    out.values.assign(ensemble.columns().size(), 0.0);
    for (const auto& tree : ensemble.trees()) tree_shap(tree, row, out.values, out.base_value);
    return out;
}

ShapSummary shap_summary(const TreeEnsemble& ensemble, const FeatureFrame& frame,
                         const std::vector<std::string>& exclude) {
    if (frame.nrows() == 0) throw EmptyFrameError();

    // Map bound columns onto the frame once; attribution uses all of them.
    std::vector<std::size_t> map;
    for (const auto& name : ensemble.columns()) {
        auto idx = frame.column_index(name);
        if (!idx) throw MissingFeatureError(name);
        map.push_back(*idx);
    }

    const std::size_t ncols = ensemble.columns().size();
    std::vector<double> abs_sum(ncols, 0.0);
    ShapSummary summary;
    std::vector<double> row(ncols);
    for (std::size_t r = 0; r < frame.nrows(); ++r) {
        auto src = frame.row(r);
        for (std::size_t c = 0; c < ncols; ++c) row[c] = src[map[c]];
        Attribution attr = shap_values(ensemble, row);
        for (std::size_t c = 0; c < ncols; ++c) {
            abs_sum[c] += std::abs(attr.values[c]);
            summary.samples.push_back({r, ensemble.columns()[c], row[c], attr.values[c]});
        }
    }

    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < ncols; ++c) {
        if (std::find(exclude.begin(), exclude.end(), ensemble.columns()[c]) == exclude.end())
            order.push_back(c);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return abs_sum[a] > abs_sum[b]; });
    for (std::size_t c : order)
        summary.ranking.push_back(
            {ensemble.columns()[c], abs_sum[c] / static_cast<double>(frame.nrows())});
    return summary;
}

}  // namespace viewcast
