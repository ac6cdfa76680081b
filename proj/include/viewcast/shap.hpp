#ifndef VIEWCAST_SHAP_HPP
#define VIEWCAST_SHAP_HPP

#include <span>
#include <string>
#include <vector>

#include "viewcast/boosting.hpp"

namespace viewcast {

/// Per-feature additive decomposition of one prediction:
/// base_value + sum(values) equals the model output for the row.
struct Attribution {
    double base_value = 0.0;
    std::vector<double> values;  // one per ensemble column
};

/// Conditional expectation of a tree for `row` given the feature subset S:
/// features in S follow their splits, features outside S average both
/// children weighted by training cover fractions. `in_subset` is indexed by
/// ensemble column.
double tree_set_expectation(const Tree& tree, std::span<const double> row,
                            const std::vector<bool>& in_subset);

/// Exact Shapley values by subset enumeration over the tree's distinct
/// features. Guarded at 15 features (TooManyFeaturesError above that).
Attribution brute_force_shapley(const Tree& tree, std::span<const double> row,
                                std::size_t n_columns);

/// Exact per-tree Shapley attribution of an ensemble prediction, summed over
/// trees; matches brute_force_shapley per tree. base_value folds the
/// ensemble base score plus each tree's empty-set expectation.
Attribution shap_values(const TreeEnsemble& ensemble, std::span<const double> row);

struct ShapSummary {
    struct FeatureRank {
        std::string feature;
        double mean_abs_shap = 0.0;
    };
    struct Sample {
        std::size_t row = 0;
        std::string feature;
        double feature_value = 0.0;
        double shap_value = 0.0;
    };

    std::vector<FeatureRank> ranking;  // mean |shap| descending, ties by column index
    std::vector<Sample> samples;       // long form, for external plotting
};

/// Attributions for every frame row. `exclude` drops columns from the
/// ranking (not from the attribution computation).
ShapSummary shap_summary(const TreeEnsemble& ensemble, const FeatureFrame& frame,
                         const std::vector<std::string>& exclude = {});

}  // namespace viewcast

#endif
