#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "windreg/matrix.hpp"

namespace windreg {

struct TreeParams {
  std::optional<std::size_t> max_depth;  // unlimited when empty; root has depth 0
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  double min_impurity_decrease = 0.0;

  /// Throws InvalidParams unless min_samples_split >= 2 * min_samples_leaf,
  /// min_samples_leaf >= 1 and min_impurity_decrease >= 0.
  void validate() const;
};

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double objective = 0.0;        // (n_L var_L + n_R var_R) / n, population variances
  double parent_impurity = 0.0;  // population variance of the subset
  std::size_t left_count = 0;
  std::size_t right_count = 0;
};

/// Exhaustive variance-reduction split over every feature and every midpoint
/// between consecutive distinct values. Rows with x[feature] <= threshold go
/// left. Ties prefer the lower feature index, then the lower threshold.
/// Returns nothing when no split respects min_samples_leaf and lowers the
/// impurity by more than min_impurity_decrease.
std::optional<Split> best_split(const Matrix& features, std::span<const double> target,
                                std::span<const std::size_t> rows, const TreeParams& params);

inline constexpr std::size_t kNoChild = static_cast<std::size_t>(-1);

struct TreeNode {
  bool leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = kNoChild;
  std::size_t right = kNoChild;
  std::size_t samples = 0;
  double value = 0.0;             // mean target of the rows reaching this node
  double impurity = 0.0;          // population variance of those targets, kW^2
  double impurity_decrease = 0.0; // impurity minus the split objective (internal nodes)

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary regression tree stored as a flat node array in depth-first
/// preorder; node 0 is the root.
class Tree {
 public:
  Tree() = default;
  Tree(std::vector<TreeNode> nodes, std::size_t feature_count);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t feature_count() const noexcept { return feature_count_; }
  std::size_t leaf_count() const;
  std::size_t depth() const;

  /// Index of the unique leaf reached by x.
  std::size_t leaf_for(std::span<const double> x) const;
  /// Node indices visited from the root to the leaf reached by x.
  std::vector<std::size_t> path(std::span<const double> x) const;
  /// Routing indicator: 1 if x reaches node m, else 0.
  int reaches(std::size_t node, std::span<const double> x) const;

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  void check_dimension(std::span<const double> x) const;

  std::vector<TreeNode> nodes_;
  std::size_t feature_count_ = 0;
};

Tree fit_tree(const Matrix& features, std::span<const double> target, const TreeParams& params = {});

double predict_tree(const Tree& tree, std::span<const double> x);
std::vector<double> predict_tree(const Tree& tree, const Matrix& features);

struct FeatureImportance {
  std::vector<double> values;  // sums to 1
  bool uniform_fallback = false;  // tree had no splits; values are 1/p
};

/// Sample-weighted impurity decrease per split feature, normalized to sum 1.
FeatureImportance tree_importance(const Tree& tree);

}  // namespace windreg
