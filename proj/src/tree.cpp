#include "windreg/tree.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace windreg {

namespace {

double mean_of(std::span<const double> target, std::span<const std::size_t> rows) {
  double sum = 0.0;
  for (auto r : rows) sum += target[r];
  return sum / static_cast<double>(rows.size());
}

double variance_of(std::span<const double> target, std::span<const std::size_t> rows, double mean) {
  double ss = 0.0;
  for (auto r : rows) ss += (target[r] - mean) * (target[r] - mean);
  return ss / static_cast<double>(rows.size());
}

double midpoint(double lo, double hi) {
  const double mid = (lo + hi) / 2.0;
  // Adjacent doubles can round the midpoint onto hi, which would send hi left.
  return (mid >= hi || mid < lo) ? lo : mid;
}

}  // namespace

void TreeParams::validate() const {
  if (min_samples_leaf < 1) throw Error(ErrorCode::InvalidParams, "min_samples_leaf must be at least 1");
  if (min_samples_split < 2 * min_samples_leaf)
    throw Error(ErrorCode::InvalidParams,
                fmt::format("min_samples_split ({}) must be at least 2 * min_samples_leaf ({})",
                            min_samples_split, min_samples_leaf));
  if (!(min_impurity_decrease >= 0.0))
    throw Error(ErrorCode::InvalidParams, "min_impurity_decrease must be non-negative");
}

constexpr double kTieTolerance = 1e-12;

std::optional<Split> best_split(const Matrix& features, std::span<const double> target,
                                std::span<const std::size_t> rows, const TreeParams& params) {
  const std::size_t m = rows.size();
  if (m < params.min_samples_split || m < 2) return std::nullopt;

  const auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(),
                                            [&](auto a, auto b) { return target[a] < target[b]; });
  if (target[*lo] == target[*hi]) return std::nullopt;

  const double mean = mean_of(target, rows);
  double total_sum = 0.0, total_sq = 0.0;
  for (auto r : rows) {
    const double c = target[r] - mean;
    total_sum += c;
    total_sq += c * c;
  }
  const double md = static_cast<double>(m);
  const double parent = std::max(0.0, (total_sq - total_sum * total_sum / md) / md);

  std::optional<Split> best;
  std::vector<std::size_t> order(rows.begin(), rows.end());
  for (std::size_t f = 0; f < features.cols(); ++f) {
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
      const double xa = features(a, f), xb = features(b, f);
      return xa < xb || (xa == xb && a < b);
    });
    double left_sum = 0.0, left_sq = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double c = target[order[i]] - mean;
      left_sum += c;
      left_sq += c * c;
      const std::size_t nl = i + 1, nr = m - nl;
      const double x0 = features(order[i], f), x1 = features(order[i + 1], f);
      if (x0 == x1 || nl < params.min_samples_leaf || nr < params.min_samples_leaf) continue;
      const double right_sum = total_sum - left_sum;
      const double right_sq = total_sq - left_sq;
      const double ss_left = std::max(0.0, left_sq - left_sum * left_sum / static_cast<double>(nl));
      const double ss_right = std::max(0.0, right_sq - right_sum * right_sum / static_cast<double>(nr));
      const double objective = std::min(parent, (ss_left + ss_right) / md);
      // Equal partitions reached through different feature orders differ only
      // by rounding; the tolerance keeps the lower feature index on such ties.
      if (!best || objective < best->objective - kTieTolerance * parent) {
        best = Split{f, midpoint(x0, x1), objective, parent, nl, nr};
      }
    }
  }
  if (!best || !(parent - best->objective > params.min_impurity_decrease)) return std::nullopt;
  return best;
}

namespace {

class Builder {
 public:
  Builder(const Matrix& features, std::span<const double> target, const TreeParams& params)
      : features_(features), target_(target), params_(params) {}

  std::size_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    const std::size_t id = nodes_.size();
    nodes_.emplace_back();
    {
      TreeNode& node = nodes_[id];
      node.samples = rows.size();
      node.value = mean_of(target_, rows);
      node.impurity = variance_of(target_, rows, node.value);
    }

    const bool depth_left = !params_.max_depth || depth < *params_.max_depth;
    const auto split = depth_left ? best_split(features_, target_, rows, params_) : std::nullopt;
    if (!split) return id;

    const auto mid = std::stable_partition(rows.begin(), rows.end(), [&](auto r) {
      return features_(r, split->feature) <= split->threshold;
    });
    std::vector<std::size_t> right(mid, rows.end());
    rows.erase(mid, rows.end());

    nodes_[id].leaf = false;
    nodes_[id].feature = split->feature;
    nodes_[id].threshold = split->threshold;
    nodes_[id].impurity_decrease = split->parent_impurity - split->objective;
    const std::size_t left_id = grow(std::move(rows), depth + 1);
    const std::size_t right_id = grow(std::move(right), depth + 1);
    nodes_[id].left = left_id;
    nodes_[id].right = right_id;
    return id;
  }

  std::vector<TreeNode> take() { return std::move(nodes_); }

 private:
  const Matrix& features_;
  std::span<const double> target_;
  const TreeParams& params_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

Tree::Tree(std::vector<TreeNode> nodes, std::size_t feature_count)
    : nodes_(std::move(nodes)), feature_count_(feature_count) {
  if (nodes_.empty()) throw Error(ErrorCode::CorruptFile, "tree has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.leaf) continue;
    if (n.feature >= feature_count_ || n.left <= i || n.right <= i || n.left >= nodes_.size() ||
        n.right >= nodes_.size())
      throw Error(ErrorCode::CorruptFile, fmt::format("node {} has invalid links", i));
  }
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](auto& n) { return n.leaf; }));
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (!nodes_[i].leaf) {
      depth[nodes_[i].left] = depth[i] + 1;
      depth[nodes_[i].right] = depth[i] + 1;
    }
  }
  return deepest;
}

void Tree::check_dimension(std::span<const double> x) const {
  if (x.size() != feature_count_)
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("tree has {} features, input has {}", feature_count_, x.size()));
}

std::vector<std::size_t> Tree::path(std::span<const double> x) const {
  check_dimension(x);
  std::vector<std::size_t> out;
  std::size_t id = 0;
  while (true) {
    out.push_back(id);
    const auto& node = nodes_[id];
    if (node.leaf) return out;
    id = x[node.feature] <= node.threshold ? node.left : node.right;
  }
}

std::size_t Tree::leaf_for(std::span<const double> x) const {
  check_dimension(x);
  std::size_t id = 0;
  while (!nodes_[id].leaf) {
    const auto& node = nodes_[id];
    id = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return id;
}

int Tree::reaches(std::size_t node, std::span<const double> x) const {
  const auto p = path(x);
  return std::find(p.begin(), p.end(), node) != p.end() ? 1 : 0;
}

Tree fit_tree(const Matrix& features, std::span<const double> target, const TreeParams& params) {
  params.validate();
  if (features.rows() == 0 || target.empty()) throw Error(ErrorCode::EmptyDataset, "cannot fit a tree on zero rows");
  if (features.rows() != target.size())
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} rows but {} targets", features.rows(), target.size()));
  std::vector<std::size_t> rows(features.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Builder builder(features, target, params);
  builder.grow(std::move(rows), 0);
  return Tree(builder.take(), features.cols());
}

double predict_tree(const Tree& tree, std::span<const double> x) {
  return tree.nodes()[tree.leaf_for(x)].value;
}

std::vector<double> predict_tree(const Tree& tree, const Matrix& features) {
  std::vector<double> out(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) out[i] = predict_tree(tree, features.row(i));
  return out;
}

FeatureImportance tree_importance(const Tree& tree) {
  const std::size_t p = tree.feature_count();
  FeatureImportance out;
  out.values.assign(p, 0.0);
  const double root = static_cast<double>(tree.root().samples);
  for (const auto& node : tree.nodes())
    if (!node.leaf) out.values[node.feature] += static_cast<double>(node.samples) / root * node.impurity_decrease;
  double total = 0.0;
  for (double v : out.values) total += v;
  if (!(total > 0.0)) {
    out.values.assign(p, p == 0 ? 0.0 : 1.0 / static_cast<double>(p));
    out.uniform_fallback = true;
    return out;
  }
  for (double& v : out.values) v /= total;
  return out;
}

}  // namespace windreg
