#include "premium/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "premium/error.hpp"

namespace premium {

namespace {

// Squared-error criterion on raw targets.
class SseCriterion {
 public:
  struct Stats {
    double sum = 0.0;
    double count = 0.0;
  };

  explicit SseCriterion(std::span<const double> targets) : targets_(targets) {}

  void add(Stats& s, std::size_t row) const {
    s.sum += targets_[row];
    s.count += 1.0;
  }
  static Stats minus(const Stats& total, const Stats& part) {
    return {total.sum - part.sum, total.count - part.count};
  }
  // SSE(parent) - SSE(left) - SSE(right), written in a form that is exactly
  // zero when both sides have equal sums per sample.
  static double gain(const Stats& l, const Stats& r) {
    const double d = r.count * l.sum - l.count * r.sum;
    return d * d / (l.count * r.count * (l.count + r.count));
  }
  static double leaf_value(const Stats& s) { return s.sum / s.count; }

  bool is_pure(std::span<const std::size_t> rows) const {
    const double first = targets_[rows.front()];
    return std::all_of(rows.begin(), rows.end(),
                       [&](std::size_t r) { return targets_[r] == first; });
  }

 private:
  std::span<const double> targets_;
};

// Second-order criterion on (gradient, hessian) pairs.
class NewtonCriterion {
 public:
  struct Stats {
    double g = 0.0;
    double h = 0.0;
  };

  NewtonCriterion(std::span<const double> g, std::span<const double> h,
                  NewtonPenalty penalty)
      : g_(g), h_(h), penalty_(penalty) {}

  void add(Stats& s, std::size_t row) const {
    s.g += g_[row];
    s.h += h_[row];
  }
  static Stats minus(const Stats& total, const Stats& part) {
    return {total.g - part.g, total.h - part.h};
  }
  double gain(const Stats& l, const Stats& r) const {
    const double lambda = penalty_.lambda;
    const double g = l.g + r.g;
    const double h = l.h + r.h;
    return 0.5 * (score(l.g, l.h + lambda) + score(r.g, r.h + lambda) -
                  score(g, h + lambda)) -
           penalty_.gamma;
  }
  double leaf_value(const Stats& s) const {
    const double denom = s.h + penalty_.lambda;
    return denom > 0.0 ? -s.g / denom : 0.0;
  }
  bool is_pure(std::span<const std::size_t>) const { return false; }

 private:
  static double score(double g, double denom) {
    return denom > 0.0 ? g * g / denom : 0.0;
  }

  std::span<const double> g_;
  std::span<const double> h_;
  NewtonPenalty penalty_;
};

double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  // Adjacent doubles: keep lo on the left and hi on the right.
  return mid < hi ? mid : lo;
}

template <typename Criterion>
class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Criterion& criterion,
              const TreeConfig& config, RandomStream& stream)
      : x_(x), criterion_(criterion), config_(config), stream_(stream) {}

  std::vector<TreeNode> build(std::span<std::size_t> rows) {
    nodes_.clear();
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  using Stats = typename Criterion::Stats;

  struct Split {
    double gain = -std::numeric_limits<double>::infinity();
    std::int32_t feature = TreeNode::kLeaf;
    double threshold = 0.0;
  };

  std::int32_t grow(std::span<std::size_t> rows, std::size_t depth) {
    Stats total;
    for (const auto r : rows) criterion_.add(total, r);

    const auto index = static_cast<std::int32_t>(nodes_.size());
    TreeNode leaf;
    leaf.value = criterion_.leaf_value(total);
    leaf.count = rows.size();
    nodes_.push_back(leaf);

    if (config_.max_depth && depth >= *config_.max_depth) return index;
    if (rows.size() < config_.min_samples_split) return index;
    if (criterion_.is_pure(rows)) return index;

    const Split best = find_split(rows, total);
    if (best.feature == TreeNode::kLeaf || !(best.gain > config_.min_gain)) {
      return index;
    }

    const auto f = static_cast<std::size_t>(best.feature);
    const auto middle = std::stable_partition(
        rows.begin(), rows.end(),
        [&](std::size_t r) { return x_(r, f) <= best.threshold; });
    const auto n_left = static_cast<std::size_t>(middle - rows.begin());

    const std::int32_t left = grow(rows.first(n_left), depth + 1);
    const std::int32_t right = grow(rows.subspan(n_left), depth + 1);
    TreeNode& node = nodes_[static_cast<std::size_t>(index)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t m = x_.cols();
    if (config_.max_features && *config_.max_features < m) {
      auto picked = stream_.sample_without_replacement(m, *config_.max_features);
      std::sort(picked.begin(), picked.end());
      return picked;
    }
    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }

  // Exhaustive search; ties resolve to the lowest feature, then the lowest
  // threshold, because only a strictly larger gain replaces the incumbent.
  Split find_split(std::span<const std::size_t> rows, const Stats& total) {
    Split best;
    for (const std::size_t f : candidate_features()) {
      sorted_.clear();
      for (const auto r : rows) sorted_.emplace_back(x_(r, f), r);
      std::sort(sorted_.begin(), sorted_.end());
      Stats left;
      for (std::size_t i = 0; i + 1 < sorted_.size(); ++i) {
        criterion_.add(left, sorted_[i].second);
        if (sorted_[i].first == sorted_[i + 1].first) continue;
        const double gain =
            criterion_.gain(left, Criterion::minus(total, left));
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = midpoint(sorted_[i].first, sorted_[i + 1].first);
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  const Criterion& criterion_;
  const TreeConfig& config_;
  RandomStream& stream_;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<double, std::size_t>> sorted_;
};

void check_fit_inputs(const Matrix& x, std::size_t target_count,
                      std::span<const std::size_t> rows,
                      const TreeConfig& config) {
  if (x.rows() == 0 || rows.empty()) {
    throw ValidationError("cannot fit a tree on zero rows");
  }
  if (target_count != x.rows()) {
    throw ValidationError("target length " + std::to_string(target_count) +
                          " does not match " + std::to_string(x.rows()) +
                          " feature rows");
  }
  if (x.cols() == 0) throw ValidationError("cannot fit a tree on zero features");
  for (const auto r : rows) {
    if (r >= x.rows()) throw ValidationError("row index out of range");
  }
  if (config.min_samples_split < 2) {
    throw ValidationError("min_samples_split must be >= 2");
  }
  if (config.max_features &&
      (*config.max_features == 0 || *config.max_features > x.cols())) {
    throw ValidationError("max_features must lie in 1.." +
                          std::to_string(x.cols()));
  }
  if (!(config.min_gain >= 0.0)) {
    throw ValidationError("min_gain must be >= 0");
  }
}

std::size_t compute_depth(const std::vector<TreeNode>& nodes,
                          std::int32_t index) {
  const TreeNode& node = nodes[static_cast<std::size_t>(index)];
  if (node.is_leaf()) return 0;
  return 1 + std::max(compute_depth(nodes, node.left),
                      compute_depth(nodes, node.right));
}

Json node_to_json(const std::vector<TreeNode>& nodes, std::int32_t index) {
  const TreeNode& node = nodes[static_cast<std::size_t>(index)];
  Json out;
  if (node.is_leaf()) {
    out["value"] = node.value;
    out["count"] = node.count;
    return out;
  }
  out["feature"] = node.feature;
  out["threshold"] = node.threshold;
  out["value"] = node.value;
  out["count"] = node.count;
  out["left"] = node_to_json(nodes, node.left);
  out["right"] = node_to_json(nodes, node.right);
  return out;
}

std::int32_t node_from_json(const Json& doc, std::size_t feature_count,
                            std::vector<TreeNode>& nodes) {
  if (!doc.is_object()) throw IoError("tree node is not an object");
  const auto index = static_cast<std::int32_t>(nodes.size());
  nodes.emplace_back();
  TreeNode node;
  node.value = doc.at("value").get<double>();
  node.count = doc.at("count").get<std::size_t>();
  if (doc.contains("feature")) {
    const auto f = doc.at("feature").get<std::int64_t>();
    if (f < 0 || static_cast<std::size_t>(f) >= feature_count) {
      throw IoError("tree node feature index out of range");
    }
    node.feature = static_cast<std::int32_t>(f);
    node.threshold = doc.at("threshold").get<double>();
    node.left = node_from_json(doc.at("left"), feature_count, nodes);
    node.right = node_from_json(doc.at("right"), feature_count, nodes);
  }
  nodes[static_cast<std::size_t>(index)] = node;
  return index;
}

}  // namespace

Json tree_config_to_json(const TreeConfig& config) {
  Json out;
  out["max_depth"] =
      config.max_depth ? Json(*config.max_depth) : Json(nullptr);
  out["min_samples_split"] = config.min_samples_split;
  out["max_features"] =
      config.max_features ? Json(*config.max_features) : Json("all");
  out["min_gain"] = config.min_gain;
  return out;
}

TreeConfig tree_config_from_json(const Json& doc) {
  TreeConfig config;
  if (const auto it = doc.find("max_depth"); it != doc.end() && !it->is_null()) {
    config.max_depth = it->get<std::size_t>();
  }
  if (const auto it = doc.find("min_samples_split"); it != doc.end()) {
    config.min_samples_split = it->get<std::size_t>();
  }
  if (const auto it = doc.find("max_features");
      it != doc.end() && !it->is_string() && !it->is_null()) {
    config.max_features = it->get<std::size_t>();
  }
  if (const auto it = doc.find("min_gain"); it != doc.end()) {
    config.min_gain = it->get<double>();
  }
  return config;
}

RegressionTree::RegressionTree(std::vector<TreeNode> nodes,
                               std::size_t feature_count, TreeConfig config)
    : nodes_(std::move(nodes)),
      feature_count_(feature_count),
      config_(config) {
  if (nodes_.empty()) throw ValidationError("a tree needs at least one node");
  depth_ = compute_depth(nodes_, 0);
}

double RegressionTree::predict(std::span<const double> row) const {
  if (row.size() != feature_count_) {
    throw ValidationError("tree expects " + std::to_string(feature_count_) +
                          " features, got " + std::to_string(row.size()));
  }
  return predict_unchecked(row.data());
}

std::size_t RegressionTree::leaf_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(),
                    [](const TreeNode& n) { return n.is_leaf(); }));
}

Json RegressionTree::to_json() const { return node_to_json(nodes_, 0); }

RegressionTree RegressionTree::from_json(const Json& doc,
                                         std::size_t feature_count,
                                         TreeConfig config) {
  std::vector<TreeNode> nodes;
  try {
    node_from_json(doc, feature_count, nodes);
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed tree document: ") + e.what());
  }
  return RegressionTree(std::move(nodes), feature_count, config);
}

RegressionTree fit_tree(const Matrix& x, std::span<const double> targets,
                        const TreeConfig& config, RandomStream& stream) {
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_tree(x, targets, rows, config, stream);
}

RegressionTree fit_tree(const Matrix& x, std::span<const double> targets,
                        std::span<const std::size_t> rows,
                        const TreeConfig& config, RandomStream& stream) {
  check_fit_inputs(x, targets.size(), rows, config);
  std::vector<std::size_t> work(rows.begin(), rows.end());
  const SseCriterion criterion(targets);
  TreeBuilder<SseCriterion> builder(x, criterion, config, stream);
  return RegressionTree(builder.build(work), x.cols(), config);
}

RegressionTree fit_tree_newton(const Matrix& x,
                               std::span<const double> gradients,
                               std::span<const double> hessians,
                               std::span<const std::size_t> rows,
                               const TreeConfig& config,
                               const NewtonPenalty& penalty,
                               RandomStream& stream) {
  check_fit_inputs(x, gradients.size(), rows, config);
  if (hessians.size() != gradients.size()) {
    throw ValidationError("gradient/hessian length mismatch");
  }
  if (!(penalty.lambda >= 0.0) || !(penalty.gamma >= 0.0)) {
    throw ValidationError("lambda and gamma must be >= 0");
  }
  std::vector<std::size_t> work(rows.begin(), rows.end());
  const NewtonCriterion criterion(gradients, hessians, penalty);
  TreeBuilder<NewtonCriterion> builder(x, criterion, config, stream);
  return RegressionTree(builder.build(work), x.cols(), config);
}

}  // namespace premium
