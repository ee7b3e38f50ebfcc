#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "hpl/rng.hpp"

namespace hpl::snake {

// Trees are grown by the Williams decomposition: a spine of length H carries
// Poisson grafts on both sides. Subtrees of height below the local resolution
// are not grown; their mean duration is added to the spine node as dust.
struct SnakeSampleConfig {
  double eps_height = 0.01;        // condition sup zeta > eps_height
  double tree_resolution = 1e-3;   // smallest grown subtree height
  double label_step = 0.05;        // spine steps never exceed label_step^2
  double refine = 0.02;            // resolution = refine * (distance to a focus level)^2
  double step_factor = 0.5;        // spine step = step_factor * resolution
  double max_resolution = 0.05;    // largest ignored subtree height
  std::vector<double> focus;       // label levels where the tree is refined
  std::size_t max_nodes = 20'000'000;
};

void validate(const SnakeSampleConfig& cfg);

// Scale-free refinement for the counting estimators, which need no label grid.
SnakeSampleConfig counting_config();

struct TreeNode {
  std::int32_t parent;  // -1 for the root; parents precede children
  std::int8_t side;     // -1 left graft, 0 continuation, +1 right graft
  double height;        // lifetime of the node
  double label;
  double dust;          // duration of unresolved subtrees attached here
  double cut;           // height bound of the unresolved subtrees on the incoming edge
};

struct SnakeTree {
  double x0 = 0;
  std::vector<TreeNode> nodes;
  bool complete = true;  // false when a policy stopped the growth
  double duration() const;
};

class TreePolicy {
 public:
  virtual ~TreePolicy() = default;
  // Called after node i is appended. Returning false stops the growth.
  virtual bool on_node(const SnakeTree& /*t*/, std::size_t /*i*/) { return true; }
};

// N_x(W_* <= x - d, H < cut): rate at which subtrees lower than cut, grafted
// at label distance d above a level, reach that level.
double dust_hit_rate(double d, double cut);

// Height of an excursion conditioned on sup zeta > eps: P(H > h) = eps / h.
double sample_height(double eps, RngStream& rng);

// Tree with spine length `height` and root label x0.
SnakeTree grow_tree(double x0, double height, const SnakeSampleConfig& cfg, RngStream& rng,
                    TreePolicy* policy = nullptr);

// Contour coding of a tree: entry k visits a node; s_grid[k] is the duration
// accumulated up to and including that visit.
struct SnakeTrajectory {
  std::vector<double> s_grid;
  std::vector<double> zeta;
  std::vector<double> tip;
  double x0 = 0;
  double label_step = 0;
  double sigma() const { return s_grid.empty() ? 0 : s_grid.back(); }
};

void validate(const SnakeTrajectory& t);
SnakeTrajectory to_trajectory(const SnakeTree& tree, double label_step);
SnakeTrajectory sample_snake(double x0, const SnakeSampleConfig& cfg, RngStream& rng);

double w_star(const SnakeTrajectory& t);
SnakeTrajectory truncate(const SnakeTrajectory& t, double y);
// eps^-2 times the duration spent in (y, y + eps) by paths that have not hit y.
double exit_measure_estimate(const SnakeTrajectory& t, double y, double eps);
// Scaling of labels by c, lifetimes by c^2 and durations by c^4 around x0.
SnakeTrajectory rescale(const SnakeTrajectory& t, double c);

void write_csv(std::ostream& os, const SnakeTrajectory& t);

// Probability, given the node labels, that the tree reaches y. Labels between
// nodes are Brownian bridges.
class HittingPolicy : public TreePolicy {
 public:
  explicit HittingPolicy(double y) : y_(y) {}
  bool on_node(const SnakeTree& t, std::size_t i) override;
  double value() const { return hit_ ? 1.0 : 1.0 - survive_; }

 private:
  double y_;
  bool hit_ = false;
  double survive_ = 1;
};

// Stops the growth as soon as a node label is at or below 0.
class PositivePolicy : public TreePolicy {
 public:
  bool on_node(const SnakeTree& t, std::size_t i) override;
  bool killed() const { return killed_; }
  // Probability that no edge bridge goes below 0.
  double survival() const { return killed_ ? 0.0 : survive_; }

 private:
  bool killed_ = false;
  double survive_ = 1;
};

struct ExitCount {
  double z;       // unbiased estimate of the exit measure at r on {W_* > 0}
  double v_below; // duration of paths that hit r, on {W_* > 0}
  double mass;    // total duration on {W_* > 0}
  std::size_t nodes;
};

// Exit measure at r through the special Markov property: excursions below r
// reaching r - depth are counted and divided by 3/(2 depth^2) - 3/(2 r^2).
ExitCount exit_count_tree(double x0, double height, double r, double depth,
                          const SnakeSampleConfig& cfg, RngStream& rng);

// Per-tree estimate of P(W_* <= y) for a tree conditioned on sup zeta > eps_height.
double hitting_tree(double x0, double y, const SnakeSampleConfig& cfg, RngStream& rng);

// Duration of a tree with spine length height on {W_* > 0}.
double positive_mass_tree(double x0, double height, const SnakeSampleConfig& cfg, RngStream& rng);

}  // namespace hpl::snake
