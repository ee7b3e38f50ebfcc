#include "hpl/snake.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "hpl/error.hpp"

namespace hpl::snake {

namespace {

double bridge_cross(double a, double b, double y, double du) {
  if (a <= y || b <= y) return 1.0;
  if (!(du > 0)) return 0.0;
  return std::exp(-2.0 * (a - y) * (b - y) / du);
}

double edge_cross(const SnakeTree& t, std::size_t i, double y) {
  const TreeNode& n = t.nodes[i];
  const TreeNode& p = t.nodes[n.parent];
  return bridge_cross(p.label, n.label, y, n.height - p.height);
}

// u(s, x) = N_x(hit 0 or H > s) = phi(x / sqrt(s)) / s, where
// phi'' + xi phi' + 2 phi - 4 phi^2 = 0, phi ~ 3 / (2 xi^2) at 0, phi -> 1/2 at infinity.
// eta = phi - 1/2 is integrated inwards from the decaying tail
// amplitude * xi^-3 exp(-xi^2 / 2); the amplitude puts the blow-up at xi = 0.
struct Profile {
  static constexpr double lo = 0.2, hi = 8.0, step = 1e-3;
  static constexpr double amplitude = 7.96029006954686;
  std::vector<double> eta;

  Profile() {
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 2>;
    double g = std::exp(-0.5 * hi * hi) / (hi * hi * hi);
    State y{amplitude * g, amplitude * g * (-3.0 / hi - hi)};
    auto rhs = [](const State& y, State& dy, double x) {
      dy[0] = y[1];
      dy[1] = -x * y[1] + 2 * y[0] + 4 * y[0] * y[0];
    };
    const auto n = static_cast<std::size_t>(std::lround((hi - lo) / step));
    eta.assign(n + 1, 0.0);
    auto stepper = ode::make_dense_output(1e-30, 1e-13, ode::runge_kutta_dopri5<State>());
    std::size_t k = n;
    ode::integrate_n_steps(stepper, rhs, y, hi, -step, n, [&](const State& s, double) {
      eta[k--] = s[0];
    });
  }

  // phi(xi) - 1/2
  double operator()(double xi) const {
    if (xi >= hi) return 0.0;
    if (xi <= lo) return 1.5 / (xi * xi) - 0.5;
    double u = (xi - lo) / step;
    auto k = std::min(static_cast<std::size_t>(u), eta.size() - 2);
    double f = u - static_cast<double>(k);
    return eta[k] + f * (eta[k + 1] - eta[k]);
  }
};

const Profile& profile() {
  static const Profile p;
  return p;
}

// Mean number of unresolved subtrees on the edge into i that reach y.
double dust_hazard(const SnakeTree& t, std::size_t i, double y) {
  const TreeNode& n = t.nodes[i];
  const TreeNode& p = t.nodes[n.parent];
  if (!(n.cut > 0)) return 0.0;
  double du = n.height - p.height;
  return 2.0 * du * (dust_hit_rate(p.label - y, n.cut) + dust_hit_rate(n.label - y, n.cut));
}

class Grower {
 public:
  Grower(const SnakeSampleConfig& cfg, RngStream& rng, TreePolicy* pol, SnakeTree& t)
      : cfg_(cfg), rng_(rng), pol_(pol), t_(t), max_step_(cfg.label_step * cfg.label_step) {}

  bool stopped() const { return stop_; }

  std::int32_t add(std::int32_t parent, std::int8_t side, double h, double label, double dust,
                   double cut) {
    if (t_.nodes.size() >= cfg_.max_nodes) fail(ErrorKind::budget, "grow_tree: node budget exceeded");
    t_.nodes.push_back({parent, side, h, label, dust, cut});
    auto i = static_cast<std::int32_t>(t_.nodes.size() - 1);
    if (pol_ && !pol_->on_node(t_, i)) stop_ = true;
    return i;
  }

  void branch(std::int32_t start, std::int8_t side, double len) {
    const double h0 = t_.nodes[start].height;
    std::int32_t cur = start;
    double v = 0;
    std::vector<Graft> local;
    // The whole spine is grown before its grafts, so that a policy can stop
    // on the spine before large side trees are explored.
    std::vector<Pending> pending;
    while (len - v > 1e-12 * len && !stop_) {
      double a = t_.nodes[cur].label;
      double dl = resolution(a);
      double du = std::min({cfg_.step_factor * dl, max_step_, len - v});
      if (len - v - du < 1e-12 * len) du = len - v;
      double b = a + std::sqrt(du) * rng_.normal();

      double cap = std::max(0.0, std::min(dl, len - v - 0.5 * du));
      local.clear();
      std::uint64_t n = rng_.poisson(2.0 * du / dl);
      for (std::uint64_t k = 0; k < n; ++k) {
        double pos = du * rng_.uniform();
        double hg = dl / rng_.uniform();
        double side_u = rng_.uniform();
        if (hg < len - v - pos) local.push_back({pos, hg, side_u < 0.5 ? -1 : 1});
      }
      std::sort(local.begin(), local.end(),
                [](const Graft& x, const Graft& y) { return x.pos < y.pos; });
      double pa = 0, la = a;
      for (const Graft& g : local) {
        double w = du - pa;
        double mean = la + (b - la) * (g.pos - pa) / w;
        double sd = std::sqrt((g.pos - pa) * (du - g.pos) / w);
        double lab = mean + sd * rng_.normal();
        std::int32_t gi = add(cur, side, h0 + v + g.pos, lab, 0, cap);
        side = 0;
        if (stop_) return;
        pending.push_back({gi, static_cast<std::int8_t>(g.side), g.height});
        cur = gi;
        pa = g.pos;
        la = lab;
      }
      double dust = (4.0 / 3.0) * du * cap;
      cur = add(cur, side, h0 + v + du, b, dust, cap);
      side = 0;
      v += du;
    }
    for (const Pending& p : pending) {
      if (stop_) return;
      branch(p.node, p.side, p.height);
    }
  }

 private:
  struct Graft {
    double pos, height;
    int side;
  };
  struct Pending {
    std::int32_t node;
    std::int8_t side;
    double height;
  };

  double resolution(double label) const {
    double d = std::numeric_limits<double>::infinity();
    for (double f : cfg_.focus) d = std::min(d, std::abs(label - f));
    double r = cfg_.refine * d * d;
    return std::clamp(r, cfg_.tree_resolution, cfg_.max_resolution);
  }

  const SnakeSampleConfig& cfg_;
  RngStream& rng_;
  TreePolicy* pol_;
  SnakeTree& t_;
  double max_step_;
  bool stop_ = false;
};

struct Frame {
  double height;
  bool blocked;  // an earlier node of the lineage reached y
  bool hit;      // the lineage up to this node reached y
};

// Walks the contour, tracking for each entry whether its lineage reached y.
template <class F>
void walk_lineages(const SnakeTrajectory& t, double y, F&& visit) {
  std::vector<Frame> stack;
  for (std::size_t k = 0; k < t.zeta.size(); ++k) {
    double h = t.zeta[k];
    while (!stack.empty() && stack.back().height > h) stack.pop_back();
    if (stack.empty() || stack.back().height < h) {
      bool parent_hit = !stack.empty() && stack.back().hit;
      stack.push_back({h, parent_hit, parent_hit || t.tip[k] <= y});
    }
    double ds = t.s_grid[k] - (k ? t.s_grid[k - 1] : 0.0);
    visit(k, ds, stack.back());
  }
}

}  // namespace

void validate(const SnakeSampleConfig& cfg) {
  require(cfg.eps_height > 0, ErrorKind::config, "snake: eps_height must be > 0");
  require(cfg.tree_resolution > 0, ErrorKind::config, "snake: tree_resolution must be > 0");
  require(cfg.label_step > 0, ErrorKind::config, "snake: label_step must be > 0");
  require(cfg.refine > 0, ErrorKind::config, "snake: refine must be > 0");
  require(cfg.step_factor > 0 && cfg.step_factor <= 1, ErrorKind::config,
          "snake: step_factor must be in (0, 1]");
  require(cfg.max_resolution >= cfg.tree_resolution, ErrorKind::config,
          "snake: max_resolution must be >= tree_resolution");
}

SnakeSampleConfig counting_config() {
  SnakeSampleConfig c;
  c.label_step = 1e3;
  c.max_resolution = 1e6;
  return c;
}

double SnakeTree::duration() const {
  double s = 0;
  for (const TreeNode& n : nodes) s += n.dust;
  return s;
}

double dust_hit_rate(double d, double cut) {
  require(cut > 0, ErrorKind::domain, "dust_hit_rate: cut must be > 0");
  if (d <= 0) return std::numeric_limits<double>::infinity();
  return profile()(d / std::sqrt(cut)) / cut;
}

double sample_height(double eps, RngStream& rng) {
  require(eps > 0, ErrorKind::domain, "sample_height: eps must be > 0");
  return eps / rng.uniform();
}

SnakeTree grow_tree(double x0, double height, const SnakeSampleConfig& cfg, RngStream& rng,
                    TreePolicy* policy) {
  validate(cfg);
  require(height >= 0, ErrorKind::domain, "grow_tree: height must be >= 0");
  SnakeTree t;
  t.x0 = x0;
  Grower g(cfg, rng, policy, t);
  g.add(-1, 0, 0.0, x0, 0.0, 0.0);
  if (!g.stopped() && height > 0) g.branch(0, 0, height);
  t.complete = !g.stopped();
  return t;
}

void validate(const SnakeTrajectory& t) {
  require(t.s_grid.size() == t.zeta.size() && t.zeta.size() == t.tip.size() && !t.zeta.empty(),
          ErrorKind::length_mismatch, "SnakeTrajectory: column lengths differ");
  require(t.zeta.front() == 0 && t.zeta.back() == 0, ErrorKind::domain,
          "SnakeTrajectory: lifetime must vanish at both ends");
  require(t.tip.front() == t.x0, ErrorKind::domain, "SnakeTrajectory: tip_0 must equal x0");
  for (std::size_t k = 0; k < t.zeta.size(); ++k) {
    require(t.zeta[k] >= 0, ErrorKind::domain, "SnakeTrajectory: negative lifetime");
    require(k == 0 || t.s_grid[k] >= t.s_grid[k - 1], ErrorKind::domain,
            "SnakeTrajectory: s_grid decreasing");
  }
}

SnakeTrajectory to_trajectory(const SnakeTree& tree, double label_step) {
  SnakeTrajectory out;
  out.x0 = tree.x0;
  out.label_step = label_step;
  const std::size_t n = tree.nodes.size();
  if (n == 0) {
    out.s_grid = {0};
    out.zeta = {0};
    out.tip = {tree.x0};
    return out;
  }
  // Children in contour order: left grafts, continuation, right grafts.
  std::vector<std::int32_t> first(n + 1, 0), kids;
  for (std::size_t i = 1; i < n; ++i) ++first[tree.nodes[i].parent + 1];
  for (std::size_t i = 0; i < n; ++i) first[i + 1] += first[i];
  kids.resize(n > 0 ? n - 1 : 0);
  std::vector<std::int32_t> fill(first.begin(), first.end() - 1);
  for (int pass = -1; pass <= 1; ++pass)
    for (std::size_t i = 1; i < n; ++i)
      if (tree.nodes[i].side == pass) kids[fill[tree.nodes[i].parent]++] = static_cast<std::int32_t>(i);

  double s = 0;
  auto emit = [&](std::int32_t v, double ds) {
    s += ds;
    out.s_grid.push_back(s);
    out.zeta.push_back(tree.nodes[v].height);
    out.tip.push_back(tree.nodes[v].label);
  };
  std::vector<std::pair<std::int32_t, std::int32_t>> stack;  // node, next child slot
  stack.push_back({0, first[0]});
  emit(0, tree.nodes[0].dust);
  while (!stack.empty()) {
    auto& [v, slot] = stack.back();
    if (slot < first[v + 1]) {
      std::int32_t c = kids[slot++];
      stack.push_back({c, first[c]});
      emit(c, tree.nodes[c].dust);
    } else {
      stack.pop_back();
      if (!stack.empty()) emit(stack.back().first, 0.0);
    }
  }
  return out;
}

SnakeTrajectory sample_snake(double x0, const SnakeSampleConfig& cfg, RngStream& rng) {
  double h = sample_height(cfg.eps_height, rng);
  return to_trajectory(grow_tree(x0, h, cfg, rng), cfg.label_step);
}

double w_star(const SnakeTrajectory& t) {
  double m = t.x0;
  for (double w : t.tip) m = std::min(m, w);
  return m;
}

SnakeTrajectory truncate(const SnakeTrajectory& t, double y) {
  require(y < t.x0, ErrorKind::domain, "truncate: y must be below x0");
  SnakeTrajectory out;
  out.x0 = t.x0;
  out.label_step = t.label_step;
  double s = 0;
  walk_lineages(t, y, [&](std::size_t k, double ds, const Frame& f) {
    if (f.blocked) return;
    s += ds;
    if (!out.zeta.empty() && out.zeta.back() == t.zeta[k]) {
      out.s_grid.back() = s;
      return;
    }
    out.s_grid.push_back(s);
    out.zeta.push_back(t.zeta[k]);
    out.tip.push_back(t.tip[k]);
  });
  return out;
}

double exit_measure_estimate(const SnakeTrajectory& t, double y, double eps) {
  require(y < t.x0, ErrorKind::domain, "exit_measure_estimate: y must be below x0");
  require(eps > 0, ErrorKind::domain, "exit_measure_estimate: eps must be > 0");
  if (eps < 3 * t.label_step)
    fail(ErrorKind::resolution, "exit_measure_estimate: eps below three label steps");
  double acc = 0;
  walk_lineages(t, y, [&](std::size_t k, double ds, const Frame& f) {
    if (!f.hit && t.tip[k] < y + eps) acc += ds;
  });
  return acc / (eps * eps);
}

SnakeTrajectory rescale(const SnakeTrajectory& t, double c) {
  require(c > 0, ErrorKind::domain, "rescale: c must be > 0");
  SnakeTrajectory out = t;
  for (auto& s : out.s_grid) s *= c * c * c * c;
  for (auto& z : out.zeta) z *= c * c;
  for (auto& w : out.tip) w = t.x0 + c * (w - t.x0);
  out.label_step *= c;
  return out;
}

void write_csv(std::ostream& os, const SnakeTrajectory& t) {
  os << "# schema=1\ns,zeta,tip\n";
  for (std::size_t k = 0; k < t.zeta.size(); ++k)
    os << t.s_grid[k] << ',' << t.zeta[k] << ',' << t.tip[k] << '\n';
}

bool HittingPolicy::on_node(const SnakeTree& t, std::size_t i) {
  const TreeNode& n = t.nodes[i];
  if (n.label <= y_) {
    hit_ = true;
    return false;
  }
  if (n.parent >= 0) survive_ *= (1.0 - edge_cross(t, i, y_)) * std::exp(-dust_hazard(t, i, y_));
  return true;
}

bool PositivePolicy::on_node(const SnakeTree& t, std::size_t i) {
  const TreeNode& n = t.nodes[i];
  if (n.label <= 0) {
    killed_ = true;
    return false;
  }
  if (n.parent >= 0) survive_ *= (1.0 - edge_cross(t, i, 0.0)) * std::exp(-dust_hazard(t, i, 0.0));
  return true;
}

double hitting_tree(double x0, double y, const SnakeSampleConfig& cfg, RngStream& rng) {
  require(y < x0, ErrorKind::domain, "hitting_tree: y must be below x0");
  SnakeSampleConfig c = cfg;
  c.focus = {y};
  HittingPolicy pol(y);
  grow_tree(x0, sample_height(cfg.eps_height, rng), c, rng, &pol);
  return pol.value();
}

double positive_mass_tree(double x0, double height, const SnakeSampleConfig& cfg, RngStream& rng) {
  SnakeSampleConfig c = cfg;
  c.focus = {0.0};
  PositivePolicy pol;
  SnakeTree t = grow_tree(x0, height, c, rng, &pol);
  if (pol.killed()) return 0;
  return pol.survival() * t.duration();
}

ExitCount exit_count_tree(double x0, double height, double r, double depth,
                          const SnakeSampleConfig& cfg, RngStream& rng) {
  require(r > 0 && x0 > r, ErrorKind::domain, "exit_count_tree: need x0 > r > 0");
  require(depth > 0 && depth < r, ErrorKind::domain, "exit_count_tree: depth must be in (0, r)");
  SnakeSampleConfig c = cfg;
  c.focus = {r - depth, 0.0};
  PositivePolicy pol;
  SnakeTree t = grow_tree(x0, height, c, rng, &pol);
  ExitCount out{0, 0, 0, t.nodes.size()};
  if (pol.killed()) return out;
  const std::size_t n = t.nodes.size();
  const double low = r - depth;
  // not_crossed[v]: probability that the lineage of v has not reached r.
  std::vector<double> not_crossed(n), reach(n, 0.0);
  not_crossed[0] = 1;
  for (std::size_t i = 1; i < n; ++i)
    not_crossed[i] = not_crossed[t.nodes[i].parent] * (1.0 - edge_cross(t, i, r));
  // reach[v]: probability that some edge below v reaches r - depth.
  for (std::size_t i = n; i-- > 1;) {
    std::size_t p = t.nodes[i].parent;
    double q = edge_cross(t, i, low);
    double hit = 1 - (1 - q) * (1 - reach[i]) * std::exp(-dust_hazard(t, i, low));
    reach[p] = 1 - (1 - reach[p]) * (1 - hit);
  }
  double count = 0, below = 0, mass = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const TreeNode& v = t.nodes[i];
    mass += v.dust;
    below += v.dust * (1 - not_crossed[i]);
    if (i == 0) continue;
    double first = not_crossed[v.parent] * edge_cross(t, i, r);
    count += first * (v.label <= low ? 1.0 : reach[i]);
  }
  double w = pol.survival();
  double rate = 1.5 / (depth * depth) - 1.5 / (r * r);
  out.z = w * count / rate;
  out.v_below = w * below;
  out.mass = w * mass;
  return out;
}

}  // namespace hpl::snake
