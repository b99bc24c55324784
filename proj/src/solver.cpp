#include "prim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>

namespace prim {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimeLimit: return "time_limit";
  }
  return "unknown";
}

int MilpProblem::add_variable(std::string name, VarKind kind, double lower, double upper, double cost) {
  variables.push_back({std::move(name), kind, lower, upper});
  const int idx = static_cast<int>(variables.size()) - 1;
  if (cost != 0.0) objective.push_back({idx, cost});
  return idx;
}

void MilpProblem::add_constraint(std::vector<Term> terms, Sense sense, double rhs, std::string name) {
  constraints.push_back({std::move(terms), sense, rhs, std::move(name)});
}

void MilpProblem::audit() const {
  const int n = static_cast<int>(variables.size());
  auto check_term = [&](const Term& t, const std::string& where) {
    if (t.var < 0 || t.var >= n) throw Error(ErrorCode::InvalidArgument, where + " references undeclared variable");
    if (!std::isfinite(t.coef)) throw Error(ErrorCode::InvalidArgument, where + " has a non-finite coefficient");
  };
  for (const auto& v : variables) {
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper) || v.lower > v.upper)
      throw Error(ErrorCode::InvalidArgument, "variable " + v.name + " has invalid bounds");
    if (v.kind == VarKind::Binary && (v.lower != 0.0 || v.upper != 1.0))
      throw Error(ErrorCode::InvalidArgument, "binary " + v.name + " must have bounds [0,1]");
  }
  for (const auto& t : objective) check_term(t, "objective");
  for (std::size_t c = 0; c < constraints.size(); ++c) {
    for (const auto& t : constraints[c].terms) check_term(t, "constraint " + std::to_string(c));
    if (!std::isfinite(constraints[c].rhs)) throw Error(ErrorCode::InvalidArgument, "non-finite rhs");
  }
  for (int v : selection_vars) {
    if (v < 0 || v >= n) throw Error(ErrorCode::InvalidArgument, "selection references undeclared variable");
  }
}

int MilpProblem::binary_count() const {
  return static_cast<int>(std::count_if(variables.begin(), variables.end(),
                                        [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

std::vector<double> MilpProblem::objective_vector() const {
  std::vector<double> c(variables.size(), 0.0);
  for (const auto& t : objective) c[t.var] += t.coef;
  return c;
}

double MilpProblem::evaluate(const std::vector<double>& x) const {
  double value = objective_constant;
  for (const auto& t : objective) value += t.coef * x[t.var];
  return value;
}

bool MilpProblem::feasible(const std::vector<double>& x, double tol) const {
  for (std::size_t j = 0; j < variables.size(); ++j) {
    if (x[j] < variables[j].lower - tol || x[j] > variables[j].upper + tol) return false;
  }
  for (const auto& c : constraints) {
    double lhs = 0;
    for (const auto& t : c.terms) lhs += t.coef * x[t.var];
    if (c.sense != Sense::GreaterEqual && lhs > c.rhs + tol) return false;
    if (c.sense != Sense::LessEqual && lhs < c.rhs - tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// CRF model

MilpProblem build_milp(const ShapeContext& ctx, const CrfWeights& weights, const MilpOptions& options) {
  if (ctx.proposals.empty()) throw Error(ErrorCode::EmptyContext, "shape has no proposals");
  ctx.validate();
  weights.validate(true);
  const int n = static_cast<int>(ctx.proposals.size());

  MilpProblem p;
  for (int i = 0; i < n; ++i) {
    const double cost = fuse_unary(ctx.unary[i], weights) + weights.mu_par;
    p.selection_vars.push_back(p.add_variable("v_" + std::to_string(i), VarKind::Binary, 0, 1, cost));
  }
  const auto& v = p.selection_vars;

  for (const auto& pair : ctx.overlap) {
    if (!(pair.cost > 0)) continue;
    const std::string tag = std::to_string(pair.i) + "_" + std::to_string(pair.j);
    const int y = p.add_variable("y_" + tag, VarKind::Continuous, 0, 1, weights.mu_pw * pair.cost);
    p.add_constraint({{y, 1}, {v[pair.i], -1}}, Sense::LessEqual, 0, "pw_a_" + tag);
    p.add_constraint({{y, 1}, {v[pair.j], -1}}, Sense::LessEqual, 0, "pw_b_" + tag);
    p.add_constraint({{y, 1}, {v[pair.i], -1}, {v[pair.j], -1}}, Sense::GreaterEqual, -1, "pw_c_" + tag);
  }

  std::vector<std::vector<int>> incidence = ctx.region_boxes;
  if (incidence.empty()) {
    incidence.resize(ctx.regions.size());
    for (std::size_t k = 0; k < ctx.regions.size(); ++k) {
      for (int i = 0; i < n; ++i) {
        if (region_inside_fraction(ctx.proposals[i], ctx.regions[k], ctx.clouds, options.incidence_margin) >=
            options.incidence_fraction)
          incidence[k].push_back(i);
      }
    }
  }
  for (std::size_t k = 0; k < ctx.regions.size(); ++k) {
    const std::string tag = std::to_string(k);
    const int s = p.add_variable("s_" + tag, VarKind::Continuous, 0, 1, weights.mu_cov * ctx.coverage_costs[k]);
    std::vector<Term> terms{{s, 1}};
    for (int i : incidence[k]) terms.push_back({v[i], -1});
    p.add_constraint(std::move(terms), Sense::LessEqual, 0, "cov_" + tag);
  }

  if (!ctx.cooc.empty()) {
    for (int i = 0; i < n; ++i) {
      const auto& t = ctx.cooc[i];
      if (t.empty()) continue;
      for (const auto& e : t) {
        const std::string tag = std::to_string(i) + "_" + std::to_string(e.neighbor) + "_" + std::to_string(e.primitive);
        const int u = p.add_variable("u_" + tag, VarKind::Continuous, 0, 1, weights.mu_coc * e.iou);
        // Product linearisation with the neighbour's selection fixed at 1.
        p.add_constraint({{u, 1}, {v[i], -1}}, Sense::LessEqual, 0, "coc_a_" + tag);
        p.add_constraint({{u, 1}, {v[i], -1}}, Sense::GreaterEqual, 0, "coc_c_" + tag);
      }
      p.add_constraint({{v[i], 1}}, Sense::LessEqual, static_cast<double>(t.size()), "gate_" + std::to_string(i));
    }
  }
  p.audit();
  return p;
}

std::vector<int> selected_proposals(const MilpProblem& problem, const Solution& solution) {
  std::vector<int> out;
  for (std::size_t i = 0; i < problem.selection_vars.size(); ++i) {
    if (solution.assignment.at(problem.selection_vars[i]) > 0.5) out.push_back(static_cast<int>(i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bounded-variable primal simplex on a dense tableau.

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kCostTol = 1e-7;
constexpr double kPivotTol = 1e-11;
constexpr double kInf = std::numeric_limits<double>::infinity();

class Simplex {
 public:
  Simplex(const MilpProblem& problem, const std::vector<double>& lower, const std::vector<double>& upper)
      : n_(static_cast<int>(problem.variables.size())), m_(static_cast<int>(problem.constraints.size())) {
    // Columns: structurals, one slack per row (a.x - s = 0), then artificials.
    std::vector<double> values(n_);
    for (int j = 0; j < n_; ++j) values[j] = lower[j];
    std::vector<double> row_value(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      for (const auto& t : problem.constraints[i].terms) row_value[i] += t.coef * values[t.var];
    }
    std::vector<int> infeasible_rows;
    std::vector<double> slack_lo(m_), slack_hi(m_);
    for (int i = 0; i < m_; ++i) {
      const auto& c = problem.constraints[i];
      slack_lo[i] = c.sense == Sense::LessEqual ? -kInf : c.rhs;
      slack_hi[i] = c.sense == Sense::GreaterEqual ? kInf : c.rhs;
      if (row_value[i] < slack_lo[i] - kFeasTol || row_value[i] > slack_hi[i] + kFeasTol) infeasible_rows.push_back(i);
    }
    artificial_begin_ = n_ + m_;
    cols_ = n_ + m_ + static_cast<int>(infeasible_rows.size());
    tableau_.assign(static_cast<std::size_t>(m_) * cols_, 0.0);
    lo_.assign(cols_, 0.0);
    hi_.assign(cols_, 0.0);
    x_.assign(cols_, 0.0);
    basis_.assign(m_, -1);
    at_upper_.assign(cols_, 0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lower[j];
      hi_[j] = upper[j];
      x_[j] = lower[j];
    }
    for (int i = 0; i < m_; ++i) {
      for (const auto& t : problem.constraints[i].terms) at(i, t.var) += t.coef;
      at(i, n_ + i) = -1.0;
      lo_[n_ + i] = slack_lo[i];
      hi_[n_ + i] = slack_hi[i];
    }
    int a = artificial_begin_;
    std::vector<char> has_artificial(m_, 0);
    for (int i : infeasible_rows) {
      // Slack rests at the violated bound; the artificial absorbs the gap.
      const int s = n_ + i;
      const bool below = row_value[i] < slack_lo[i];
      x_[s] = below ? slack_lo[i] : slack_hi[i];
      at_upper_[s] = below ? 0 : 1;
      const double gap = x_[s] - row_value[i];
      const double sigma = gap > 0 ? 1.0 : -1.0;
      at(i, a) = sigma;
      lo_[a] = 0.0;
      hi_[a] = kInf;
      basis_[i] = a;
      x_[a] = std::abs(gap);
      has_artificial[i] = 1;
      ++a;
    }
    for (int i = 0; i < m_; ++i) {
      if (!has_artificial[i]) {
        basis_[i] = n_ + i;
        x_[n_ + i] = row_value[i];
      }
      // Normalise so the basic column is a unit vector.
      const double pivot = at(i, basis_[i]);
      double* row = &tableau_[static_cast<std::size_t>(i) * cols_];
      for (int j = 0; j < cols_; ++j) row[j] /= pivot;
    }
  }

  // Returns false when infeasible.
  bool solve(const std::vector<double>& cost) {
    if (artificial_begin_ < cols_) {
      std::vector<double> phase1(cols_, 0.0);
      double initial = 0;
      for (int a = artificial_begin_; a < cols_; ++a) {
        phase1[a] = 1.0;
        initial += x_[a];
      }
      run(phase1);
      double residual = 0;
      for (int a = artificial_begin_; a < cols_; ++a) residual += x_[a];
      if (residual > kFeasTol * std::max(1.0, initial)) return false;
      for (int a = artificial_begin_; a < cols_; ++a) {
        hi_[a] = 0.0;
        x_[a] = 0.0;
        at_upper_[a] = 0;
      }
    }
    std::vector<double> full(cols_, 0.0);
    std::copy(cost.begin(), cost.end(), full.begin());
    run(full);
    return true;
  }

  std::vector<double> structural() const {
    std::vector<double> out(x_.begin(), x_.begin() + n_);
    for (int j = 0; j < n_; ++j) out[j] = std::clamp(out[j], lo_[j], hi_[j]);
    return out;
  }

 private:
  double& at(int i, int j) { return tableau_[static_cast<std::size_t>(i) * cols_ + j]; }
  double at(int i, int j) const { return tableau_[static_cast<std::size_t>(i) * cols_ + j]; }

  void run(const std::vector<double>& cost) {
    std::vector<int> row_of(cols_, -1);
    for (int i = 0; i < m_; ++i) row_of[basis_[i]] = i;
    std::vector<double> d(cost);
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j < cols_; ++j) d[j] -= cb * at(i, j);
    }

    int degenerate_streak = 0;
    bool bland = false;
    const long max_iterations = 50L * (m_ + cols_) + 1000;
    for (long iter = 0; iter < max_iterations; ++iter) {
      int q = -1;
      double best = 0;
      for (int j = 0; j < cols_; ++j) {
        if (row_of[j] >= 0 || hi_[j] <= lo_[j]) continue;
        double gain = 0;
        if (!at_upper_[j] && d[j] < -kCostTol) gain = -d[j];
        else if (at_upper_[j] && d[j] > kCostTol) gain = d[j];
        else continue;
        if (bland) {
          q = j;
          break;
        }
        if (gain > best) best = gain, q = j;
      }
      if (q < 0) return;
      const double dir = at_upper_[q] ? -1.0 : 1.0;

      double step = hi_[q] - lo_[q];
      int leave_row = -1;
      bool leave_to_upper = false;
      double leave_pivot = 0;
      for (int i = 0; i < m_; ++i) {
        const double tq = at(i, q);
        if (std::abs(tq) <= kPivotTol) continue;
        const int b = basis_[i];
        const double rate = -tq * dir;  // change of x_b per unit step
        double limit;
        bool to_upper;
        if (rate < 0) {
          if (lo_[b] == -kInf) continue;
          limit = (x_[b] - lo_[b]) / -rate;
          to_upper = false;
        } else {
          if (hi_[b] == kInf) continue;
          limit = (hi_[b] - x_[b]) / rate;
          to_upper = true;
        }
        limit = std::max(limit, 0.0);
        bool take = false;
        if (limit < step - 1e-12) take = true;
        else if (limit <= step + 1e-12 && leave_row >= 0) {
          take = bland ? b < basis_[leave_row] : std::abs(tq) > std::abs(leave_pivot);
        }
        if (take) {
          step = limit;
          leave_row = i;
          leave_to_upper = to_upper;
          leave_pivot = tq;
        }
      }
      if (step == kInf) throw Error(ErrorCode::NumericalFailure, "LP relaxation is unbounded");

      if (step <= 1e-12) {
        if (++degenerate_streak > 50) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }

      const double delta = dir * step;
      for (int i = 0; i < m_; ++i) {
        const double tq = at(i, q);
        if (tq != 0.0) x_[basis_[i]] -= tq * delta;
      }
      x_[q] += delta;

      if (leave_row < 0) {
        // Bound flip.
        at_upper_[q] = at_upper_[q] ? 0 : 1;
        x_[q] = at_upper_[q] ? hi_[q] : lo_[q];
        continue;
      }
      const int leaving = basis_[leave_row];
      x_[leaving] = leave_to_upper ? hi_[leaving] : lo_[leaving];
      at_upper_[leaving] = leave_to_upper ? 1 : 0;
      pivot(leave_row, q, d);
      row_of[leaving] = -1;
      row_of[q] = leave_row;
      basis_[leave_row] = q;
      at_upper_[q] = 0;
      for (int i = 0; i < m_; ++i) {
        const int b = basis_[i];
        if (x_[b] < lo_[b] && x_[b] > lo_[b] - kFeasTol) x_[b] = lo_[b];
        if (x_[b] > hi_[b] && x_[b] < hi_[b] + kFeasTol) x_[b] = hi_[b];
      }
    }
    throw Error(ErrorCode::NumericalFailure, "simplex iteration limit reached");
  }

  void pivot(int r, int q, std::vector<double>& d) {
    double* prow = &tableau_[static_cast<std::size_t>(r) * cols_];
    const double inv = 1.0 / prow[q];
    for (int j = 0; j < cols_; ++j) prow[j] *= inv;
    prow[q] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &tableau_[static_cast<std::size_t>(i) * cols_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (int j = 0; j < cols_; ++j) {
        if (prow[j] != 0.0) row[j] -= f * prow[j];
      }
      row[q] = 0.0;
    }
    const double f = d[q];
    if (f != 0.0) {
      for (int j = 0; j < cols_; ++j) {
        if (prow[j] != 0.0) d[j] -= f * prow[j];
      }
      d[q] = 0.0;
    }
  }

  int n_, m_;
  int cols_ = 0;
  int artificial_begin_ = 0;
  std::vector<double> tableau_;
  std::vector<double> lo_, hi_, x_;
  std::vector<int> basis_;
  std::vector<char> at_upper_;
};

}  // namespace

Solution solve_lp(const MilpProblem& problem, const BoundOverride& bounds) {
  const std::size_t n = problem.variables.size();
  std::vector<double> lower(n), upper(n);
  for (std::size_t j = 0; j < n; ++j) {
    lower[j] = bounds.lower.empty() ? problem.variables[j].lower : bounds.lower[j];
    upper[j] = bounds.upper.empty() ? problem.variables[j].upper : bounds.upper[j];
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]))
      throw Error(ErrorCode::InvalidArgument, "LP variables must be bounded");
    if (lower[j] > upper[j] + kFeasTol) throw Error(ErrorCode::Infeasible, "empty bounds on " + problem.variables[j].name);
    upper[j] = std::max(upper[j], lower[j]);
  }
  Simplex simplex(problem, lower, upper);
  if (!simplex.solve(problem.objective_vector())) throw Error(ErrorCode::Infeasible, "LP relaxation is infeasible");
  Solution s;
  s.assignment = simplex.structural();
  s.objective_value = problem.evaluate(s.assignment);
  s.status = SolveStatus::Optimal;
  return s;
}

// ---------------------------------------------------------------------------
// Branch and bound

namespace {

struct Node {
  double bound;
  long seq;
  long parent;
  int depth;
  std::vector<double> lower, upper;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

constexpr double kIntTol = 1e-6;

}  // namespace

Solution solve_branch_and_bound(const MilpProblem& problem, const BranchAndBoundOptions& options) {
  problem.audit();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = problem.variables.size();
  std::vector<int> binaries;
  for (std::size_t j = 0; j < n; ++j) {
    if (problem.variables[j].kind == VarKind::Binary) binaries.push_back(static_cast<int>(j));
  }

  Solution best;
  best.objective_value = kInf;
  bool have_incumbent = false;
  long nodes = 0;

  auto consider = [&](const std::vector<double>& x) {
    std::vector<double> y = x;
    for (int b : binaries) y[b] = std::round(y[b]);
    const double value = problem.evaluate(y);
    if (value < best.objective_value - 1e-12) {
      best.assignment = std::move(y);
      best.objective_value = value;
      have_incumbent = true;
    }
  };

  auto round_and_complete = [&](const std::vector<double>& x, const Node& node) {
    BoundOverride fixed{node.lower, node.upper};
    for (int b : binaries) fixed.lower[b] = fixed.upper[b] = x[b] >= 0.5 ? 1.0 : 0.0;
    for (int b : binaries) {
      if (fixed.lower[b] < node.lower[b] || fixed.upper[b] > node.upper[b]) return;
    }
    try {
      consider(solve_lp(problem, fixed).assignment);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible) throw;
    }
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  Node root{-kInf, 0, -1, 0, std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    root.lower[j] = problem.variables[j].lower;
    root.upper[j] = problem.variables[j].upper;
  }
  open.push(std::move(root));
  long seq = 1;
  bool timed_out = false;

  while (!open.empty()) {
    if (std::chrono::steady_clock::now() - start > options.time_limit) {
      timed_out = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (have_incumbent && node.bound >= best.objective_value - 1e-9) continue;

    Solution lp;
    try {
      lp = solve_lp(problem, {node.lower, node.upper});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible) throw;
      ++nodes;
      continue;
    }
    const long id = nodes++;
    if (options.observer) options.observer({id, node.parent, node.depth, node.bound, lp.objective_value});
    if (have_incumbent && lp.objective_value >= best.objective_value - 1e-9) continue;

    int branch = -1;
    double closest = kInf;
    for (int b : binaries) {
      const double v = lp.assignment[b];
      if (std::abs(v - std::round(v)) <= kIntTol) continue;
      const double dist = std::abs(v - 0.5);
      if (dist < closest) closest = dist, branch = b;
    }
    if (branch < 0) {
      consider(lp.assignment);
      continue;
    }
    if (id == 0 || (options.heuristic_interval > 0 && id % options.heuristic_interval == 0))
      round_and_complete(lp.assignment, node);

    const bool up_first = lp.assignment[branch] >= 0.5;
    for (int pass = 0; pass < 2; ++pass) {
      const bool up = (pass == 0) == up_first;
      Node child{lp.objective_value, seq++, id, node.depth + 1, node.lower, node.upper};
      child.lower[branch] = child.upper[branch] = up ? 1.0 : 0.0;
      open.push(std::move(child));
    }
  }

  if (!have_incumbent) {
    if (timed_out) {
      Solution s;
      s.status = SolveStatus::TimeLimit;
      s.node_count = nodes;
      s.objective_value = kInf;
      return s;
    }
    throw Error(ErrorCode::Infeasible, "no integral solution exists");
  }
  best.status = timed_out ? SolveStatus::TimeLimit : SolveStatus::Optimal;
  best.node_count = nodes;
  return best;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

Solution solve_exhaustive(const MilpProblem& problem) {
  problem.audit();
  const std::size_t n = problem.variables.size();
  std::vector<int> binaries, continuous;
  for (std::size_t j = 0; j < n; ++j) {
    (problem.variables[j].kind == VarKind::Binary ? binaries : continuous).push_back(static_cast<int>(j));
  }
  if (binaries.size() > 20) throw Error(ErrorCode::TooLarge, std::to_string(binaries.size()) + " binaries (max 20)");
  const std::vector<double> cost = problem.objective_vector();

  // The single continuous variable (and its coefficient) of each constraint.
  std::vector<int> cont_var(problem.constraints.size(), -1);
  std::vector<double> cont_coef(problem.constraints.size(), 0.0);
  for (std::size_t c = 0; c < problem.constraints.size(); ++c) {
    for (const auto& t : problem.constraints[c].terms) {
      if (problem.variables[t.var].kind != VarKind::Continuous || t.coef == 0.0) continue;
      if (cont_var[c] >= 0 && cont_var[c] != t.var)
        throw Error(ErrorCode::InvalidArgument, "exhaustive oracle needs at most one continuous variable per constraint");
      cont_var[c] = t.var;
      cont_coef[c] += t.coef;
    }
  }

  Solution best;
  best.objective_value = kInf;
  bool found = false;
  std::vector<double> x(n, 0.0), lo(n), hi(n);
  const std::uint64_t count = std::uint64_t{1} << binaries.size();
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    for (std::size_t b = 0; b < binaries.size(); ++b) x[binaries[b]] = (mask >> b) & 1 ? 1.0 : 0.0;
    for (int c : continuous) {
      lo[c] = problem.variables[c].lower;
      hi[c] = problem.variables[c].upper;
    }
    bool ok = true;
    for (std::size_t c = 0; c < problem.constraints.size() && ok; ++c) {
      const auto& con = problem.constraints[c];
      double rest = 0;
      for (const auto& t : con.terms) {
        if (problem.variables[t.var].kind == VarKind::Binary) rest += t.coef * x[t.var];
      }
      const int v = cont_var[c];
      if (v < 0) {
        if (con.sense != Sense::GreaterEqual && rest > con.rhs + kFeasTol) ok = false;
        if (con.sense != Sense::LessEqual && rest < con.rhs - kFeasTol) ok = false;
        continue;
      }
      // a * x_v + rest (sense) rhs
      const double a = cont_coef[c];
      const double bound = (con.rhs - rest) / a;
      const bool upper_side = (con.sense == Sense::LessEqual) == (a > 0);
      if (con.sense == Sense::Equal) {
        lo[v] = std::max(lo[v], bound);
        hi[v] = std::min(hi[v], bound);
      } else if (upper_side) {
        hi[v] = std::min(hi[v], bound);
      } else {
        lo[v] = std::max(lo[v], bound);
      }
    }
    if (!ok) continue;
    for (int c : continuous) {
      if (lo[c] > hi[c] + kFeasTol) {
        ok = false;
        break;
      }
      x[c] = cost[c] > 0 ? lo[c] : std::max(lo[c], hi[c]);
    }
    if (!ok) continue;
    const double value = problem.evaluate(x);
    if (value < best.objective_value - 1e-12) {
      best.objective_value = value;
      best.assignment = x;
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::Infeasible, "no feasible binary assignment");
  best.status = SolveStatus::Optimal;
  best.node_count = static_cast<long>(count);
  return best;
}

// ---------------------------------------------------------------------------
// LP text export

namespace {

void write_terms(std::ostream& out, const MilpProblem& p, const std::vector<Term>& terms) {
  if (terms.empty()) {
    out << " 0";
    return;
  }
  bool first = true;
  for (const auto& t : terms) {
    const double c = t.coef;
    if (first) out << ' ' << (c < 0 ? "- " : "") << std::abs(c) << ' ' << p.variables[t.var].name;
    else out << (c < 0 ? " - " : " + ") << std::abs(c) << ' ' << p.variables[t.var].name;
    first = false;
  }
}

}  // namespace

void write_lp(std::ostream& out, const MilpProblem& problem) {
  problem.audit();
  const auto old = out.precision(17);
  out << "Minimize\n obj:";
  write_terms(out, problem, problem.objective);
  if (problem.objective_constant != 0.0) {
    out << (problem.objective_constant < 0 ? " - " : " + ") << std::abs(problem.objective_constant);
  }
  out << "\nSubject To\n";
  for (std::size_t c = 0; c < problem.constraints.size(); ++c) {
    const auto& con = problem.constraints[c];
    out << ' ' << (con.name.empty() ? "c" + std::to_string(c) : con.name) << ':';
    write_terms(out, problem, con.terms);
    out << (con.sense == Sense::LessEqual ? " <= " : con.sense == Sense::GreaterEqual ? " >= " : " = ") << con.rhs
        << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : problem.variables) {
    if (v.kind == VarKind::Binary) continue;
    out << ' ' << v.lower << " <= " << v.name << " <= " << v.upper << '\n';
  }
  out << "Binaries\n";
  for (const auto& v : problem.variables) {
    if (v.kind == VarKind::Binary) out << ' ' << v.name << '\n';
  }
  out << "End\n";
  out.precision(old);
}

}  // namespace prim
