#pragma once

#include "prim/potentials.hpp"

#include <chrono>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace prim {

enum class VarKind { Binary, Continuous };
enum class Sense { LessEqual, GreaterEqual, Equal };
enum class SolveStatus { Optimal, Infeasible, TimeLimit };

std::string_view to_string(SolveStatus status);

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = 1.0;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  std::string name;
};

// Minimise objective_constant + sum(objective) subject to constraints and
// variable bounds. Every variable must be bounded on both sides.
struct MilpProblem {
  std::vector<Variable> variables;
  std::vector<Term> objective;
  double objective_constant = 0.0;
  std::vector<Constraint> constraints;
  std::vector<int> selection_vars;  // v_i of build_milp, in proposal order

  int add_variable(std::string name, VarKind kind, double lower, double upper, double cost = 0.0);
  void add_constraint(std::vector<Term> terms, Sense sense, double rhs, std::string name = {});

  // Throws InvalidArgument on references to undeclared variables, non-finite
  // data or binaries whose bounds are not [0,1].
  void audit() const;
  int binary_count() const;
  std::vector<double> objective_vector() const;  // dense, duplicates summed
  double evaluate(const std::vector<double>& x) const;
  bool feasible(const std::vector<double>& x, double tol = 1e-7) const;
};

struct Solution {
  std::vector<double> assignment;
  double objective_value = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  long node_count = 0;
};

struct MilpOptions {
  // r_k in b_i when at least this fraction of the region's points lies inside
  // the box. Used only when the context carries no precomputed incidence.
  double incidence_fraction = 0.5;
  double incidence_margin = 0.0;
};

// CRF energy as a MILP: v_i (binary), y_i_j for positive overlap pairs,
// s_k per region (continuous in [0,1]) and u_i_n_q per co-occurrence entry.
MilpProblem build_milp(const ShapeContext& ctx, const CrfWeights& weights, const MilpOptions& options = {});

// Proposal indices with v_i = 1.
std::vector<int> selected_proposals(const MilpProblem& problem, const Solution& solution);

// Per-variable bound overrides for solve_lp; empty vectors keep the problem's.
struct BoundOverride {
  std::vector<double> lower, upper;
};

// LP relaxation (integrality dropped) by a bounded-variable primal simplex.
// Throws Infeasible or NumericalFailure.
Solution solve_lp(const MilpProblem& problem, const BoundOverride& bounds = {});

struct NodeEvent {
  long node = 0;
  long parent = -1;  // -1 for the root
  int depth = 0;
  double parent_bound = 0.0;
  double bound = 0.0;  // LP value of this node
};

struct BranchAndBoundOptions {
  std::chrono::duration<double> time_limit = std::chrono::seconds(30);
  int heuristic_interval = 50;  // rounding heuristic every n nodes (0 = root only)
  std::function<void(const NodeEvent&)> observer;
};

// Best-first branch and bound on LP bounds, branching on the binary closest to
// 0.5 (lowest index on ties). Throws Infeasible when no integral point exists;
// returns the incumbent with status TimeLimit when time runs out.
Solution solve_branch_and_bound(const MilpProblem& problem, const BranchAndBoundOptions& options = {});

// Enumerates all binary assignments (at most 20 binaries, else TooLarge).
// Each constraint may mention at most one continuous variable, which is then
// set to its cheapest feasible value.
Solution solve_exhaustive(const MilpProblem& problem);

// LP text export; see docs/lp_format.md.
void write_lp(std::ostream& out, const MilpProblem& problem);

}  // namespace prim
