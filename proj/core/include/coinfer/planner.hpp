#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coinfer/cost_model.hpp"

namespace coinfer {

// Joint bit-width / frequency planning: minimize the distortion-bound gap
// D_U(b-1) - D_L(b-1) subject to delay and energy budgets, by successive
// convex approximation over the continuous relaxation, with a brute-force
// oracle over integer bit-widths for validation.

struct PlanProblem {
  Workload workload;
  DeviceProfile device;
  ServerProfile server;
  double lambda = 1.0;  // fitted weight-magnitude rate
  double t0 = 0.0;      // delay budget, seconds
  double e0 = 0.0;      // energy budget, joules
};

void validate(const PlanProblem& problem);

enum class PlanStatus { Optimal, Infeasible };

std::string to_string(PlanStatus s);

struct Plan {
  int b_hat = 0;
  double f = 0.0;
  double f_tilde = 0.0;
  double delay = 0.0;
  double energy = 0.0;
  double d_upper_bound = 0.0;  // D_U(b_hat - 1)
  double d_lower_bound = 0.0;  // D_L(b_hat - 1)
  double objective_gap = 0.0;
  PlanStatus status = PlanStatus::Infeasible;
};

struct ScaIterate {
  double b_tilde = 0.0;
  double b_tilde_prime = 0.0;
  double f = 0.0;
  double f_tilde = 0.0;
  double objective = 0.0;  // true gap at b_tilde
};

struct ScaTrace {
  std::vector<ScaIterate> iterations;
  bool converged = false;
  double threshold = 0.0;
};

/// D_U(b-1) - D_L(b-1) for continuous b > 1 (rate excludes the sign bit).
double objective_gap(double b_tilde, double lambda);

/// The iteration-k convex majorant: D_U(b-1) minus the tangent of D_L at the
/// anchor. Touches objective_gap at b = anchor and upper-bounds it elsewhere.
double linearized_objective(double b_tilde, double anchor, double lambda);

struct FrequencyAssignment {
  double f = 0.0;
  double f_tilde = 0.0;
  double delay = 0.0;
  double energy = 0.0;
};

/// Energy-minimal frequencies meeting the delay budget for a continuous agent
/// cycle count; empty when no point in the frequency box fits both budgets.
std::optional<FrequencyAssignment> min_energy_frequencies(double agent_cycle_count,
                                                          double server_cycle_count,
                                                          const PlanProblem& problem);

/// Integer-bit-width wrapper (2 <= b_hat <= b_max).
std::optional<FrequencyAssignment> frequency_feasibility(int b_hat,
                                                         const PlanProblem& problem);

/// Exact integer oracle: largest feasible bit-width, scanning b_max down to 2.
Plan brute_force_plan(const PlanProblem& problem);

struct SubproblemResult {
  bool feasible = false;
  double b_tilde = 0.0;
  double b_tilde_prime = 0.0;
  double f = 0.0;
  double f_tilde = 0.0;
  double majorant_value = 0.0;
};

/// Solves the iteration-k convex subproblem exactly (structured reduction:
/// bisection on the auxiliary variable for the feasible bit-width cap, then
/// 1-D convex minimization of the majorant).
SubproblemResult solve_subproblem(double anchor_b, double anchor_bprime,
                                  const PlanProblem& problem);

std::pair<Plan, ScaTrace> sca_plan(const PlanProblem& problem, double delta = 1e-6,
                                   int max_iters = 50);

/// Baseline: frequencies pinned at their maxima, bit-width maximized.
Plan fixed_frequency_plan(const PlanProblem& problem);

/// Baseline: uniformly sampled bit-widths, best feasible of `trials` kept.
Plan feasible_random_plan(const PlanProblem& problem, int trials = 400,
                          std::uint64_t seed = 1);

/// Parses the single-document problem schema (GHz/GFLOP units). Field errors
/// are collected and reported together.
PlanProblem parse_plan_problem(const std::string& json_text);

std::string to_json(const Plan& plan);
std::string to_json(const Plan& plan, const ScaTrace& trace);

}  // namespace coinfer
