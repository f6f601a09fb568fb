#pragma once

#include <vector>

#include <Eigen/Dense>

#include "bate/linalg.hpp"
#include "bate/motion.hpp"

namespace bate {

/// Uniformly spaced noise-free (or recorded) observations. All lists share
/// length k >= 2; spacing must be uniform within 1e-9.
struct ObservationWindow {
  std::vector<double> times;
  std::vector<Eigen::Vector3d> bearings;
  std::vector<double> angles;
  std::vector<Eigen::Vector3d> observer_positions;

  int size() const { return static_cast<int>(times.size()); }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

void validate_window(const ObservationWindow& window);

struct ObservabilityReport {
  int rank = 0;
  int full_dim = 0;
  bool observable = false;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd null_basis;
  double tolerance = 0.0;
};

/// Stacks H(t_i) F^(i-1) over the window into the (6k x 7) rank-test matrix.
Eigen::MatrixXd build_observability_matrix(const ObservationWindow& window);

/// SVD rank with cutoff max(rows, cols) * sigma_max * eps * 100 and the right
/// null-space basis.
ObservabilityReport analyze_rank(const Eigen::MatrixXd& m, int full_dim);

/// Least-squares polynomial fit of the given order to vector samples,
/// coefficients indexed by power.
std::vector<Eigen::Vector3d> fit_polynomial(const std::vector<double>& times,
                                            const std::vector<Eigen::Vector3d>& values,
                                            int order);

/// Discrete linear system A~ X = h~ over the window, X = [s_0..s_n; l],
/// A(t_i) = [I t_i*I ... t_i^n*I rho(t_i)], rho = -g/theta. Times are shifted
/// so t_1 = 0; h~ is the observer position minus its order-n least-squares
/// fit (the higher-order motion content). Requires k >= n+2 samples.
struct StackedSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd h;
  std::vector<Eigen::Vector3d> observer_fit;  // fit coefficients, shifted time
  double t_origin = 0.0;
  int target_order = 0;
};

StackedSystem stack_discrete_system(const ObservationWindow& window, int target_order);

/// Least-squares solution of the stacked system. Throws UnobservableError
/// with the null direction when A~ is column-rank-deficient.
struct RecoveredSolution {
  std::vector<Eigen::Vector3d> relative_coefficients;  // s_0 .. s_n, shifted time
  double size = 0.0;
  double residual_norm = 0.0;
  double conditioning = 0.0;
  std::vector<Eigen::Vector3d> observer_fit;
  double t_origin = 0.0;
};

RecoveredSolution recover_motion(const StackedSystem& sys);

/// Target polynomial coefficients (shifted time): s_j + c_j.
std::vector<Eigen::Vector3d> recovered_target_coefficients(const RecoveredSolution& sol);

/// Sample-point reconstruction p_o(t_i) + g(t_i) * (size / theta(t_i)).
std::vector<Eigen::Vector3d> recovered_target_positions(const RecoveredSolution& sol,
                                                        const ObservationWindow& window);

}  // namespace bate
