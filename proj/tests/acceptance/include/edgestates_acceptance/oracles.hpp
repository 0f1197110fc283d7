#pragma once

// Independent reference values used by the tests. None of these touch the
// library's solvers.

#include <Eigen/Dense>
#include <vector>

namespace edgestates::oracle {

// First Dirichlet eigenvalue of -u'' + mu u on the half line (RK4 shooting + bisection).
double airy_dirichlet_eigenvalue();

// First positive zero of J0 from its power series.
double bessel_j0_first_zero();
double bessel_j0(double x);

// Eigenvalues of the dense finite-difference matrix of -d^2 + (mu + k)^2 on (0, mu_max),
// n interior nodes, via the Eigen dense symmetric solver.
Eigen::VectorXd dense_oscillator_eigenvalues(double k, double mu_max, int n);

// Nearest distance from p to a parametric curve sampled at `samples` points (brute force).
double brute_force_distance(const std::vector<double>& xs, const std::vector<double>& ys, double px, double py);

}  // namespace edgestates::oracle
