#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "edgestates/domain_grid.hpp"
#include "edgestates/error.hpp"
#include "edgestates/field.hpp"

namespace edgestates {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;

// Line integral of the vector potential from p to q.
using LinkIntegral = std::function<double(Vec2 p, Vec2 q)>;

// Midpoint rule for the potential of a gauge solution.
LinkIntegral midpoint_links(const GaugeData& gauge);
LinkIntegral midpoint_links(std::function<Vec2(Vec2)> potential);

// Five-point magnetic Laplacian -(grad + i eps^-2 a)^2 on the unknowns of a masked
// grid with Peierls link factors and zero Dirichlet values outside the mask:
// (H psi)_u = sum over neighbours v of (psi_u - U_uv psi_v) / h^2,
// U_uv = exp(i eps^-2 int_u^v a.dl), and missing neighbours count as psi_v = 0.
class MagneticOperator2D {
 public:
  static MagneticOperator2D assemble(const DomainGrid& grid, double epsilon, const LinkIntegral& links);
  // Builds the grid from the curve at spacing h (<= eps / 6, else ResolutionTooCoarse).
  static MagneticOperator2D assemble(const BoundaryCurve& curve, const GaugeData& gauge, double epsilon, double h);

  const DomainGrid& grid() const { return grid_; }
  double epsilon() const { return epsilon_; }
  std::size_t size() const { return grid_.unknown_count(); }

  void apply(const cplx* x, cplx* y) const;
  ComplexVector apply(const ComplexVector& x) const;
  Eigen::MatrixXcd dense() const;

  // Link factor from unknown u to its east / north neighbour (1 when the neighbour is outside).
  cplx east_link(std::size_t u) const { return east_[u]; }
  cplx north_link(std::size_t u) const { return north_[u]; }

 private:
  DomainGrid grid_;
  double epsilon_ = 0.0;
  double inv_h2_ = 0.0;
  std::vector<long> east_index_, north_index_;  // -1 when the neighbour is not an unknown
  std::vector<cplx> east_, north_;
};

struct SolverStats {
  std::size_t krylov_dimension = 0;
  std::size_t inner_iterations = 0;
  std::size_t inner_solves = 0;
  std::size_t refinement_sweeps = 0;
};

struct SpectralResult {
  std::string provenance;  // "grid2d" or "disk_radial"
  std::vector<double> eigenvalues;
  std::vector<ComplexVector> eigenvectors;  // grid2d: indexed by unknowns, h^2 sum |psi|^2 = 1
  std::vector<double> residuals;
  std::vector<int> angular_momentum;  // disk_radial only
  std::vector<int> radial_index;      // disk_radial only, 1-based
  double sigma = 0.0;
  double epsilon = 0.0;
  SolverStats stats;
};

void write_spectral_json(std::ostream& out, const SpectralResult& result);

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, SpectralResult partial)
      : Error(ErrorCode::NoConvergence, what), partial_(std::move(partial)) {}
  const SpectralResult& partial() const { return partial_; }

 private:
  SpectralResult partial_;
};

struct MinresResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// MINRES for (A - sigma) x = b with A Hermitian given by apply.
MinresResult minres(const std::function<void(const cplx*, cplx*)>& apply, double sigma, const ComplexVector& b,
                    ComplexVector& x, double tolerance, std::size_t max_iterations);

struct EigensolveOptions {
  double inner_tolerance = 1e-10;
  std::size_t max_inner_iterations = 200000;
  double residual_tolerance = 1e-8;
  std::size_t krylov_dimension = 0;  // 0: max(2 count + 20, 40)
  std::size_t max_refinement_sweeps = 8;
  unsigned seed = 12345;
};

// count eigenpairs of the operator nearest sigma by shift-invert Lanczos.
SpectralResult eigensolve_near(const MagneticOperator2D& op, double sigma, std::size_t count,
                               const EigensolveOptions& options = {});

struct RadialOptions {
  // Cells on the coarsest of the three Richardson levels; 0 picks from R / eps.
  std::size_t cells = 0;
};

// Orientation of the angular-momentum to boundary-wavenumber map on the disk, fixed by
// calibration at eps = 0.1 (the sign minimizing |eps^2 lambda - nu_1(q)| over edge states).
inline constexpr int kDiskMomentumSign = 1;

// q(m) = sign * (-2 pi eps) * (m + |Omega| / (2 pi eps^2)).
inline double disk_wavenumber(int m, double epsilon, double area, int sign = kDiskMomentumSign) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  return sign * (-two_pi * epsilon) * (m + area / (two_pi * epsilon * epsilon));
}

// Separable disk problem -u'' - u'/r + (m/r + eps^-2 r/2)^2 u = lambda u on (0, R), u(R) = 0.
// Without field the magnetic term is dropped and epsilon only sets the mesh.
SpectralResult disk_radial_oracle(double radius, double epsilon, int m_min, int m_max, std::size_t l_count,
                                  bool field_on, const RadialOptions& options = {});

}  // namespace edgestates
