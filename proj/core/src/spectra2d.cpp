#include "edgestates/spectra2d.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "edgestates/io.hpp"
#include "edgestates/parallel.hpp"
#include "json.hpp"

namespace edgestates {
namespace {

using Vec = Eigen::VectorXcd;

double dot_real(const Vec& a, const Vec& b) { return a.dot(b).real(); }

// Global phase fix: largest component real and positive.
void fix_phase(Vec& v) {
  Eigen::Index best = 0;
  v.cwiseAbs2().maxCoeff(&best);
  const cplx c = v[best];
  if (std::abs(c) > 0) v *= std::conj(c) / std::abs(c);
}

}  // namespace

LinkIntegral midpoint_links(std::function<Vec2(Vec2)> potential) {
  return [potential = std::move(potential)](Vec2 p, Vec2 q) {
    const Vec2 mid = (p + q) * 0.5;
    return potential(mid).dot(q - p);
  };
}

LinkIntegral midpoint_links(const GaugeData& gauge) {
  return midpoint_links([&gauge](Vec2 p) { return gauge.potential(p); });
}

MagneticOperator2D MagneticOperator2D::assemble(const DomainGrid& grid, double epsilon, const LinkIntegral& links) {
  require(epsilon > 0, "epsilon must be positive");
  MagneticOperator2D op;
  op.grid_ = grid;
  op.epsilon_ = epsilon;
  op.inv_h2_ = 1.0 / (grid.spacing() * grid.spacing());
  const std::size_t n = grid.unknown_count();
  op.east_index_.assign(n, -1);
  op.north_index_.assign(n, -1);
  op.east_.assign(n, cplx(1.0, 0.0));
  op.north_.assign(n, cplx(1.0, 0.0));
  const double scale = 1.0 / (epsilon * epsilon);
  parallel_for(n, [&](std::size_t u) {
    const std::size_t node = grid.inside_nodes()[u];
    const std::size_t e = grid.neighbour(node, DomainGrid::East), nn = grid.neighbour(node, DomainGrid::North);
    if (e != static_cast<std::size_t>(-1) && grid.inside(e)) {
      op.east_index_[u] = grid.unknown(e);
      op.east_[u] = std::polar(1.0, scale * links(grid.position(node), grid.position(e)));
    }
    if (nn != static_cast<std::size_t>(-1) && grid.inside(nn)) {
      op.north_index_[u] = grid.unknown(nn);
      op.north_[u] = std::polar(1.0, scale * links(grid.position(node), grid.position(nn)));
    }
  });
  return op;
}

MagneticOperator2D MagneticOperator2D::assemble(const BoundaryCurve& curve, const GaugeData& gauge, double epsilon,
                                                double h) {
  require(epsilon > 0 && h > 0, "epsilon and h must be positive");
  if (h > epsilon / 6.0 * (1.0 + 1e-12))
    fail(ErrorCode::ResolutionTooCoarse, "grid spacing must resolve the magnetic length (h <= eps / 6)");
  return assemble(DomainGrid::build(curve, h), epsilon, midpoint_links(gauge));
}

void MagneticOperator2D::apply(const cplx* x, cplx* y) const {
  const std::size_t n = size();
  for (std::size_t u = 0; u < n; ++u) y[u] = 4.0 * x[u];
  for (std::size_t u = 0; u < n; ++u) {
    const long e = east_index_[u];
    if (e >= 0) {
      y[u] -= east_[u] * x[e];
      y[e] -= std::conj(east_[u]) * x[u];
    }
    const long no = north_index_[u];
    if (no >= 0) {
      y[u] -= north_[u] * x[no];
      y[no] -= std::conj(north_[u]) * x[u];
    }
  }
  for (std::size_t u = 0; u < n; ++u) y[u] *= inv_h2_;
}

ComplexVector MagneticOperator2D::apply(const ComplexVector& x) const {
  require(x.size() == size(), "vector size does not match the operator");
  ComplexVector y(x.size());
  apply(x.data(), y.data());
  return y;
}

Eigen::MatrixXcd MagneticOperator2D::dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index u = 0; u < n; ++u) {
    m(u, u) = 4.0 * inv_h2_;
    const long e = east_index_[u];
    if (e >= 0) {
      m(u, e) -= east_[u] * inv_h2_;
      m(e, u) -= std::conj(east_[u]) * inv_h2_;
    }
    const long no = north_index_[u];
    if (no >= 0) {
      m(u, no) -= north_[u] * inv_h2_;
      m(no, u) -= std::conj(north_[u]) * inv_h2_;
    }
  }
  return m;
}

MinresResult minres(const std::function<void(const cplx*, cplx*)>& apply, double sigma, const ComplexVector& b,
                    ComplexVector& x, double tolerance, std::size_t max_iterations) {
  const auto n = static_cast<Eigen::Index>(b.size());
  Eigen::Map<const Vec> bv(b.data(), n);
  x.assign(b.size(), cplx(0.0, 0.0));
  Eigen::Map<Vec> xv(x.data(), n);
  MinresResult res;
  const double bnorm = bv.norm();
  if (bnorm == 0) {
    res.converged = true;
    return res;
  }
  auto op = [&](const Vec& v, Vec& out) {
    out.resize(n);
    apply(v.data(), out.data());
    out -= sigma * v;
  };
  Vec Ax(n), r1(n), r2(n), y(n), v(n), w = Vec::Zero(n), w1(n), w2 = Vec::Zero(n);
  // Restarts from the current iterate when the recurrence residual drifts from the true one.
  for (int restart = 0; restart < 4; ++restart) {
    op(xv, Ax);
    r1 = bv - Ax;
    double beta1 = r1.norm();
    res.relative_residual = beta1 / bnorm;
    if (res.relative_residual <= tolerance) {
      res.converged = true;
      return res;
    }
    if (res.iterations >= max_iterations) break;
    r2 = r1;
    y = r1;
    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1, cs = -1.0, sn = 0.0;
    w.setZero();
    w2.setZero();
    Vec dx = Vec::Zero(n);
    for (std::size_t itn = 1; res.iterations < max_iterations; ++itn) {
      ++res.iterations;
      v = y / beta;
      op(v, y);
      if (itn >= 2) y -= (beta / oldb) * r1;
      const double alfa = dot_real(v, y);
      y -= (alfa / beta) * r2;
      r1 = r2;
      r2 = y;
      oldb = beta;
      beta = y.norm();
      const double oldeps = epsln;
      const double delta = cs * dbar + sn * alfa;
      const double gbar = sn * dbar - cs * alfa;
      epsln = sn * beta;
      dbar = -cs * beta;
      double gamma = std::max(std::hypot(gbar, beta), 1e-300);
      cs = gbar / gamma;
      sn = beta / gamma;
      const double phi = cs * phibar;
      phibar = sn * phibar;
      w1 = w2;
      w2 = w;
      w = (v - oldeps * w1 - delta * w2) / gamma;
      dx += phi * w;
      if (phibar <= 0.5 * tolerance * bnorm || beta == 0.0) break;
    }
    xv += dx;
  }
  op(xv, Ax);
  res.relative_residual = (bv - Ax).norm() / bnorm;
  res.converged = res.relative_residual <= tolerance;
  return res;
}

SpectralResult eigensolve_near(const MagneticOperator2D& op, double sigma, std::size_t count,
                               const EigensolveOptions& options) {
  const std::size_t n = op.size();
  require(count >= 1 && count <= n, "requested eigenpair count is out of range");
  const auto N = static_cast<Eigen::Index>(n);
  const std::size_t guard = std::max<std::size_t>(4, count / 2);
  std::size_t m = options.krylov_dimension > 0 ? options.krylov_dimension : std::max<std::size_t>(2 * count + 20, 40);
  m = std::min(m, n);
  const std::size_t keep = std::min(count + guard, m);

  SpectralResult result;
  result.provenance = "grid2d";
  result.sigma = sigma;
  result.epsilon = op.epsilon();
  auto apply = [&](const cplx* a, cplx* b) { op.apply(a, b); };

  auto inverse = [&](const Vec& b, double tol) {
    ComplexVector bb(b.data(), b.data() + N), x;
    const MinresResult r = minres(apply, sigma, bb, x, tol, options.max_inner_iterations);
    result.stats.inner_iterations += r.iterations;
    ++result.stats.inner_solves;
    if (!r.converged)
      throw NoConvergenceError("inner MINRES solve stalled at relative residual " + format_number(r.relative_residual),
                               result);
    return Vec(Eigen::Map<const Vec>(x.data(), N));
  };

  // Lanczos on (H - sigma)^-1 with full reorthogonalization.
  std::mt19937 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd Q(N, static_cast<Eigen::Index>(m));
  Vec q(N);
  for (Eigen::Index i = 0; i < N; ++i) q[i] = cplx(gauss(rng), gauss(rng));
  q.normalize();
  std::vector<double> alpha, beta;
  std::size_t dim = 0;
  for (std::size_t j = 0; j < m; ++j) {
    Q.col(static_cast<Eigen::Index>(j)) = q;
    dim = j + 1;
    Vec w = inverse(q, options.inner_tolerance);
    const double a = dot_real(q, w);
    alpha.push_back(a);
    w -= a * q;
    if (j > 0) w -= beta.back() * Q.col(static_cast<Eigen::Index>(j - 1));
    for (int pass = 0; pass < 2; ++pass) {
      const auto block = Q.leftCols(static_cast<Eigen::Index>(dim));
      w -= block * (block.adjoint() * w);
    }
    const double b = w.norm();
    if (j + 1 == m || b < 1e-12 * std::abs(a)) break;
    beta.push_back(b);
    q = w / b;
  }
  result.stats.krylov_dimension = dim;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t j = 0; j < dim; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < dim) T(j, j + 1) = T(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes(T);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(tes.eigenvalues()[a]) > std::abs(tes.eigenvalues()[b]);
  });
  const std::size_t k = std::min(keep, static_cast<std::size_t>(dim));
  Eigen::MatrixXcd V(N, static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    V.col(static_cast<Eigen::Index>(i)) =
        Q.leftCols(static_cast<Eigen::Index>(dim)) * tes.eigenvectors().col(order[i]).cast<cplx>();

  // Rayleigh-Ritz with H itself, refined by shift-invert subspace sweeps.
  const std::size_t want = std::min(count, k);
  for (std::size_t sweep = 0;; ++sweep) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(V);
    Eigen::MatrixXcd B = qr.householderQ() * Eigen::MatrixXcd::Identity(N, V.cols());
    Eigen::MatrixXcd HB(N, B.cols());
    for (Eigen::Index c = 0; c < B.cols(); ++c) {
      Vec col = B.col(c), out(N);
      op.apply(col.data(), out.data());
      HB.col(c) = out;
    }
    Eigen::MatrixXcd G = B.adjoint() * HB;
    G = 0.5 * (G + G.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ges(G);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(G.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(ges.eigenvalues()[a] - sigma) < std::abs(ges.eigenvalues()[b] - sigma);
    });
    result.eigenvalues.clear();
    result.eigenvectors.clear();
    result.residuals.clear();
    double worst = 0.0;
    Eigen::MatrixXcd next(N, B.cols());
    for (std::size_t i = 0; i < static_cast<std::size_t>(B.cols()); ++i) {
      const Eigen::Index c = idx[i];
      const double lambda = ges.eigenvalues()[c];
      Vec psi = B * ges.eigenvectors().col(c);
      Vec hpsi = HB * ges.eigenvectors().col(c);
      next.col(static_cast<Eigen::Index>(i)) = psi;
      if (i >= want) continue;
      const double r = (hpsi - lambda * psi).norm() / psi.norm();
      worst = std::max(worst, r);
      result.eigenvalues.push_back(lambda);
      result.residuals.push_back(r);
      fix_phase(psi);
      psi /= psi.norm() * op.grid().spacing();
      result.eigenvectors.emplace_back(psi.data(), psi.data() + N);
    }
    result.stats.refinement_sweeps = sweep;
    if (worst <= options.residual_tolerance) break;
    if (sweep >= options.max_refinement_sweeps)
      throw NoConvergenceError("eigenpair residual " + format_number(worst) + " above tolerance", result);
    for (Eigen::Index c = 0; c < next.cols(); ++c) next.col(c) = inverse(next.col(c), 1e-12);
    V = next;
  }
  // Ascending order near the shift.
  std::vector<std::size_t> perm(result.eigenvalues.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](auto a, auto b) { return result.eigenvalues[a] < result.eigenvalues[b]; });
  SpectralResult sorted = result;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    sorted.eigenvalues[i] = result.eigenvalues[perm[i]];
    sorted.residuals[i] = result.residuals[perm[i]];
    sorted.eigenvectors[i] = result.eigenvectors[perm[i]];
  }
  return sorted;
}

void write_spectral_json(std::ostream& out, const SpectralResult& result) {
  nlohmann::ordered_json j;
  j["provenance"] = result.provenance;
  j["epsilon"] = result.epsilon;
  if (result.provenance == "grid2d") j["sigma"] = result.sigma;
  j["eigenvalues"] = result.eigenvalues;
  j["residuals"] = result.residuals;
  if (!result.angular_momentum.empty()) {
    j["angular_momentum"] = result.angular_momentum;
    j["radial_index"] = result.radial_index;
  }
  j["stats"] = {{"krylov_dimension", result.stats.krylov_dimension},
                {"inner_iterations", result.stats.inner_iterations},
                {"inner_solves", result.stats.inner_solves},
                {"refinement_sweeps", result.stats.refinement_sweeps}};
  out << j.dump(2) << "\n";
}

}  // namespace edgestates
