#include <cmath>
#include <numeric>

#include "edgestates/io.hpp"
#include "edgestates/parallel.hpp"
#include "edgestates/spectra2d.hpp"
#include "edgestates/tridiagonal.hpp"

namespace edgestates {
namespace {

// Cell-centred conservative scheme for -(1/r)(r u')' + V(r) u on (0, R), u(R) = 0:
// nodes r_i = (i - 1/2) h, i = 1..n, h = R / (n + 1/2), symmetrized by sqrt(r_i).
SymmetricTridiagonal radial_matrix(double radius, std::size_t n, int m, double epsilon, bool field_on) {
  const double h = radius / (static_cast<double>(n) + 0.5);
  SymmetricTridiagonal t;
  t.diag.resize(n);
  t.off.resize(n - 1);
  const double b = field_on ? 1.0 / (epsilon * epsilon) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (static_cast<double>(i) + 0.5) * h;
    const double rm = static_cast<double>(i) * h, rp = (static_cast<double>(i) + 1.0) * h;
    const double a = m / r + 0.5 * b * r;
    const double potential = field_on ? a * a : static_cast<double>(m) * m / (r * r);
    t.diag[i] = (rm + rp) / (r * h * h) + potential;
    if (i + 1 < n) t.off[i] = -rp / (h * h * std::sqrt(r * (r + h)));
  }
  return t;
}

}  // namespace

SpectralResult disk_radial_oracle(double radius, double epsilon, int m_min, int m_max, std::size_t l_count,
                                  bool field_on, const RadialOptions& options) {
  require(radius > 0 && epsilon > 0, "radius and epsilon must be positive");
  require(m_min <= m_max && m_max - m_min < 100000, "angular momentum range must be finite and ordered");
  require(l_count >= 1, "need at least one radial index");
  const std::size_t cells =
      options.cells > 0 ? options.cells
                        : std::max<std::size_t>(320, static_cast<std::size_t>(std::ceil(48.0 * radius / epsilon)));
  require(cells > 4 * l_count, "radial mesh too coarse for the requested count");

  const std::size_t nm = static_cast<std::size_t>(m_max - m_min + 1);
  std::vector<std::vector<double>> values(nm), errors(nm);
  parallel_for(nm, [&](std::size_t idx) {
    const int m = m_min + static_cast<int>(idx);
    std::vector<std::array<double, 3>> lev(l_count);
    for (int level = 0; level < 3; ++level) {
      const SymmetricTridiagonal t = radial_matrix(radius, cells << level, m, epsilon, field_on);
      for (std::size_t l = 0; l < l_count; ++l) lev[l][level] = t.eigenvalue(l);
    }
    values[idx].resize(l_count);
    errors[idx].resize(l_count);
    for (std::size_t l = 0; l < l_count; ++l) {
      const auto& v = lev[l];
      const double d1 = v[0] - v[1], d2 = v[1] - v[2];
      const double floor = 1e-12 * (1.0 + std::abs(v[2]));
      if (!std::isfinite(v[2]) || (std::abs(d2) > floor && (std::abs(d2) > 0.5 * std::abs(d1) || d1 * d2 < 0)))
        fail(ErrorCode::MeshFailure, "radial eigenvalue does not converge under refinement (m = " + std::to_string(m) +
                                         ", l = " + std::to_string(l + 1) + ")");
      const double r1a = (4.0 * v[1] - v[0]) / 3.0, r1b = (4.0 * v[2] - v[1]) / 3.0;
      const double r2 = (16.0 * r1b - r1a) / 15.0;
      values[idx][l] = r2;
      errors[idx][l] = std::abs(r2 - r1b);
    }
  });

  SpectralResult result;
  result.provenance = "disk_radial";
  result.epsilon = epsilon;
  for (std::size_t idx = 0; idx < nm; ++idx) {
    for (std::size_t l = 0; l < l_count; ++l) {
      result.eigenvalues.push_back(values[idx][l]);
      result.residuals.push_back(errors[idx][l]);
      result.angular_momentum.push_back(m_min + static_cast<int>(idx));
      result.radial_index.push_back(static_cast<int>(l) + 1);
    }
  }
  return result;
}

}  // namespace edgestates
