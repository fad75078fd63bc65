#pragma once

// Finite-difference oracle for the Dirichlet problem
//
//   1/2 Lap(phi) + phi_x1 - (i/2) V phi = -F  in |x| < r,   phi = 0 on |x| = r,
//
// on the cube [-r, r]^3 with a node mask. Interior nodes next to the sphere
// use a ghost value extrapolated linearly to the true boundary point, which
// keeps the scheme second order without a boundary-fitted grid.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "fk/core_math.hpp"
#include "fk/estimate.hpp"
#include "fk/potentials.hpp"
#include "fk/sde_engine.hpp"

namespace fk {

struct GridOptions {
  bool drift_on = true;
  /// Forward difference for phi_x1 instead of the centered one.
  bool upwind = false;
  double tolerance = 1e-8;
  int max_iterations = 100000;
};

/// Complex field on the (2m+1)^3 nodes x_ijk = ((i-m)h, (j-m)h, (k-m)h).
/// Node (i, j, k) is stored at (i (2m+1) + j) (2m+1) + k.
class GridSolution {
 public:
  GridSolution(double h, double r, int half_nodes);

  double spacing() const noexcept { return h_; }
  double radius() const noexcept { return r_; }
  int half_nodes() const noexcept { return m_; }
  int side() const noexcept { return 2 * m_ + 1; }
  std::size_t node_count() const noexcept { return values_.size(); }

  std::size_t index(int i, int j, int k) const {
    return (std::size_t(i) * side() + std::size_t(j)) * side() + std::size_t(k);
  }
  Vec3 node(int i, int j, int k) const { return Vec3(i - m_, j - m_, k - m_) * h_; }
  bool interior(int i, int j, int k) const { return mask_[index(i, j, k)] != 0; }

  std::complex<double>& operator()(int i, int j, int k) { return values_[index(i, j, k)]; }
  const std::complex<double>& operator()(int i, int j, int k) const { return values_[index(i, j, k)]; }

  /// Trilinear interpolation; zero outside the cube.
  std::complex<double> interpolate(const Vec3& x) const;

  const std::vector<std::complex<double>>& values() const noexcept { return values_; }
  std::vector<std::complex<double>>& values() noexcept { return values_; }
  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }

  int iterations = 0;
  double residual = 0.0;

 private:
  double h_;
  double r_;
  int m_;
  std::vector<std::complex<double>> values_;
  std::vector<std::uint8_t> mask_;
};

/// Throws ConfigError when h > r/10 and SolverError when the Krylov solve
/// misses the relative-residual tolerance within the iteration budget.
GridSolution solve_dirichlet(const Potential& v, const Potential& f, double r, double h,
                             const GridOptions& opts = {});

/// CSV with header "i,j,k,re,im", one row per node, shortest round-trip decimals.
void write_grid_csv(const GridSolution& g, const std::filesystem::path& path);

/// `<stem>.json` header (spacing, radius, side, layout) plus `<stem>.bin` with
/// interleaved little-endian float64 (re, im) per node in storage order.
void write_grid_binary(const GridSolution& g, const std::filesystem::path& stem);

struct CrossCheck {
  ComplexEstimate monte_carlo;
  std::complex<double> finite_difference;
  std::complex<double> finite_difference_coarse;
  double discretization_estimate = 0.0;  // |phi_h - phi_2h| / 3
  double abs_difference = 0.0;
  double rel_difference = 0.0;
  double combined_uncertainty = 0.0;  // 3 MC sigma + discretization estimate
  std::size_t anomalies = 0;
  int iterations = 0;
};

/// Both sides of the exit-time representation at the point cfg.start.
CrossCheck mc_vs_pde(const Potential& v, const Potential& f, double r, double h, std::size_t n,
                     const ExitConfig& cfg, bool drift_on = true);

}  // namespace fk
