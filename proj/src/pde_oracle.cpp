#include "fk/pde_oracle.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <charconv>
#include <cmath>
#include <fstream>
#include <bit>

#include "fk/parallel.hpp"

namespace fk {

GridSolution::GridSolution(double h, double r, int half_nodes)
    : h_(h), r_(r), m_(half_nodes) {
  const std::size_t s = std::size_t(side());
  values_.assign(s * s * s, 0.0);
  mask_.assign(s * s * s, 0);
  for (int i = 0; i < side(); ++i)
    for (int j = 0; j < side(); ++j)
      for (int k = 0; k < side(); ++k) mask_[index(i, j, k)] = node(i, j, k).norm() < r_ ? 1 : 0;
}

std::complex<double> GridSolution::interpolate(const Vec3& x) const {
  const Vec3 g = x / h_ + Vec3::Constant(m_);
  const int last = side() - 1;
  if ((g.array() < 0.0).any() || (g.array() > double(last)).any()) return 0.0;
  int base[3];
  double w[3];
  for (int d = 0; d < 3; ++d) {
    base[d] = std::min(int(std::floor(g[d])), last - 1);
    w[d] = g[d] - base[d];
  }
  std::complex<double> acc = 0.0;
  for (int c = 0; c < 8; ++c) {
    const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
    const double weight = (di ? w[0] : 1 - w[0]) * (dj ? w[1] : 1 - w[1]) * (dk ? w[2] : 1 - w[2]);
    if (weight != 0.0) acc += weight * (*this)(base[0] + di, base[1] + dj, base[2] + dk);
  }
  return acc;
}

GridSolution solve_dirichlet(const Potential& v, const Potential& f, double r, double h,
                             const GridOptions& opts) {
  if (!(r > 0.0)) throw ConfigError("ball radius must be positive");
  if (!(h > 0.0) || h > r / 10.0 * (1.0 + 1e-12)) throw ConfigError("grid spacing must satisfy h <= r/10");
  using Complex = std::complex<double>;
  using SpMat = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

  const int m = int(std::ceil(r / h - 1e-9));
  GridSolution sol(h, r, m);
  const int side = sol.side();

  // Unknown numbering over interior nodes.
  std::vector<int> unknown(sol.node_count(), -1);
  int count = 0;
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j)
      for (int k = 0; k < side; ++k)
        if (sol.interior(i, j, k)) unknown[sol.index(i, j, k)] = count++;

  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(std::size_t(count) * 7);
  Eigen::VectorXcd rhs(count);
  const double lap = 0.5 / (h * h);
  const Complex minus_half_i(0.0, -0.5);

  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      for (int k = 0; k < side; ++k) {
        const int row = unknown[sol.index(i, j, k)];
        if (row < 0) continue;
        const Vec3 p = sol.node(i, j, k);
        Complex diag = -6.0 * lap + minus_half_i * v(p);
        if (opts.drift_on && opts.upwind) diag -= 1.0 / h;
        const int ijk[3] = {i, j, k};
        for (int d = 0; d < 3; ++d) {
          for (int s : {-1, 1}) {
            double c = lap;
            if (opts.drift_on && d == 0) c += opts.upwind ? (s > 0 ? 1.0 / h : 0.0) : s / (2.0 * h);
            if (c == 0.0) continue;
            int nb[3] = {ijk[0], ijk[1], ijk[2]};
            nb[d] += s;
            const int col = unknown[sol.index(nb[0], nb[1], nb[2])];
            if (col >= 0) {
              triplets.emplace_back(row, col, c);
            } else {
              // Ghost value u_p (1 - 1/theta) from linear extrapolation to the
              // sphere point at distance theta h along the axis (phi = 0 there).
              const double pd = p[d];
              const double t = -s * pd + std::sqrt(pd * pd + r * r - p.squaredNorm());
              const double theta = std::max(t / h, 1e-6);
              diag += c * (1.0 - 1.0 / theta);
            }
          }
        }
        triplets.emplace_back(row, row, diag);
        rhs[row] = -f(p);
      }
    }
  }

  SpMat a(count, count);
  a.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<Complex>> solver;
  solver.setTolerance(opts.tolerance);
  solver.setMaxIterations(opts.max_iterations);
  solver.compute(a);
  Eigen::VectorXcd x = solver.solve(rhs);
  const double rhs_norm = rhs.norm();
  const double residual = rhs_norm > 0.0 ? (rhs - a * x).norm() / rhs_norm : 0.0;
  if (solver.info() != Eigen::Success || !std::isfinite(residual) || residual > 10.0 * opts.tolerance) {
    throw SolverError("BiCGSTAB did not reach the requested residual (final relative residual " +
                          std::to_string(residual) + ")",
                      residual);
  }
  sol.iterations = int(solver.iterations());
  sol.residual = residual;

  for (std::size_t node = 0; node < sol.node_count(); ++node) {
    if (unknown[node] >= 0) sol.values()[node] = x[unknown[node]];
  }
  return sol;
}

namespace {

void append_double(std::string& out, double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

}  // namespace

void write_grid_csv(const GridSolution& g, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  os << "i,j,k,re,im\n";
  std::string line;
  for (int i = 0; i < g.side(); ++i)
    for (int j = 0; j < g.side(); ++j)
      for (int k = 0; k < g.side(); ++k) {
        line.clear();
        line += std::to_string(i) + ',' + std::to_string(j) + ',' + std::to_string(k) + ',';
        append_double(line, g(i, j, k).real());
        line += ',';
        append_double(line, g(i, j, k).imag());
        line += '\n';
        os << line;
      }
}

void write_grid_binary(const GridSolution& g, const std::filesystem::path& stem) {
  auto header_path = stem;
  header_path += ".json";
  auto data_path = stem;
  data_path += ".bin";
  {
    std::ofstream os(header_path);
    if (!os) throw ConfigError("cannot open " + header_path.string() + " for writing");
    std::string h, r;
    append_double(h, g.spacing());
    append_double(r, g.radius());
    os << "{\n  \"format\": \"fk-grid-1\",\n  \"spacing\": " << h << ",\n  \"radius\": " << r
       << ",\n  \"side\": " << g.side() << ",\n  \"half_nodes\": " << g.half_nodes()
       << ",\n  \"layout\": \"(i*side + j)*side + k, x = (index - half_nodes) * spacing\",\n"
       << "  \"scalar\": \"complex float64 little-endian, re then im\",\n  \"data\": \""
       << data_path.filename().string() << "\"\n}\n";
  }
  std::ofstream os(data_path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + data_path.string() + " for writing");
  static_assert(std::endian::native == std::endian::little, "binary export assumes little-endian");
  os.write(reinterpret_cast<const char*>(g.values().data()),
           std::streamsize(g.values().size() * sizeof(std::complex<double>)));
}

CrossCheck mc_vs_pde(const Potential& v, const Potential& f, double r, double h, std::size_t n,
                     const ExitConfig& cfg, bool drift_on) {
  if (!(cfg.start.norm() < r)) throw DomainError("cross-check point must lie inside the ball");
  if (n == 0) throw ConfigError("sample count must be positive");
  CrossCheck out;

  const auto samples = parallel_map<ExitSample>(
      n, cfg.path.workers, [&](std::size_t i) { return sample_exit(r, v, f, cfg, i, drift_on); });
  std::vector<std::complex<double>> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = samples[i].value;
    out.anomalies += samples[i].anomaly ? 1 : 0;
  }
  out.monte_carlo = summarize(values);

  GridOptions opts;
  opts.drift_on = drift_on;
  const GridSolution fine = solve_dirichlet(v, f, r, h, opts);
  out.iterations = fine.iterations;
  out.finite_difference = fine.interpolate(cfg.start);
  if (2.0 * h <= r / 10.0 * (1.0 + 1e-12)) {
    out.finite_difference_coarse = solve_dirichlet(v, f, r, 2.0 * h, opts).interpolate(cfg.start);
    out.discretization_estimate = std::abs(out.finite_difference - out.finite_difference_coarse) / 3.0;
  } else {
    out.finite_difference_coarse = out.finite_difference;
  }

  out.abs_difference = std::abs(out.monte_carlo.mean - out.finite_difference);
  const double scale = std::abs(out.finite_difference);
  out.rel_difference = scale > 0.0 ? out.abs_difference / scale : (out.abs_difference > 0.0 ? INFINITY : 0.0);
  out.combined_uncertainty =
      3.0 * std::hypot(out.monte_carlo.std_error_re, out.monte_carlo.std_error_im) +
      out.discretization_estimate;
  return out;
}

}  // namespace fk
