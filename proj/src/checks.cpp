#include "gofd/checks.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gofd/adaptivity.hpp"
#include "gofd/error.hpp"
#include "gofd/grid.hpp"
#include "gofd/symbol.hpp"
#include "gofd/toeplitz.hpp"
#include "gofd/transfer.hpp"

namespace gofd {

namespace {

using Clock = std::chrono::steady_clock;

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

struct Recorder {
  std::string suite;
  std::vector<CheckResult> out;
  Clock::time_point start = Clock::now();

  void add(std::string name, bool ok, std::string detail) {
    const auto now = Clock::now();
    out.push_back({suite, std::move(name), ok, std::move(detail), std::chrono::duration<double>(now - start).count()});
    start = now;
  }
};

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

SimplicialMesh random_mesh(int dim, std::mt19937_64& rng, std::size_t max_vertices) {
  std::uniform_real_distribution<double> unit(0, 1);
  SimplicialMesh base;
  if (dim == 1) {
    int hi = static_cast<int>(std::min<std::size_t>(max_vertices - 1, 200));
    base = generate_benchmark_mesh(MeshKind::interval, 4 + static_cast<int>(unit(rng) * (hi - 4)));
  } else if (dim == 2) {
    const bool disk = unit(rng) < 0.5;
    int n = 2;
    // disk: 1 + 3n(n+1) vertices; lshape: 3n^2 + 4n + 1
    auto count = [&](int k) { return disk ? 1u + 3u * k * (k + 1) : 3u * k * k + 4u * k + 1; };
    int top = 2;
    while (count(top + 1) <= max_vertices) ++top;
    n = 2 + static_cast<int>(unit(rng) * (top - 1));
    n = std::min(n, top);
    base = generate_benchmark_mesh(disk ? MeshKind::disk : MeshKind::lshape, n);
  } else if (dim == 3) {
    base = generate_benchmark_mesh(MeshKind::ball, max_vertices >= 125 && unit(rng) < 0.5 ? 2 : 1);
  } else {
    fail(ErrorCode::InvalidParameter, "dimension must be 1, 2 or 3");
  }
  const double a_h = mesh_stats(base).a_h;
  const double scale = 0.5 + 1.5 * unit(rng);
  Point shift{0, 0, 0};
  for (int r = 0; r < dim; ++r) shift[r] = unit(rng) - 0.5;
  double jitter = 0.3 * a_h / std::sqrt(static_cast<double>(dim));
  for (int attempt = 0; attempt < 8; ++attempt, jitter *= 0.5) {
    auto x = base.vertices();
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int r = 0; r < dim; ++r) {
        const double j = base.is_boundary(i) ? 0.0 : jitter * (2 * unit(rng) - 1);
        x[i][r] = scale * (x[i][r] + j) + shift[r];
      }
    }
    try {
      return base.with_vertices(std::move(x));
    } catch (const Error&) {
    }
  }
  return base;
}

std::vector<CheckResult> check_toeplitz(std::uint64_t seed) {
  Recorder rec{"toeplitz", {}};
  std::mt19937_64 rng(seed);
  for (int d : {1, 2, 3}) {
    const int n = d == 3 ? 8 : 16;
    for (double s : {0.25, 0.5, 0.75}) {
      SymbolCoefficients sym = d == 1 ? symbol_1d_analytic(s, n) : symbol_trapezoid(d, s, n, d == 2 ? 256 : 128);
      OverlayGrid grid(d, Point{0, 0, 0}, n, 1.0);
      ToeplitzOperator op(grid, sym);
      Eigen::MatrixXd dense = dense_materialize(sym, n, 5000);
      double worst = 0;
      for (int trial = 0; trial < 20; ++trial) {
        auto u = random_vector(grid.num_nodes(), rng);
        auto fast = op.apply(u);
        Eigen::VectorXd ref = dense * Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
        Eigen::VectorXd diff = ref - Eigen::Map<const Eigen::VectorXd>(fast.data(), static_cast<Eigen::Index>(fast.size()));
        worst = std::max(worst, diff.norm() / ref.norm());
      }
      std::ostringstream name;
      name << "fft apply vs dense d=" << d << " s=" << s << " N=" << n;
      rec.add(name.str(), worst <= 1e-12, "max relative error " + sci(worst));
    }
  }
  return rec.out;
}

std::vector<CheckResult> check_symbol() {
  Recorder rec{"symbol", {}};
  const int n = 32;
  for (double s : {0.25, 0.5, 0.75}) {
    auto exact = symbol_1d_analytic(s, n);
    auto trap = symbol_trapezoid(1, s, n, 4096);
    auto filon = richardson_extrapolate(symbol_filon_1d(s, n, 1024), symbol_filon_1d(s, n, 2048));
    double et = 0, ef = 0;
    for (std::size_t p = 0; p < exact.values.size(); ++p) {
      et = std::max(et, std::abs(trap.values[p] - exact.values[p]));
      ef = std::max(ef, std::abs(filon.values[p] - exact.values[p]));
    }
    std::ostringstream tag;
    tag << " s=" << s << " N=" << n;
    rec.add("trapezoid M=4096 vs analytic" + tag.str(), et <= 1e-5, "max abs error " + sci(et));
    rec.add("filon+richardson M=1024,2048 vs analytic" + tag.str(), ef <= 1e-5, "max abs error " + sci(ef));
  }
  const double t0 = symbol_1d_analytic(0.5, 0).values[0];
  const double e0 = std::abs(t0 - 4 / std::numbers::pi);
  rec.add("T_0(s=0.5) = 4/pi", e0 <= 1e-12, "abs error " + sci(e0));
  return rec.out;
}

std::vector<CheckResult> check_definiteness() {
  Recorder rec{"definiteness", {}};
  for (int d : {1, 2}) {
    for (double s : {0.1, 0.5, 0.9}) {
      double worst = INFINITY;
      const auto full = d == 1 ? symbol_1d_analytic(s, 6) : symbol_multi_d(2, s, 6, 2048);
      for (int n = 1; n <= 6; ++n) {
        auto sym = truncate_symbol(full, n);
        Eigen::MatrixXd a = dense_materialize(sym, n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
        worst = std::min(worst, eig.eigenvalues().minCoeff());
      }
      std::ostringstream name;
      name << "min eigenvalue of dense A_FD d=" << d << " s=" << s << " N=1..6";
      rec.add(name.str(), worst > 0, "min eigenvalue " + sci(worst));
    }
  }
  return rec.out;
}

std::vector<CheckResult> check_transfer(std::uint64_t seed, int cases) {
  Recorder rec{"transfer", {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0, 1);
  int bad_entries = 0, bad_rows = 0, bad_support = 0, bad_columns = 0, bad_eigen = 0, bad_oracle = 0;
  double worst_row = 0, worst_ratio = 0;
  for (int c = 0; c < cases; ++c) {
    const int d = c % 2 == 0 ? 1 : 2;
    auto mesh = random_mesh(d, rng, d == 1 ? 200 : 150);
    auto stats = mesh_stats(mesh);
    auto box = bounding_box(mesh);
    const double h = stats.a_h * (0.25 + 1.75 * unit(rng));
    Point center{0, 0, 0};
    double half = 0;
    for (int r = 0; r < d; ++r) {
      center[r] = 0.5 * (box.lo[r] + box.hi[r]) + (unit(rng) - 0.5) * h;
      half = std::max(half, 0.5 * (box.hi[r] - box.lo[r]) + h);
    }
    OverlayGrid grid(d, center, static_cast<int>(std::ceil(half / h)) + 1, h);
    auto tm = build_transfer(mesh, grid);
    PointLocator locator(mesh);
    const auto& rp = tm.row_ptr();
    const auto& col = tm.col_index();
    const auto& val = tm.values();
    std::vector<double> col_max(tm.cols(), 0.0);
    for (std::size_t r = 0; r < tm.rows(); ++r) {
      double sum = 0;
      for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
        if (!(val[k] >= 0 && val[k] <= 1)) ++bad_entries;
        sum += val[k];
        col_max[col[k]] = std::max(col_max[col[k]], val[k]);
      }
      const double dev = rp[r + 1] == rp[r] ? 0.0 : std::abs(sum - 1);
      worst_row = std::max(worst_row, dev);
      if (dev > 1e-12) ++bad_rows;
      if (rp[r + 1] > rp[r]) {
        auto loc = locator.locate(grid.node(r));
        if (!loc) {
          ++bad_support;
          continue;
        }
        auto el = mesh.element(loc->element);
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k)
          if (std::find(el.begin(), el.end(), col[k]) == el.end()) ++bad_support;
      }
    }
    const double upper = static_cast<double>(stats.n_val) * static_cast<double>(max_nodes_per_element(mesh, grid));
    const auto& cs = tm.column_sums();
    for (std::size_t j = 0; j < cs.size(); ++j)
      if (cs[j] < col_max[j] - 1e-12 || cs[j] > upper + 1e-12) ++bad_columns;
    // power iteration on T^T T
    std::vector<double> v(tm.cols(), 1.0), w;
    double lambda = 0;
    for (int it = 0; it < 300; ++it) {
      const double nv = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
      if (nv == 0) break;
      for (double& x : v) x /= nv;
      w = tm.apply_transpose(tm.apply(v));
      lambda = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
      v.swap(w);
    }
    worst_ratio = std::max(worst_ratio, lambda / upper);
    if (lambda > upper * (1 + 1e-12)) ++bad_eigen;
    auto oracle = build_transfer_by_location(mesh, grid);
    if (oracle.row_ptr() != rp || oracle.col_index() != col) {
      ++bad_oracle;
    } else {
      for (std::size_t k = 0; k < val.size(); ++k)
        if (std::abs(oracle.values()[k] - val[k]) > 1e-14) {
          ++bad_oracle;
          break;
        }
    }
  }
  const std::string n = " over " + std::to_string(cases) + " random mesh/grid pairs";
  rec.add("entries in [0,1]" + n, bad_entries == 0, std::to_string(bad_entries) + " violations");
  rec.add("row sums in {0,1}" + n, bad_rows == 0, "max deviation " + sci(worst_row));
  rec.add("row support inside one element" + n, bad_support == 0, std::to_string(bad_support) + " violations");
  rec.add("column sums within [max entry, N_val*N_FD^h]" + n, bad_columns == 0, std::to_string(bad_columns) + " violations");
  rec.add("lambda_max(T^T T) <= N_val*N_FD^h" + n, bad_eigen == 0, "max ratio " + sci(worst_ratio));
  rec.add("element sweep matches point location" + n, bad_oracle == 0, std::to_string(bad_oracle) + " mismatches");
  return rec.out;
}

std::vector<CheckResult> check_rank(std::uint64_t seed, int cases) {
  Recorder rec{"rank", {}};
  std::mt19937_64 rng(seed + 1);
  int deficient = 0;
  std::size_t largest = 0;
  std::string first;
  for (int c = 0; c < cases; ++c) {
    const int d = c % 2 == 0 ? 1 : 2;
    auto mesh = random_mesh(d, rng, 300);
    largest = std::max(largest, mesh.num_vertices());
    auto grid = build_overlay(mesh_stats(mesh), bounding_box(mesh), OverlayOptions{SpacingRule::strict, 1.1, false});
    auto tm = build_transfer(mesh, grid);
    const std::size_t rank = exact_rank(tm);
    if (rank != mesh.num_vertices()) {
      ++deficient;
      if (first.empty()) first = "; case " + std::to_string(c) + " rank " + std::to_string(rank) + " of " +
                                 std::to_string(mesh.num_vertices());
    }
  }
  rec.add("rank(I) = N_v with strict spacing over " + std::to_string(cases) + " random meshes",
          deficient == 0, std::to_string(deficient) + " rank deficient, largest N_v " + std::to_string(largest) + first);
  return rec.out;
}

std::vector<CheckResult> check_mmpde(std::uint64_t seed) {
  Recorder rec{"mmpde", {}};
  std::mt19937_64 rng(seed + 2);
  std::uniform_real_distribution<double> unit(0, 1);

  {
    auto mesh = generate_benchmark_mesh(MeshKind::interval, 32);
    auto moved = integrate_mmpde(mesh, identity_metric(mesh));
    double dev = 0;
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) dev = std::max(dev, std::abs(moved.mesh.vertex(i)[0] - mesh.vertex(i)[0]));
    rec.add("uniform 1D mesh is a fixed point of the identity metric", dev <= 1e-10 && !moved.stalled,
            "max displacement " + sci(dev));
  }

  auto sample_field = [&](const SimplicialMesh& mesh) {
    const double a = 1 + 4 * unit(rng), b = 2 * unit(rng) - 1;
    std::vector<double> u(mesh.num_vertices());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const auto& x = mesh.vertex(i);
      u[i] = std::exp(a * x[0]) + b * x[1] * x[1] - x[0] * x[2] + std::sin(3 * x[1]);
    }
    return metric_from_hessian(mesh, recover_hessian(mesh, u));
  };

  {
    double worst_fixed = 0, worst_moving = 0;
    for (int d : {1, 2, 3})
      for (int trial = 0; trial < 3; ++trial) {
        auto mesh = random_mesh(d, rng, d == 1 ? 12 : d == 2 ? 40 : 30);
        auto metric = sample_field(mesh);
        MetricInterpolant interp(mesh, metric);
        auto g_fixed = energy_gradient(mesh, metric);
        auto g_moving = energy_gradient(mesh, interp);
        const double step = 1e-6 * mesh_stats(mesh).h;
        double diff_f = 0, diff_m = 0, norm_f = 0, norm_m = 0;
        for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
          for (int r = 0; r < d; ++r) {
            auto xp = mesh.vertices(), xm = mesh.vertices();
            xp[i][r] += step;
            xm[i][r] -= step;
            auto mp = mesh.with_vertices(xp), mm = mesh.with_vertices(xm);
            const double fd_f = (mesh_energy(mp, metric) - mesh_energy(mm, metric)) / (2 * step);
            const double fd_m = (mesh_energy(mp, interp) - mesh_energy(mm, interp)) / (2 * step);
            diff_f = std::max(diff_f, std::abs(fd_f - g_fixed[i][r]));
            diff_m = std::max(diff_m, std::abs(fd_m - g_moving[i][r]));
            norm_f = std::max(norm_f, std::abs(g_fixed[i][r]));
            norm_m = std::max(norm_m, std::abs(g_moving[i][r]));
          }
        worst_fixed = std::max(worst_fixed, diff_f / norm_f);
        worst_moving = std::max(worst_moving, diff_m / norm_m);
      }
    rec.add("analytic vs finite-difference energy gradient, element metric", worst_fixed <= 1e-6,
            "max relative difference " + sci(worst_fixed));
    rec.add("analytic vs finite-difference energy gradient, interpolated metric", worst_moving <= 1e-6,
            "max relative difference " + sci(worst_moving));
  }

  {
    int not_spd = 0;
    for (int d : {1, 2, 3})
      for (int trial = 0; trial < 4; ++trial) {
        auto mesh = random_mesh(d, rng, 60);
        RecoveredHessian h{d, {}, std::vector<std::uint8_t>(mesh.num_elements(), 0)};
        std::normal_distribution<double> g(0, 1);
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
          SmallMatrix a(d, d);
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) a(i, j) = g(rng) * std::pow(10.0, 3 * unit(rng));
          h.tensors.push_back(0.5 * (a + a.transpose()));
        }
        auto metric = metric_from_hessian(mesh, h);
        for (const auto& m : metric.tensors) {
          Eigen::SelfAdjointEigenSolver<SmallMatrix> eig(m, Eigen::EigenvaluesOnly);
          if (!(eig.eigenvalues().minCoeff() > 0)) ++not_spd;
        }
        for (const auto& m : vertex_metrics(mesh, metric)) {
          Eigen::SelfAdjointEigenSolver<SmallMatrix> eig(m, Eigen::EigenvaluesOnly);
          if (!(eig.eigenvalues().minCoeff() > 0)) ++not_spd;
        }
      }
    rec.add("metric tensors SPD for random indefinite Hessians", not_spd == 0, std::to_string(not_spd) + " non-SPD tensors");
  }

  {
    int increases = 0, topology = 0, stalled = 0, moved_boundary = 0;
    double worst_rise = 0;
    for (int d : {1, 2}) {
      for (int trial = 0; trial < 2; ++trial) {
        auto mesh = random_mesh(d, rng, d == 1 ? 60 : 120);
        auto moved = integrate_mmpde(mesh, sample_field(mesh));
        stalled += moved.stalled;
        const auto& h = moved.energy_history;
        for (std::size_t k = 1; k < h.size(); ++k)
          if (h[k] > h[k - 1]) {
            ++increases;
            worst_rise = std::max(worst_rise, (h[k] - h[k - 1]) / std::abs(h[k - 1]));
          }
        if (moved.mesh.elements() != mesh.elements() || moved.mesh.boundary_flags() != mesh.boundary_flags() ||
            moved.mesh.num_vertices() != mesh.num_vertices())
          ++topology;
        for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
          if (mesh.is_boundary(i) && moved.mesh.vertex(i) != mesh.vertex(i)) ++moved_boundary;
      }
    }
    rec.add("energy non-increasing over accepted steps", increases == 0 && stalled == 0,
            std::to_string(increases) + " increases (max relative " + sci(worst_rise) + "), " + std::to_string(stalled) +
                " stalls");
    rec.add("connectivity and boundary preserved by mesh motion", topology == 0 && moved_boundary == 0,
            std::to_string(topology) + " topology changes, " + std::to_string(moved_boundary) + " boundary moves");
  }
  return rec.out;
}

const std::vector<std::string>& check_suite_names() {
  static const std::vector<std::string> names{"toeplitz", "symbol", "definiteness", "transfer", "rank", "mmpde"};
  return names;
}

std::vector<CheckResult> run_checks(const std::string& suite, std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto append = [&](std::vector<CheckResult> r) { out.insert(out.end(), r.begin(), r.end()); };
  const bool all = suite == "all";
  if (!all && std::find(check_suite_names().begin(), check_suite_names().end(), suite) == check_suite_names().end())
    fail(ErrorCode::InvalidParameter, "unknown check suite '" + suite + "'");
  if (all || suite == "toeplitz") append(check_toeplitz(seed));
  if (all || suite == "symbol") append(check_symbol());
  if (all || suite == "definiteness") append(check_definiteness());
  if (all || suite == "transfer") append(check_transfer(seed));
  if (all || suite == "rank") append(check_rank(seed));
  if (all || suite == "mmpde") append(check_mmpde(seed));
  return out;
}

}  // namespace gofd
