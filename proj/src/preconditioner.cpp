#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gofd/error.hpp"
#include "gofd/solver.hpp"

namespace gofd {

const char* to_string(StencilPattern p) {
  switch (p) {
    case StencilPattern::none: return "none";
    case StencilPattern::stencil3: return "stencil3";
    case StencilPattern::stencil5: return "stencil5";
    case StencilPattern::stencil9: return "stencil9";
    case StencilPattern::stencil7: return "stencil7";
    case StencilPattern::stencil27: return "stencil27";
  }
  return "?";
}

StencilPattern parse_stencil_pattern(const std::string& name) {
  if (name == "none") return StencilPattern::none;
  if (name == "stencil3") return StencilPattern::stencil3;
  if (name == "stencil5") return StencilPattern::stencil5;
  if (name == "stencil9") return StencilPattern::stencil9;
  if (name == "stencil7") return StencilPattern::stencil7;
  if (name == "stencil27") return StencilPattern::stencil27;
  fail(ErrorCode::InvalidParameter, "unknown preconditioner pattern '" + name + "'");
}

StencilPattern default_pattern(int dim) {
  return dim == 1 ? StencilPattern::stencil3 : dim == 2 ? StencilPattern::stencil9 : StencilPattern::stencil27;
}

int pattern_dim(StencilPattern p) {
  switch (p) {
    case StencilPattern::stencil3: return 1;
    case StencilPattern::stencil5:
    case StencilPattern::stencil9: return 2;
    case StencilPattern::stencil7:
    case StencilPattern::stencil27: return 3;
    case StencilPattern::none: return 0;
  }
  return 0;
}

SparseMatrix extract_sparse_pattern(const SymbolCoefficients& symbol, const OverlayGrid& grid, StencilPattern pattern) {
  const int d = grid.dim();
  if (pattern_dim(pattern) != d) fail(ErrorCode::ParameterMismatch, "stencil pattern does not match the grid dimension");
  if (symbol.dim != d || symbol.n < 1) fail(ErrorCode::ParameterMismatch, "symbol does not match the grid");
  const bool cross = pattern == StencilPattern::stencil5 || pattern == StencilPattern::stencil7;
  std::vector<MultiIndex> offsets;
  for (int a = -1; a <= 1; ++a)
    for (int b = (d > 1 ? -1 : 0); b <= (d > 1 ? 1 : 0); ++b)
      for (int c = (d > 2 ? -1 : 0); c <= (d > 2 ? 1 : 0); ++c) {
        if (cross && std::abs(a) + std::abs(b) + std::abs(c) > 1) continue;
        offsets.push_back({a, b, c});
      }
  const int n = grid.n();
  const std::size_t nn = grid.num_nodes();
  std::vector<Eigen::Triplet<double, int>> trip;
  trip.reserve(nn * offsets.size());
  for (std::size_t k = 0; k < nn; ++k) {
    auto m = grid.multi_index(k);
    for (const auto& o : offsets) {
      MultiIndex q{m[0] + o[0], m[1] + o[1], m[2] + o[2]};
      bool inside = true;
      for (int r = 0; r < d; ++r) inside = inside && q[r] >= -n && q[r] <= n;
      if (inside)
        trip.emplace_back(static_cast<int>(k), static_cast<int>(grid.linear_index(q)), symbol.at(o));
    }
  }
  SparseMatrix a(static_cast<int>(nn), static_cast<int>(nn));
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

std::vector<std::vector<int>> level_fill_pattern(const SparseMatrix& a, int level) {
  const int n = static_cast<int>(a.rows());
  constexpr int kNone = std::numeric_limits<int>::max();
  std::vector<std::vector<std::pair<int, int>>> upper(n);
  std::vector<std::vector<int>> lower(n);
  std::vector<int> lev(n, kNone);
  std::vector<int> touched;
  for (int i = 0; i < n; ++i) {
    std::set<int> queue;
    touched.clear();
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
      int j = it.col();
      if (lev[j] == kNone) touched.push_back(j);
      lev[j] = 0;
      if (j < i) queue.insert(j);
    }
    if (lev[i] == kNone) {
      touched.push_back(i);
      lev[i] = 0;
    }
    while (!queue.empty()) {
      int j = *queue.begin();
      queue.erase(queue.begin());
      for (auto [k, ljk] : upper[j]) {
        int nl = lev[j] + ljk + 1;
        if (nl > level) continue;
        if (lev[k] == kNone) {
          touched.push_back(k);
          if (k < i) queue.insert(k);
        }
        lev[k] = std::min(lev[k], nl);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int k : touched) {
      if (k < i) lower[i].push_back(k);
      else if (k > i) upper[i].emplace_back(k, lev[k]);
      lev[k] = kNone;
    }
    lower[i].push_back(i);
  }
  return lower;
}

namespace {

bool factorize(const SparseMatrix& a, const std::vector<std::vector<int>>& pattern, double shift,
               IncompleteCholesky& f) {
  const int n = static_cast<int>(a.rows());
  f.row_ptr.assign(1, 0);
  f.col.clear();
  f.val.clear();
  std::vector<double> w(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto& p = pattern[i];
    for (SparseMatrix::InnerIterator it(a, i); it; ++it)
      if (it.col() <= i) w[it.col()] = it.value();
    w[i] *= 1.0 + shift;
    const std::size_t start = f.col.size();
    double diag = w[i];
    for (int j : p) {
      if (j == i) break;
      double sum = w[j];
      // row j of L: entries k < j sit before its diagonal
      for (std::size_t q = f.row_ptr[j]; q + 1 < f.row_ptr[j + 1]; ++q) sum -= w[f.col[q]] * f.val[q];
      double lij = sum / f.val[f.row_ptr[j + 1] - 1];
      w[j] = lij;
      diag -= lij * lij;
      f.col.push_back(j);
      f.val.push_back(lij);
    }
    // w now holds L_ik for k in the pattern; clear before the next row
    for (int j : p) w[j] = 0.0;
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) w[it.col()] = 0.0;
    if (!(diag > 0) || !std::isfinite(diag)) return false;
    f.col.push_back(i);
    f.val.push_back(std::sqrt(diag));
    f.row_ptr.push_back(f.col.size());
    (void)start;
  }
  return true;
}

}  // namespace

IncompleteCholesky incomplete_cholesky(const SparseMatrix& a, int level, double initial_shift, int max_shifts) {
  if (a.rows() != a.cols()) fail(ErrorCode::ParameterMismatch, "incomplete Cholesky needs a square matrix");
  auto pattern = level_fill_pattern(a, level);
  IncompleteCholesky f;
  double shift = 0;
  for (int attempt = 0; attempt <= max_shifts; ++attempt) {
    f.attempts = attempt + 1;
    if (factorize(a, pattern, shift, f)) {
      f.shift = shift;
      return f;
    }
    shift = attempt == 0 ? initial_shift : 2 * shift;
  }
  fail(ErrorCode::PreconditionerFailure,
       "incomplete Cholesky broke down after " + std::to_string(max_shifts) + " diagonal shifts");
}

void IncompleteCholesky::solve_in_place(std::span<double> v) const {
  const std::size_t n = size();
  if (v.size() != n) fail(ErrorCode::ParameterMismatch, "preconditioner length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    double s = v[i];
    const std::size_t end = row_ptr[i + 1] - 1;
    for (std::size_t q = row_ptr[i]; q < end; ++q) s -= val[q] * v[col[q]];
    v[i] = s / val[end];
  }
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t end = row_ptr[i + 1] - 1;
    v[i] /= val[end];
    const double vi = v[i];
    for (std::size_t q = row_ptr[i]; q < end; ++q) v[col[q]] -= val[q] * vi;
  }
}

std::vector<double> SparsePreconditioner::apply(std::span<const double> r) const {
  std::vector<double> z(r.begin(), r.end());
  factor.solve_in_place(z);
  return z;
}

SparseMatrix to_sparse(const TransferMatrix& tm) {
  SparseMatrix m(static_cast<int>(tm.rows()), static_cast<int>(tm.cols()));
  std::vector<Eigen::Triplet<double, int>> trip;
  trip.reserve(tm.nonzeros());
  for (std::size_t r = 0; r < tm.rows(); ++r)
    for (std::size_t k = tm.row_ptr()[r]; k < tm.row_ptr()[r + 1]; ++k)
      trip.emplace_back(static_cast<int>(r), tm.col_index()[k], tm.values()[k]);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparsePreconditioner build_preconditioner(const SparseMatrix& a_pattern, const TransferMatrix& transfer_interior,
                                          StencilPattern pattern) {
  if (static_cast<std::size_t>(a_pattern.rows()) != transfer_interior.rows())
    fail(ErrorCode::ParameterMismatch, "pattern matrix and transfer sizes differ");
  SparsePreconditioner pc;
  pc.pattern = pattern;
  SparseMatrix i = to_sparse(transfer_interior);
  SparseMatrix it = i.transpose();
  SparseMatrix ai = a_pattern * i;
  pc.reduced = (it * ai).pruned();
  pc.factor = incomplete_cholesky(pc.reduced, 1);
  return pc;
}

}  // namespace gofd
