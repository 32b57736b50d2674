#include "scale_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace scaleevo {

OperatorMatrix OperatorMatrix::from_triplets(std::vector<Triplet> triplets, std::size_t cols,
                                             std::optional<int> bandwidth) {
  for (const auto& t : triplets) {
    if (!std::isfinite(t.value)) fail(ErrorCode::InvalidInput, "operator matrix: non-finite entry");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  OperatorMatrix m;
  m.bandwidth_ = bandwidth;
  std::size_t ncols = cols;
  for (const auto& t : triplets) ncols = std::max(ncols, t.col + 1);
  m.col_ptr_.assign(ncols + 1, 0);
  std::size_t i = 0;
  for (std::size_t k = 0; k < ncols; ++k) {
    m.col_ptr_[k] = m.entries_.size();
    while (i < triplets.size() && triplets[i].col == k) {
      const std::size_t row = triplets[i].row;
      double v = 0.0;
      while (i < triplets.size() && triplets[i].col == k && triplets[i].row == row) v += triplets[i++].value;
      if (v != 0.0) {
        m.entries_.push_back({row, v});
        m.rows_ = std::max(m.rows_, row + 1);
      }
    }
  }
  m.col_ptr_[ncols] = m.entries_.size();
  return m;
}

OperatorMatrix OperatorMatrix::identity(std::size_t n, double scale) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, scale});
  return from_triplets(std::move(t), n, 0);
}

OperatorMatrix OperatorMatrix::diagonal(std::span<const double> d) {
  std::vector<Triplet> t;
  t.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
  return from_triplets(std::move(t), d.size(), 0);
}

std::span<const OperatorMatrix::Entry> OperatorMatrix::column(std::size_t k) const {
  if (k + 1 >= col_ptr_.size()) return {};
  return std::span<const Entry>(entries_.data() + col_ptr_[k], col_ptr_[k + 1] - col_ptr_[k]);
}

bool OperatorMatrix::is_diagonal() const noexcept {
  for (std::size_t k = 0; k < cols(); ++k) {
    for (const auto& e : column(k)) {
      if (e.row != k) return false;
    }
  }
  return true;
}

std::vector<double> OperatorMatrix::diagonal_entries(std::size_t n) const {
  std::vector<double> d(n, 0.0);
  for (std::size_t k = 0; k < std::min(n, cols()); ++k) {
    for (const auto& e : column(k)) {
      if (e.row == k) d[k] = e.value;
    }
  }
  return d;
}

std::vector<Triplet> OperatorMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(entries_.size());
  for (std::size_t k = 0; k < cols(); ++k) {
    for (const auto& e : column(k)) out.push_back({e.row, k, e.value});
  }
  return out;
}

OperatorMatrix OperatorMatrix::truncated(std::size_t n) const {
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < std::min(n, cols()); ++k) {
    for (const auto& e : column(k)) {
      if (e.row < n) t.push_back({e.row, k, e.value});
    }
  }
  return from_triplets(std::move(t), std::min(n, cols()), bandwidth_);
}

OperatorMatrix OperatorMatrix::transposed() const {
  auto t = triplets();
  for (auto& x : t) std::swap(x.row, x.col);
  return from_triplets(std::move(t), rows_, bandwidth_);
}

OperatorMatrix OperatorMatrix::adjoint(const Grading& grading) const {
  auto t = triplets();
  for (auto& x : t) {
    // entry b_{nk} moves to position (k, n) with factor w_n / w_k
    const double factor = grading.measure(x.row) / grading.measure(x.col);
    std::swap(x.row, x.col);
    x.value *= factor;
  }
  return from_triplets(std::move(t), rows_, bandwidth_);
}

OperatorMatrix OperatorMatrix::scaled(double factor) const {
  auto t = triplets();
  for (auto& x : t) x.value *= factor;
  return from_triplets(std::move(t), cols(), bandwidth_);
}

void OperatorMatrix::multiply_add(std::span<const double> u, std::span<double> out, double factor) const {
  const std::size_t n = std::min(u.size(), cols());
  for (std::size_t k = 0; k < n; ++k) {
    const double uk = u[k];
    if (uk == 0.0) continue;
    const double s = factor * uk;
    for (const auto& e : column(k)) {
      if (e.row >= out.size()) fail(ErrorCode::Internal, "operator output exceeds working dimension");
      out[e.row] += e.value * s;
    }
  }
}

nlohmann::ordered_json OperatorMatrix::to_json() const {
  nlohmann::ordered_json j;
  j["rows"] = rows_;
  j["cols"] = cols();
  j["nnz"] = nnz();
  if (bandwidth_) j["bandwidth"] = *bandwidth_;
  return j;
}

OperatorMatrix linear_combination(const OperatorMatrix& a, double wa, const OperatorMatrix& b, double wb) {
  auto ta = a.triplets();
  for (auto& x : ta) x.value *= wa;
  for (auto x : b.triplets()) {
    x.value *= wb;
    ta.push_back(x);
  }
  std::optional<int> band;
  if (a.bandwidth() && b.bandwidth()) band = std::max(*a.bandwidth(), *b.bandwidth());
  return OperatorMatrix::from_triplets(std::move(ta), std::max(a.cols(), b.cols()), band);
}

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) { return linear_combination(a, 1.0, b, 1.0); }
OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) { return linear_combination(a, 1.0, b, -1.0); }

OperatorMatrix compose(const OperatorMatrix& a, const OperatorMatrix& b) {
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < b.cols(); ++k) {
    for (const auto& eb : b.column(k)) {
      for (const auto& ea : a.column(eb.row)) t.push_back({ea.row, k, ea.value * eb.value});
    }
  }
  return OperatorMatrix::from_triplets(std::move(t), b.cols());
}

double weighted_column_sup(const OperatorMatrix& b, double alpha_in, double alpha_out, const Grading& grading) {
  if (!std::isfinite(alpha_in) || !std::isfinite(alpha_out)) fail(ErrorCode::InvalidInput, "operator norm: non-finite alpha");
  double best = 0.0;
  std::vector<double> logs;
  for (std::size_t k = 0; k < b.cols(); ++k) {
    const auto col = b.column(k);
    if (col.empty()) continue;
    const double log_in = std::log(grading.measure(k)) + alpha_in * grading.level(k);
    logs.clear();
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& e : col) {
      const double l = std::log(std::abs(e.value)) + std::log(grading.measure(e.row)) +
                       alpha_out * grading.level(e.row) - log_in;
      logs.push_back(l);
      top = std::max(top, l);
    }
    double sum = 0.0;
    for (double l : logs) sum += std::exp(l - top);
    const double value = std::exp(top + std::log(sum));
    best = std::max(best, value);
  }
  if (!std::isfinite(best)) fail(ErrorCode::RangeOverflow, "operator norm overflows");
  return best;
}

double operator_norm(const OperatorMatrix& b, double alpha, double alpha_prime, const Grading& grading) {
  if (!(alpha_prime < alpha)) fail(ErrorCode::InvalidScalePair, "operator norm requires alpha' < alpha");
  return weighted_column_sup(b, alpha, alpha_prime, grading);
}

ScaleVector apply(const OperatorMatrix& b, const ScaleVector& u, std::optional<double> tail_cap,
                  const Grading& grading) {
  const auto entries = u.entries();
  std::size_t reach = 0;
  for (std::size_t k = 0; k < std::min(entries.size(), b.cols()); ++k) {
    if (entries[k] == 0.0) continue;
    const auto col = b.column(k);
    if (!col.empty()) reach = std::max(reach, col.back().row + 1);
  }
  std::vector<double> out(reach, 0.0);
  b.multiply_add(entries, out);
  double tail = 0.0;
  if (u.tail_bound() > 0.0) {
    const double cap = tail_cap ? *tail_cap : weighted_column_sup(b, u.tail_alpha(), u.tail_alpha(), grading);
    if (cap < 0.0) fail(ErrorCode::InvalidInput, "apply: negative column-norm cap");
    tail = u.tail_bound() * cap;
  }
  return ScaleVector(std::move(out), u.tail_alpha(), tail);
}

OperatorFamily::OperatorFamily(OperatorMatrix constant) : times_{0.0}, members_{std::move(constant)} {}

OperatorFamily::OperatorFamily(std::vector<double> times, std::vector<OperatorMatrix> members, Interpolation kind)
    : times_(std::move(times)), members_(std::move(members)), kind_(kind) {
  if (times_.size() != members_.size() || members_.empty()) {
    fail(ErrorCode::InvalidInput, "operator family: times and members must be nonempty and of equal length");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) fail(ErrorCode::InvalidInput, "operator family: knot times must increase");
  }
}

bool OperatorFamily::is_zero() const noexcept {
  return std::all_of(members_.begin(), members_.end(), [](const OperatorMatrix& m) { return m.is_zero(); });
}

std::size_t OperatorFamily::rows() const noexcept {
  std::size_t r = 0;
  for (const auto& m : members_) r = std::max(r, m.rows());
  return r;
}

std::size_t OperatorFamily::cols() const noexcept {
  std::size_t c = 0;
  for (const auto& m : members_) c = std::max(c, m.cols());
  return c;
}

std::pair<std::size_t, double> OperatorFamily::locate(double t) const {
  const std::size_t n = members_.size();
  if (n <= 1) return {0, 0.0};
  if (kind_ == Interpolation::PiecewiseConstant) {
    std::size_t idx = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (right_closed_ ? times_[i] < t : times_[i] <= t) idx = i;
    }
    return {idx, 0.0};
  }
  if (t <= times_.front()) return {0, 0.0};
  if (t >= times_.back()) return {n - 1, 0.0};
  std::size_t i = 0;
  while (times_[i + 1] <= t) ++i;
  return {i, (t - times_[i]) / (times_[i + 1] - times_[i])};
}

OperatorMatrix OperatorFamily::at(double t) const {
  if (members_.empty()) return {};
  const auto [i, theta] = locate(t);
  if (theta == 0.0) return members_[i];
  return linear_combination(members_[i], 1.0 - theta, members_[i + 1], theta);
}

void OperatorFamily::multiply_add(double t, std::span<const double> u, std::span<double> out, double factor) const {
  if (members_.empty()) return;
  const auto [i, theta] = locate(t);
  if (theta == 0.0) {
    members_[i].multiply_add(u, out, factor);
    return;
  }
  members_[i].multiply_add(u, out, factor * (1.0 - theta));
  members_[i + 1].multiply_add(u, out, factor * theta);
}

OperatorFamily OperatorFamily::truncated(std::size_t n) const {
  OperatorFamily f = *this;
  for (auto& m : f.members_) m = m.truncated(n);
  return f;
}

OperatorFamily OperatorFamily::adjoint(const Grading& grading) const {
  OperatorFamily f = *this;
  for (auto& m : f.members_) m = m.adjoint(grading);
  return f;
}

OperatorFamily OperatorFamily::scaled(double factor) const {
  OperatorFamily f = *this;
  for (auto& m : f.members_) m = m.scaled(factor);
  return f;
}

OperatorFamily OperatorFamily::reversed(double pivot) const {
  OperatorFamily f = *this;
  const std::size_t n = members_.size();
  if (n <= 1) return f;
  std::reverse(f.members_.begin(), f.members_.end());
  if (kind_ == Interpolation::Linear) {
    for (std::size_t j = 0; j < n; ++j) f.times_[j] = pivot - times_[n - 1 - j];
    return f;
  }
  // Breakpoints t_1..t_{n-1} map to pivot - t_{n-j}; the half-open side flips.
  for (std::size_t j = 1; j < n; ++j) f.times_[j] = pivot - times_[n - j];
  f.times_[0] = f.times_[1] - 1.0;
  f.right_closed_ = !right_closed_;
  return f;
}

OperatorFamily operator-(const OperatorFamily& a, const OperatorFamily& b) {
  if (a.is_constant() && b.is_constant()) {
    return OperatorFamily(a.at(0.0) - b.at(0.0));
  }
  // Sample both on the union of knots; exact for linear families sharing knots.
  std::vector<double> times = a.times();
  times.insert(times.end(), b.times().begin(), b.times().end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::vector<OperatorMatrix> members;
  for (double t : times) members.push_back(a.at(t) - b.at(t));
  const auto kind = (a.interpolation() == Interpolation::Linear || b.interpolation() == Interpolation::Linear)
                        ? Interpolation::Linear
                        : Interpolation::PiecewiseConstant;
  return OperatorFamily(std::move(times), std::move(members), kind);
}

MajorantM::MajorantM(double alpha_star, std::vector<std::pair<double, double>> knots, double safety)
    : alpha_star_(alpha_star), knots_(std::move(knots)), safety_(safety) {
  if (!(safety_ >= 1.0)) fail(ErrorCode::InvalidInput, "majorant: safety factor must be >= 1");
  if (knots_.empty()) fail(ErrorCode::InvalidInput, "majorant: no knots");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!(knots_[i].second >= 0.0)) fail(ErrorCode::InvalidInput, "majorant: negative knot value");
    if (i > 0 && (!(knots_[i].first > knots_[i - 1].first) || knots_[i].second < knots_[i - 1].second)) {
      fail(ErrorCode::InvalidInput, "majorant: knots must be increasing in alpha and nondecreasing in value");
    }
  }
}

double MajorantM::max_alpha() const { return knots_.back().first; }

double MajorantM::operator()(double alpha) const {
  if (!(alpha > alpha_star_)) fail(ErrorCode::InvalidScalePair, "majorant evaluated at or below alpha_*");
  if (alpha > knots_.back().first * (1.0 + 1e-14) + 1e-14) {
    fail(ErrorCode::InvalidInput, "majorant evaluated beyond its tabulated range");
  }
  if (alpha <= knots_.front().first) return safety_ * knots_.front().second;
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (alpha <= knots_[i].first) {
      const auto& [a0, m0] = knots_[i - 1];
      const auto& [a1, m1] = knots_[i];
      const double theta = (alpha - a0) / (a1 - a0);
      return safety_ * (m0 + theta * (m1 - m0));
    }
  }
  return safety_ * knots_.back().second;
}

double MajorantM::sup() const { return safety_ * knots_.back().second; }

bool MajorantM::is_zero() const noexcept { return knots_.empty() || knots_.back().second == 0.0; }

nlohmann::ordered_json MajorantM::to_json() const {
  nlohmann::ordered_json j;
  j["alpha_star"] = alpha_star_;
  j["safety"] = safety_;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [a, m] : knots_) arr.push_back({a, m});
  j["knots"] = arr;
  return j;
}

namespace {

std::vector<double> raw_majorant(const OperatorMatrix& b, double alpha_star, const std::vector<double>& grid,
                                 const Grading& grading) {
  std::vector<double> raw(grid.size(), 0.0);
  if (b.is_zero()) return raw;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double best = (grid[i] - alpha_star) * weighted_column_sup(b, grid[i], alpha_star, grading);
    for (std::size_t j = 0; j < i; ++j) {
      best = std::max(best, (grid[i] - grid[j]) * weighted_column_sup(b, grid[i], grid[j], grading));
    }
    raw[i] = best;
  }
  return raw;
}

void check_grid(double alpha_star, const std::vector<double>& grid) {
  if (grid.empty()) fail(ErrorCode::InvalidInput, "majorant fit: empty alpha grid");
  if (!std::isfinite(alpha_star)) fail(ErrorCode::InvalidInput, "majorant fit: alpha_* must be finite");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > alpha_star)) fail(ErrorCode::InvalidInput, "majorant fit: grid points must exceed alpha_*");
    if (i > 0 && !(grid[i] > grid[i - 1])) fail(ErrorCode::InvalidInput, "majorant fit: grid must be strictly increasing");
  }
}

MajorantM finish(double alpha_star, const std::vector<double>& grid, std::vector<double> raw, double safety) {
  std::vector<std::pair<double, double>> knots;
  double running = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    running = std::max(running, raw[i]);
    knots.emplace_back(grid[i], running);
  }
  return MajorantM(alpha_star, std::move(knots), safety);
}

}  // namespace

MajorantM fit_majorant(const OperatorMatrix& b, double alpha_star, const std::vector<double>& alpha_grid, double safety,
                       const Grading& grading) {
  check_grid(alpha_star, alpha_grid);
  return finish(alpha_star, alpha_grid, raw_majorant(b, alpha_star, alpha_grid, grading), safety);
}

MajorantM fit_majorant(const OperatorFamily& b, double alpha_star, const std::vector<double>& alpha_grid, double safety,
                       const Grading& grading) {
  check_grid(alpha_star, alpha_grid);
  std::vector<double> raw(alpha_grid.size(), 0.0);
  // Convex combinations of members never exceed the largest member norm.
  for (const auto& m : b.members()) {
    const auto r = raw_majorant(m, alpha_star, alpha_grid, grading);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = std::max(raw[i], r[i]);
  }
  return finish(alpha_star, alpha_grid, std::move(raw), safety);
}

std::vector<double> merge_grid(std::vector<double> grid, std::initializer_list<double> extra, double lo, double hi,
                               int fill) {
  grid.insert(grid.end(), extra.begin(), extra.end());
  for (int i = 1; i <= fill; ++i) grid.push_back(lo + (hi - lo) * i / fill);
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  for (double g : grid) {
    if (!(g > lo)) continue;
    if (!out.empty() && std::abs(g - out.back()) <= 1e-12 * (1.0 + std::abs(g))) {
      out.back() = std::max(out.back(), g);
      continue;
    }
    out.push_back(g);
  }
  return out;
}

}  // namespace scaleevo
