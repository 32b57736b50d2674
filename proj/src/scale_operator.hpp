#pragma once

// Column-sparse infinite matrices acting on a scale of weighted sequence spaces, their
// exact weighted operator norms, time-dependent families, and the fitted majorant M(alpha)
// bounding (alpha - alpha') * ||B||_{alpha -> alpha'}.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "scale_space.hpp"

namespace scaleevo {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

class OperatorMatrix {
 public:
  struct Entry {
    std::size_t row;
    double value;
  };

  OperatorMatrix() = default;

  // Duplicate (row, col) pairs are summed; exact zeros are dropped. `cols` widens the
  // column range beyond the largest stored column.
  static OperatorMatrix from_triplets(std::vector<Triplet> triplets, std::size_t cols = 0,
                                      std::optional<int> bandwidth = std::nullopt);
  static OperatorMatrix identity(std::size_t n, double scale = 1.0);
  static OperatorMatrix diagonal(std::span<const double> d);

  std::size_t cols() const noexcept { return col_ptr_.empty() ? 0 : col_ptr_.size() - 1; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  std::optional<int> bandwidth() const noexcept { return bandwidth_; }
  std::span<const Entry> column(std::size_t k) const;

  bool is_zero() const noexcept { return entries_.empty(); }
  bool is_diagonal() const noexcept;
  // Diagonal entries 0..n-1 (zero where absent).
  std::vector<double> diagonal_entries(std::size_t n) const;

  // Restriction to rows and columns below n.
  OperatorMatrix truncated(std::size_t n) const;
  OperatorMatrix transposed() const;
  // Adjoint with respect to the measure pairing: b*_{kn} = w_n b_{nk} / w_k.
  OperatorMatrix adjoint(const Grading& grading = {}) const;
  OperatorMatrix scaled(double factor) const;
  std::vector<Triplet> triplets() const;

  // out += factor * B u; every row reached from the support of u must fit in out.
  void multiply_add(std::span<const double> u, std::span<double> out, double factor = 1.0) const;

  nlohmann::ordered_json to_json() const;

 private:
  std::vector<std::size_t> col_ptr_;
  std::vector<Entry> entries_;
  std::size_t rows_ = 0;
  std::optional<int> bandwidth_;
};

OperatorMatrix linear_combination(const OperatorMatrix& a, double wa, const OperatorMatrix& b, double wb);
OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b);
// Matrix product a * b.
OperatorMatrix compose(const OperatorMatrix& a, const OperatorMatrix& b);

// Weighted column supremum sup_k sum_n |b_nk| w_n e^{alpha_out l_n} / (w_k e^{alpha_in l_k}),
// evaluated in log space. No ordering is imposed on the two exponents.
double weighted_column_sup(const OperatorMatrix& b, double alpha_in, double alpha_out, const Grading& grading = {});

// ||B||_{L(E_alpha, E_alpha_prime)}; requires alpha_prime < alpha.
double operator_norm(const OperatorMatrix& b, double alpha, double alpha_prime, const Grading& grading = {});

// Exact column combination. The tail certificate of u is carried as tail_bound * cap, where
// cap bounds the weighted column norms at u.tail_alpha; by default the stored-column
// supremum is used.
ScaleVector apply(const OperatorMatrix& b, const ScaleVector& u, std::optional<double> tail_cap = std::nullopt,
                  const Grading& grading = {});

enum class Interpolation { PiecewiseConstant, Linear };

// Time-dependent operator B(t). Piecewise-constant families hold member i on
// [t_i, t_{i+1}); linear families interpolate between knots. Both extend constantly
// outside the knot range.
class OperatorFamily {
 public:
  OperatorFamily() = default;
  OperatorFamily(OperatorMatrix constant);  // NOLINT(google-explicit-constructor)
  OperatorFamily(std::vector<double> times, std::vector<OperatorMatrix> members, Interpolation kind);

  bool is_constant() const noexcept { return members_.size() <= 1; }
  bool is_zero() const noexcept;
  OperatorMatrix at(double t) const;
  // out += factor * B(t) u without materializing the interpolated matrix.
  void multiply_add(double t, std::span<const double> u, std::span<double> out, double factor = 1.0) const;

  const std::vector<OperatorMatrix>& members() const noexcept { return members_; }
  const std::vector<double>& times() const noexcept { return times_; }
  Interpolation interpolation() const noexcept { return kind_; }
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  OperatorFamily truncated(std::size_t n) const;
  OperatorFamily adjoint(const Grading& grading = {}) const;
  OperatorFamily scaled(double factor) const;
  // sigma -> B(pivot - sigma).
  OperatorFamily reversed(double pivot) const;

 private:
  std::pair<std::size_t, double> locate(double t) const;

  std::vector<double> times_;
  std::vector<OperatorMatrix> members_;
  Interpolation kind_ = Interpolation::PiecewiseConstant;
  bool right_closed_ = false;
};

OperatorFamily operator-(const OperatorFamily& a, const OperatorFamily& b);

class MajorantM {
 public:
  MajorantM() = default;
  MajorantM(double alpha_star, std::vector<std::pair<double, double>> knots, double safety);

  double alpha_star() const noexcept { return alpha_star_; }
  double safety() const noexcept { return safety_; }
  const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }
  double max_alpha() const;

  // Interpolated knot value times safety; alpha beyond the last knot is rejected.
  double operator()(double alpha) const;
  // Largest value on the tabulated domain.
  double sup() const;
  bool is_zero() const noexcept;

  nlohmann::ordered_json to_json() const;

 private:
  double alpha_star_ = 0.0;
  std::vector<std::pair<double, double>> knots_;
  double safety_ = 1.0;
};

MajorantM fit_majorant(const OperatorMatrix& b, double alpha_star, const std::vector<double>& alpha_grid,
                       double safety = 1.1, const Grading& grading = {});
MajorantM fit_majorant(const OperatorFamily& b, double alpha_star, const std::vector<double>& alpha_grid,
                       double safety = 1.1, const Grading& grading = {});

// Sorted, deduplicated union of a grid with extra points and a uniform fill of (lo, hi].
std::vector<double> merge_grid(std::vector<double> grid, std::initializer_list<double> extra, double lo, double hi,
                               int fill);

}  // namespace scaleevo
