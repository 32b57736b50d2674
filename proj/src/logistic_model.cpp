#include "logistic_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "errors.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace scaleevo {

namespace {

constexpr std::size_t kChunk = 256;
constexpr int kMaxSubsetSize = 24;

std::size_t periodic_diff(std::size_t x, std::size_t y, std::size_t cells) { return (x + cells - y) % cells; }

// sum_i sum_{j != i} a(x_i - x_j)
double pair_sum(std::span<const std::size_t> x, const std::vector<double>& a, std::size_t cells) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (i != j) s += a[periodic_diff(x[i], x[j], cells)];
    }
  }
  return s;
}

// sum_{j != i} a(x_i - x_j)
double partner_sum(std::span<const std::size_t> x, std::size_t i, const std::vector<double>& a, std::size_t cells) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j != i) s += a[periodic_diff(x[i], x[j], cells)];
  }
  return s;
}

// sum_i a(x_i - y)
double point_sum(std::span<const std::size_t> x, std::size_t y, const std::vector<double>& a, std::size_t cells) {
  double s = 0.0;
  for (std::size_t xi : x) s += a[periodic_diff(xi, y, cells)];
  return s;
}

std::vector<std::size_t> removed(std::span<const std::size_t> x, std::size_t i) {
  std::vector<std::size_t> out;
  out.reserve(x.size() - 1);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j != i) out.push_back(x[j]);
  }
  return out;
}

std::vector<std::size_t> inserted(std::span<const std::size_t> x, std::size_t pos, std::size_t y) {
  std::vector<std::size_t> out(x.begin(), x.end());
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), y);
  return out;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Runs body(n, local, tuple, out) over every tuple of every level in fixed-size chunks and
// concatenates the per-chunk triplets in index order.
std::vector<Triplet> collect_rows(
    const HierarchyLayout& layout,
    const std::function<void(int, std::span<const std::size_t>, std::size_t, std::vector<Triplet>&)>& body) {
  struct Task {
    int n;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Task> tasks;
  for (int n = 0; n <= layout.n_max(); ++n) {
    for (std::size_t b = 0; b < layout.level_size(n); b += kChunk) {
      tasks.push_back({n, b, std::min(layout.level_size(n), b + kChunk)});
    }
  }
  std::vector<std::vector<Triplet>> parts(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t t) {
    const auto& task = tasks[t];
    std::vector<std::size_t> tuple(static_cast<std::size_t>(task.n));
    for (std::size_t local = task.begin; local < task.end; ++local) {
      layout.decode(task.n, local, tuple);
      body(task.n, tuple, layout.offset(task.n) + local, parts[t]);
    }
  });
  std::vector<Triplet> all;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  all.reserve(total);
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

void check_layout(const LogisticParams& p, const Hierarchy& h) {
  if (h.cells != p.cells || h.spacing != p.spacing) {
    fail(ErrorCode::InvalidInput, "hierarchy grid does not match the model grid");
  }
  if (h.n_max() < 0) fail(ErrorCode::InvalidInput, "hierarchy has no components");
}

}  // namespace

std::vector<double> symmetrize_kernel(std::vector<double> a) {
  const std::size_t n = a.size();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = 0.5 * (a[j] + a[(n - j) % n]);
  return out;
}

std::vector<double> named_kernel(const std::string& name, std::size_t cells, double spacing, double amplitude,
                                 double width) {
  if (cells == 0) fail(ErrorCode::InvalidInput, "kernel needs at least one cell");
  if (!(amplitude >= 0.0) || !(width > 0.0)) fail(ErrorCode::InvalidInput, "kernel amplitude must be >= 0 and width > 0");
  std::vector<double> a(cells);
  for (std::size_t j = 0; j < cells; ++j) {
    const double x = static_cast<double>(std::min(j, cells - j)) * spacing;
    if (name == "gaussian") {
      a[j] = amplitude * std::exp(-x * x / (2.0 * width * width));
    } else if (name == "tophat") {
      a[j] = x <= width ? amplitude : 0.0;
    } else {
      fail(ErrorCode::InvalidInput, "unknown kernel '" + name + "' (expected gaussian or tophat)");
    }
  }
  return a;
}

double kernel_sup(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

double kernel_l1(std::span<const double> a, double spacing) {
  std::vector<double> abs_values(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) abs_values[i] = std::abs(a[i]);
  return spacing * compensated_sum(abs_values);
}

void LogisticParams::validate() const {
  if (cells == 0) fail(ErrorCode::InvalidInput, "the grid needs at least one cell");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) fail(ErrorCode::InvalidInput, "grid spacing must be positive");
  if (!(m >= 0.0) || !std::isfinite(m)) fail(ErrorCode::InvalidInput, "mortality m must be finite and >= 0");
  if (!(theta > 0.0) || !std::isfinite(theta)) fail(ErrorCode::InvalidInput, "theta must be finite and > 0");
  if (!(b >= 0.0) || !std::isfinite(b)) fail(ErrorCode::InvalidInput, "b must be finite and >= 0");
  for (const auto* kernel : {&a_plus, &a_minus}) {
    const char* name = kernel == &a_plus ? "a_plus" : "a_minus";
    if (kernel->size() != cells) {
      fail(ErrorCode::InvalidInput, std::string(name) + " has " + std::to_string(kernel->size()) + " samples, expected " +
                                        std::to_string(cells));
    }
    for (std::size_t j = 0; j < cells; ++j) {
      const double v = (*kernel)[j];
      if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorCode::InvalidInput, std::string(name) + " must be finite and >= 0");
      if (v != (*kernel)[(cells - j) % cells]) {
        fail(ErrorCode::InvalidInput, std::string(name) + " is not symmetric at offset " + std::to_string(j));
      }
    }
  }
}

double LogisticParams::alpha_star() const { return std::abs(std::log(theta)); }

nlohmann::ordered_json LogisticParams::to_json() const {
  nlohmann::ordered_json j;
  j["m"] = m;
  j["theta"] = theta;
  j["b"] = b;
  j["cells"] = cells;
  j["spacing"] = spacing;
  j["a_plus"] = a_plus;
  j["a_minus"] = a_minus;
  return j;
}

HierarchyLayout::HierarchyLayout(std::size_t cells, int n_max, double spacing)
    : cells_(cells), n_max_(n_max), spacing_(spacing) {
  if (cells == 0 || n_max < 0) fail(ErrorCode::InvalidInput, "hierarchy layout needs cells >= 1 and n_max >= 0");
  std::size_t size = 1;
  std::size_t offset = 0;
  for (int n = 0; n <= n_max; ++n) {
    sizes_.push_back(size);
    offsets_.push_back(offset);
    offset += size;
    if (n < n_max) {
      if (size > (std::size_t{1} << 40) / cells) fail(ErrorCode::RangeOverflow, "hierarchy too large to flatten");
      size *= cells;
    }
  }
}

std::size_t HierarchyLayout::local_index(std::span<const std::size_t> tuple) const {
  std::size_t idx = 0;
  for (std::size_t x : tuple) idx = idx * cells_ + x;
  return idx;
}

std::size_t HierarchyLayout::flat_index(std::span<const std::size_t> tuple) const {
  return offset(static_cast<int>(tuple.size())) + local_index(tuple);
}

void HierarchyLayout::decode(int n, std::size_t local, std::span<std::size_t> tuple) const {
  for (int i = n - 1; i >= 0; --i) {
    tuple[static_cast<std::size_t>(i)] = local % cells_;
    local /= cells_;
  }
}

Grading HierarchyLayout::grading() const {
  std::vector<int> levels(total());
  std::vector<double> measure(total());
  for (int n = 0; n <= n_max_; ++n) {
    const double mu = std::pow(spacing_, n) / factorial(n);
    for (std::size_t i = 0; i < level_size(n); ++i) {
      levels[offset(n) + i] = n;
      measure[offset(n) + i] = mu;
    }
  }
  return Grading(std::move(levels), std::move(measure));
}

const char* hierarchy_kind_name(HierarchyKind kind) noexcept {
  return kind == HierarchyKind::Correlation ? "correlation" : "quasiobservable";
}

Hierarchy Hierarchy::zeros(HierarchyKind kind, std::size_t cells, double spacing, int n_max) {
  const HierarchyLayout layout(cells, n_max, spacing);
  Hierarchy h;
  h.kind = kind;
  h.cells = cells;
  h.spacing = spacing;
  for (int n = 0; n <= n_max; ++n) h.comps.emplace_back(layout.level_size(n), 0.0);
  return h;
}

Hierarchy Hierarchy::from_flat(HierarchyKind kind, const HierarchyLayout& layout, std::span<const double> flat) {
  Hierarchy h = zeros(kind, layout.cells(), layout.spacing(), layout.n_max());
  for (int n = 0; n <= layout.n_max(); ++n) {
    auto& comp = h.comps[static_cast<std::size_t>(n)];
    for (std::size_t i = 0; i < comp.size(); ++i) {
      const std::size_t idx = layout.offset(n) + i;
      comp[i] = idx < flat.size() ? flat[idx] : 0.0;
    }
  }
  return h;
}

double Hierarchy::value(std::span<const std::size_t> tuple) const {
  if (static_cast<int>(tuple.size()) > n_max()) return 0.0;
  std::size_t idx = 0;
  for (std::size_t x : tuple) idx = idx * cells + x;
  return comps[tuple.size()][idx];
}

std::vector<double> Hierarchy::flatten() const {
  std::vector<double> flat;
  for (const auto& c : comps) flat.insert(flat.end(), c.begin(), c.end());
  return flat;
}

void Hierarchy::symmetrize() {
  const auto lay = layout();
  for (int n = 2; n <= n_max(); ++n) {
    auto& comp = comps[static_cast<std::size_t>(n)];
    std::vector<std::size_t> tuple(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < comp.size(); ++i) {
      lay.decode(n, i, tuple);
      std::sort(tuple.begin(), tuple.end());
      comp[i] = comp[lay.local_index(tuple)];
    }
  }
}

double Hierarchy::symmetry_defect() const {
  const auto lay = layout();
  double worst = 0.0;
  for (int n = 2; n <= n_max(); ++n) {
    const auto& comp = comps[static_cast<std::size_t>(n)];
    std::vector<std::size_t> tuple(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < comp.size(); ++i) {
      lay.decode(n, i, tuple);
      for (std::size_t a = 0; a < tuple.size(); ++a) {
        for (std::size_t b = a + 1; b < tuple.size(); ++b) {
          std::swap(tuple[a], tuple[b]);
          worst = std::max(worst, std::abs(comp[i] - comp[lay.local_index(tuple)]));
          std::swap(tuple[a], tuple[b]);
        }
      }
    }
  }
  return worst;
}

nlohmann::ordered_json Hierarchy::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = hierarchy_kind_name(kind);
  j["cells"] = cells;
  j["spacing"] = spacing;
  j["n_max"] = n_max();
  j["components"] = comps;
  return j;
}

Hierarchy Hierarchy::from_json(const nlohmann::json& j) {
  try {
    const auto kind_name = j.at("kind").get<std::string>();
    HierarchyKind kind;
    if (kind_name == "correlation") {
      kind = HierarchyKind::Correlation;
    } else if (kind_name == "quasiobservable") {
      kind = HierarchyKind::QuasiObservable;
    } else {
      fail(ErrorCode::InvalidInput, "unknown hierarchy kind '" + kind_name + "'");
    }
    Hierarchy h = zeros(kind, j.at("cells").get<std::size_t>(), j.at("spacing").get<double>(), j.at("n_max").get<int>());
    const auto& comps = j.at("components");
    if (!comps.is_array() || comps.size() != h.comps.size()) fail(ErrorCode::InvalidInput, "component count does not match n_max");
    for (std::size_t n = 0; n < h.comps.size(); ++n) {
      auto values = comps[n].get<std::vector<double>>();
      if (values.size() != h.comps[n].size()) {
        fail(ErrorCode::InvalidInput, "component " + std::to_string(n) + " must have " + std::to_string(h.comps[n].size()) + " entries");
      }
      for (double v : values) {
        if (!std::isfinite(v)) fail(ErrorCode::InvalidInput, "hierarchy entries must be finite");
      }
      h.comps[n] = std::move(values);
    }
    return h;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidInput, std::string("malformed hierarchy JSON: ") + e.what());
  }
}

std::string Hierarchy::to_csv() const {
  const auto lay = layout();
  std::ostringstream out;
  out << "n";
  for (int i = 1; i <= n_max(); ++i) out << ",x" << i;
  out << ",value\n";
  char buf[64];
  for (int n = 0; n <= n_max(); ++n) {
    std::vector<std::size_t> tuple(static_cast<std::size_t>(n));
    const auto& comp = comps[static_cast<std::size_t>(n)];
    for (std::size_t i = 0; i < comp.size(); ++i) {
      lay.decode(n, i, tuple);
      out << n;
      for (int k = 0; k < n_max(); ++k) {
        out << ',';
        if (k < n) out << tuple[static_cast<std::size_t>(k)];
      }
      std::snprintf(buf, sizeof buf, "%.17g", comp[i]);
      out << ',' << buf << '\n';
    }
  }
  return out.str();
}

double lp_integral(const Hierarchy& g, double alpha) {
  std::vector<double> levels;
  for (int n = 0; n <= g.n_max(); ++n) {
    const double weight = std::pow(g.spacing, n) / factorial(n) * std::exp(alpha * n);
    levels.push_back(weight * compensated_sum(g.comps[static_cast<std::size_t>(n)]));
  }
  return compensated_sum(levels);
}

double lp_norm(const Hierarchy& g, double alpha) {
  Hierarchy a = g;
  for (auto& c : a.comps) {
    for (double& v : c) v = std::abs(v);
  }
  return lp_integral(a, alpha);
}

double correlation_norm(const Hierarchy& k, double alpha) {
  double s = 0.0;
  for (int n = 0; n <= k.n_max(); ++n) {
    const double w = std::exp(-alpha * n);
    for (double v : k.comps[static_cast<std::size_t>(n)]) s = std::max(s, std::abs(v) * w);
  }
  return s;
}

double hierarchy_pairing(const Hierarchy& g, const Hierarchy& k) {
  if (g.cells != k.cells || g.n_max() != k.n_max()) fail(ErrorCode::InvalidInput, "paired hierarchies must share a layout");
  return dual_pairing(g.flatten(), k.flatten(), g.layout().grading());
}

KTransformValue k_transform(const Hierarchy& g, std::span<const std::size_t> gamma) {
  if (static_cast<int>(gamma.size()) > kMaxSubsetSize) fail(ErrorCode::InvalidInput, "configuration too large for exact subset enumeration");
  for (std::size_t x : gamma) {
    if (x >= g.cells) fail(ErrorCode::InvalidInput, "configuration point outside the grid");
  }
  KTransformValue out;
  if (static_cast<int>(gamma.size()) > g.n_max()) {
    const auto& top = g.comps.back();
    out.truncation_unsound = std::any_of(top.begin(), top.end(), [](double v) { return v != 0.0; });
  }
  const std::size_t count = std::size_t{1} << gamma.size();
  std::vector<double> terms;
  std::vector<std::size_t> subset;
  for (std::size_t mask = 0; mask < count; ++mask) {
    subset.clear();
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      if (mask & (std::size_t{1} << i)) subset.push_back(gamma[i]);
    }
    if (static_cast<int>(subset.size()) <= g.n_max()) terms.push_back(g.value(subset));
  }
  out.value = compensated_sum(terms);
  return out;
}

double k_inverse(const std::function<double(std::span<const std::size_t>)>& f, std::span<const std::size_t> eta) {
  if (static_cast<int>(eta.size()) > kMaxSubsetSize) fail(ErrorCode::InvalidInput, "configuration too large for exact subset enumeration");
  const std::size_t count = std::size_t{1} << eta.size();
  std::vector<double> terms;
  std::vector<std::size_t> subset;
  for (std::size_t mask = 0; mask < count; ++mask) {
    subset.clear();
    for (std::size_t i = 0; i < eta.size(); ++i) {
      if (mask & (std::size_t{1} << i)) subset.push_back(eta[i]);
    }
    const bool odd = ((eta.size() - subset.size()) % 2) == 1;
    terms.push_back(odd ? -f(subset) : f(subset));
  }
  return compensated_sum(terms);
}

nlohmann::ordered_json GReport::to_json() const {
  nlohmann::ordered_json j;
  j["pass"] = pass;
  j["min_margin"] = min_margin;
  j["worst_config"] = worst_config;
  j["configurations"] = configurations;
  j["pair_pass"] = pair_pass;
  j["pair_min"] = pair_min;
  j["pair_worst_offset"] = pair_worst_offset;
  return j;
}

GReport check_G(const LogisticParams& p, const GSampler& sampler) {
  p.validate();
  if (sampler.n_max < 2 || sampler.samples < 0) fail(ErrorCode::InvalidInput, "sampler needs n_max >= 2 and samples >= 0");
  const std::size_t L = p.cells;
  std::vector<double> net(L);
  for (std::size_t j = 0; j < L; ++j) net[j] = p.a_minus[j] - p.theta * p.a_plus[j];

  GReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<std::size_t>& eta) {
    const double margin = pair_sum(eta, net, L) + p.b * static_cast<double>(eta.size());
    ++rep.configurations;
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.worst_config = eta;
    }
  };

  rep.pair_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < L; ++j) {
    const double v = net[j] + p.b;
    if (v < rep.pair_min) {
      rep.pair_min = v;
      rep.pair_worst_offset = j;
    }
    consider({0, j});
  }
  if (L < 2) rep.pair_min = 0.0;

  Rng rng(sampler.seed);
  const int top = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(sampler.n_max), L));
  std::vector<std::size_t> cells(L);
  for (int s = 0; s < sampler.samples && top >= 2; ++s) {
    const auto size = static_cast<std::size_t>(rng.integer(2, top));
    for (std::size_t i = 0; i < L; ++i) cells[i] = i;
    for (std::size_t i = 0; i < size; ++i) {
      const auto j = static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(i), static_cast<std::int64_t>(L - 1)));
      std::swap(cells[i], cells[j]);
    }
    std::vector<std::size_t> eta(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(size));
    std::sort(eta.begin(), eta.end());
    consider(eta);
  }
  if (rep.configurations == 0) rep.min_margin = 0.0;
  rep.pass = rep.min_margin >= 0.0;
  rep.pair_pass = rep.pair_min >= 0.0;
  return rep;
}

nlohmann::ordered_json ContinuumBounds::to_json() const {
  nlohmann::ordered_json j;
  j["bound_L0"] = L0;
  j["bound_L1"] = L1;
  j["bound_L1b"] = L1b;
  return j;
}

ContinuumBounds continuum_bounds(const LogisticParams& p, double alpha, double alpha_prime) {
  if (!(alpha_prime < alpha)) fail(ErrorCode::InvalidScalePair, "norm bounds need alpha' < alpha");
  const double e = std::numbers::e;
  const double gap = alpha - alpha_prime;
  ContinuumBounds out;
  out.L0 = p.m / (e * gap) + (kernel_sup(p.a_minus) + kernel_sup(p.a_plus)) / (4.0 * e * e * gap * gap);
  const double l1m = kernel_l1(p.a_minus, p.spacing);
  const double l1p = kernel_l1(p.a_plus, p.spacing);
  out.L1 = (l1m * std::exp(alpha) + l1p) / (e * gap);
  out.L1b = (l1m * std::exp(alpha) + p.b + l1p) / (e * gap);
  return out;
}

OperatorMatrix DiscreteOperators::lhat() const { return lhat0 + lhat1; }
OperatorMatrix DiscreteOperators::ldelta() const { return ldelta0 + ldelta1; }

DiscreteOperators build_discrete_operators(const LogisticParams& p, int n_max) {
  p.validate();
  if (n_max < 1) fail(ErrorCode::InvalidInput, "the hierarchy needs n_max >= 1");
  DiscreteOperators ops;
  ops.layout = HierarchyLayout(p.cells, n_max, p.spacing);
  const auto& lay = ops.layout;
  const std::size_t L = p.cells;
  const double h = p.spacing;
  const std::size_t dim = lay.total();

  auto diagonal_part = [&](int n, std::span<const std::size_t> x, std::size_t row, std::vector<Triplet>& out) {
    out.push_back({row, row, -(p.m * n + pair_sum(x, p.a_minus, L))});
  };
  // Output order n reads order n + 1; the inserted point runs over every slot so that the
  // matrix commutes with permutations of the tuple.
  auto raise_read = [&](const std::vector<double>& a, double sign, int n, std::span<const std::size_t> x,
                        std::size_t row, std::vector<Triplet>& out) {
    if (n >= n_max) return;
    const double scale = sign * h / (n + 1);
    for (std::size_t y = 0; y < L; ++y) {
      const double c = scale * point_sum(x, y, a, L);
      if (c == 0.0) continue;
      for (std::size_t pos = 0; pos <= x.size(); ++pos) out.push_back({row, lay.flat_index(inserted(x, pos, y)), c});
    }
  };
  // Output order n reads order n - 1 with x_i removed and weight sum_{j != i} a(x_i - x_j).
  auto lower_read = [&](const std::vector<double>& a, double sign, std::span<const std::size_t> x, std::size_t row,
                        std::vector<Triplet>& out) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double c = sign * partner_sum(x, i, a, L);
      if (c != 0.0) out.push_back({row, lay.flat_index(removed(x, i)), c});
    }
  };
  // Same order: x_i moved to y with weight h a^+(x_i - y).
  auto jump = [&](std::span<const std::size_t> x, std::size_t row, std::vector<Triplet>& out) {
    std::vector<std::size_t> moved(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t y = 0; y < L; ++y) {
        const double c = h * p.a_plus[periodic_diff(x[i], y, L)];
        if (c == 0.0) continue;
        moved[i] = y;
        out.push_back({row, lay.flat_index(moved), c});
      }
      moved[i] = x[i];
    }
  };

  ops.lhat0 = OperatorMatrix::from_triplets(
      collect_rows(lay,
                   [&](int n, std::span<const std::size_t> x, std::size_t row, std::vector<Triplet>& out) {
                     diagonal_part(n, x, row, out);
                     raise_read(p.a_plus, 1.0, n, x, row, out);
                   }),
      dim);
  ops.lhat1 = OperatorMatrix::from_triplets(
      collect_rows(lay,
                   [&](int, std::span<const std::size_t> x, std::size_t row, std::vector<Triplet>& out) {
                     lower_read(p.a_minus, -1.0, x, row, out);
                     jump(x, row, out);
                   }),
      dim);
  ops.ldelta0 = OperatorMatrix::from_triplets(
      collect_rows(lay,
                   [&](int n, std::span<const std::size_t> x, std::size_t row, std::vector<Triplet>& out) {
                     diagonal_part(n, x, row, out);
                     lower_read(p.a_plus, 1.0, x, row, out);
                   }),
      dim);
  ops.ldelta1 = OperatorMatrix::from_triplets(
      collect_rows(lay,
                   [&](int n, std::span<const std::size_t> x, std::size_t row, std::vector<Triplet>& out) {
                     raise_read(p.a_minus, -1.0, n, x, row, out);
                     jump(x, row, out);
                   }),
      dim);
  return ops;
}

double closure_defect(const LogisticParams& p, const Hierarchy& hier, double alpha) {
  check_layout(p, hier);
  const int top = hier.n_max() + 1;
  const std::size_t L = p.cells;
  const bool correlation = hier.kind == HierarchyKind::Correlation;
  const auto& a = correlation ? p.a_plus : p.a_minus;
  const double sign = correlation ? 1.0 : -1.0;
  std::size_t count = 1;
  for (int i = 0; i < top; ++i) count *= L;
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<std::size_t> z(static_cast<std::size_t>(top));
    std::vector<double> terms;
    double worst = 0.0;
    for (std::size_t local = c * kChunk; local < std::min(count, (c + 1) * kChunk); ++local) {
      std::size_t rest = local;
      for (int i = top - 1; i >= 0; --i) {
        z[static_cast<std::size_t>(i)] = rest % L;
        rest /= L;
      }
      double v = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) v += sign * partner_sum(z, i, a, L) * hier.value(removed(z, i));
      if (correlation) {
        worst = std::max(worst, std::abs(v));
      } else {
        terms.push_back(std::abs(v));
      }
    }
    partial[c] = correlation ? worst : compensated_sum(terms);
  });
  if (correlation) {
    return *std::max_element(partial.begin(), partial.end()) * std::exp(-alpha * top);
  }
  return compensated_sum(partial) * std::pow(p.spacing, top) / factorial(top) * std::exp(alpha * top);
}

AppliedHierarchy apply_generator(const LogisticParams& p, const DiscreteOperators& ops, const Hierarchy& h,
                                 double alpha) {
  check_layout(p, h);
  if (h.n_max() != ops.layout.n_max()) fail(ErrorCode::InvalidInput, "hierarchy order does not match the operators");
  const auto flat = h.flatten();
  std::vector<double> out(flat.size(), 0.0);
  const bool correlation = h.kind == HierarchyKind::Correlation;
  (correlation ? ops.ldelta0 : ops.lhat0).multiply_add(flat, out);
  (correlation ? ops.ldelta1 : ops.lhat1).multiply_add(flat, out);
  AppliedHierarchy res;
  res.value = Hierarchy::from_flat(h.kind, ops.layout, out);
  res.closure_defect = closure_defect(p, h, alpha);
  return res;
}

WConfig logistic_wconfig(const LogisticParams& p, const DiscreteOperators& ops, double alpha, double alpha_prime,
                         double tau_max, KCertificate* cert) {
  const auto grading = ops.layout.grading();
  const std::size_t dim = ops.layout.total();
  std::vector<double> b_diag(dim);
  for (std::size_t i = 0; i < dim; ++i) b_diag[i] = p.b * grading.level(i);
  const auto bn = OperatorMatrix::diagonal(b_diag);
  const OperatorMatrix generator = ops.lhat0 - bn;

  WConfig w;
  if (generator.is_diagonal()) {
    auto rates = generator.diagonal_entries(dim);
    for (double& r : rates) r = r == 0.0 ? 0.0 : -r;
    w.V = Propagator::diagonal(DiagonalGenerator(std::move(rates)), grading);
    if (cert) *cert = KCertificate{};
  } else {
    w.V = Propagator::truncated_matrix(generator, dim, grading);
    if (tau_max > 0.0) {
      const auto k = estimate_K(w.V, {alpha_prime, alpha}, tau_max);
      w.V.set_K(k.K);
      if (cert) *cert = k;
    }
  }
  w.B = OperatorFamily(ops.lhat1 + bn);
  w.alpha_star = p.alpha_star();
  w.alpha_grid = {alpha_prime, 0.5 * (alpha + alpha_prime), alpha};
  w.safety = 1.1;
  return w;
}

nlohmann::ordered_json HierarchyEvolution::to_json() const {
  auto j = result.to_json();
  j["closure_defect"] = closure_defect;
  j["hierarchy"] = value.to_json();
  return j;
}

HierarchyEvolution evolve_hierarchy(const LogisticParams& p, const Hierarchy& h0, double t, double alpha,
                                    double alpha_prime, const HierarchyEvolveOptions& opts) {
  p.validate();
  check_layout(p, h0);
  if (!(alpha_prime < alpha)) fail(ErrorCode::InvalidScalePair, "hierarchy evolution needs alpha' < alpha");
  if (!(alpha_prime > p.alpha_star())) {
    fail(ErrorCode::InvalidScalePair,
         "alpha' must exceed |ln theta| = " + std::to_string(p.alpha_star()) + " for the unperturbed part to contract");
  }
  if (!(t >= 0.0)) fail(ErrorCode::TimeOrderViolation, "hierarchy evolution needs t >= 0");
  const auto ops = build_discrete_operators(p, h0.n_max());
  KCertificate cert;
  const WConfig w = logistic_wconfig(p, ops, alpha, alpha_prime, t, &cert);

  HierarchyEvolution out;
  const auto flat = h0.flatten();
  const bool correlation = h0.kind == HierarchyKind::Correlation;
  if (correlation) {
    out.result = dual_evolve(w, DualVector(flat), 0.0, t, alpha, alpha_prime, opts.evolve);
  } else {
    out.result = forward_evolve(w, ScaleVector(flat), 0.0, t, alpha, alpha_prime, opts.evolve);
  }
  out.value = Hierarchy::from_flat(h0.kind, ops.layout, out.result.value);
  const double in_alpha = correlation ? alpha_prime : alpha;
  const double out_alpha = correlation ? alpha : alpha_prime;
  out.closure_defect = std::max(closure_defect(p, h0, in_alpha), closure_defect(p, out.value, out_alpha));

  nlohmann::ordered_json kc;
  kc["K"] = w.V.K();
  kc["log_norm_max"] = cert.log_norm_max;
  kc["contraction_by_log_norm"] = cert.contraction_by_log_norm;
  kc["sampled"] = cert.sampled;
  kc["sampled_max"] = cert.sampled_max;
  out.result.extra["contraction_certificate"] = kc;
  out.result.extra["closure_defect"] = out.closure_defect;
  out.result.extra["alpha_star"] = p.alpha_star();
  if (out.closure_defect > opts.defect_tol) {
    fail(ErrorCode::ClosureUnsound, "closure defect " + std::to_string(out.closure_defect) + " exceeds defect_tol " +
                                        std::to_string(opts.defect_tol));
  }
  return out;
}

}  // namespace scaleevo
