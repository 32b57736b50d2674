#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "fixtures.hpp"
#include "ovcyannikov.hpp"
#include "report.hpp"

namespace scaleevo {

namespace {

constexpr std::size_t kMaxDimension = std::size_t{1} << 22;

struct Context {
  std::string source;
  std::string base_dir;

  [[noreturn]] void error(const YAML::Mark& mark, const std::string& msg) const {
    std::ostringstream os;
    os << source << ':' << (mark.line + 1) << ':' << (mark.column + 1) << ": " << msg;
    fail(ErrorCode::ConfigError, os.str());
  }
};

class Section {
 public:
  Section(const Context& ctx, YAML::Node node, std::string name) : ctx_(ctx), node_(std::move(node)), name_(std::move(name)) {
    if (!node_.IsMap()) ctx_.error(node_.Mark(), "section '" + name_ + "' must be a mapping");
  }

  const YAML::Node& node() const { return node_; }
  const std::string& name() const { return name_; }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        std::string list;
        for (const auto& k : allowed) list += (list.empty() ? "" : ", ") + k;
        ctx_.error(kv.first.Mark(), "unknown key '" + key + "' in '" + name_ + "' (allowed: " + list + ")");
      }
    }
  }

  bool has(const char* key) const { return static_cast<bool>(node_[key]); }

  YAML::Node child(const char* key) const {
    const auto n = node_[key];
    if (!n) ctx_.error(node_.Mark(), "missing key '" + std::string(key) + "' in '" + name_ + "'");
    return n;
  }

  double number(const char* key) const { return to_number(child(key), key); }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  long long integer(const char* key) const {
    const auto n = child(key);
    const double v = to_number(n, key);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) ctx_.error(n.Mark(), "'" + std::string(key) + "' must be an integer");
    return static_cast<long long>(v);
  }
  long long integer(const char* key, long long fallback) const { return has(key) ? integer(key) : fallback; }

  std::size_t count(const char* key, std::size_t lo, std::size_t hi) const {
    const auto n = child(key);
    const long long v = integer(key);
    if (v < static_cast<long long>(lo) || v > static_cast<long long>(hi)) {
      ctx_.error(n.Mark(), "'" + std::string(key) + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<std::size_t>(v);
  }
  std::size_t count(const char* key, std::size_t lo, std::size_t hi, std::size_t fallback) const {
    return has(key) ? count(key, lo, hi) : fallback;
  }

  std::string text(const char* key) const {
    const auto n = child(key);
    if (!n.IsScalar()) ctx_.error(n.Mark(), "'" + std::string(key) + "' must be a string");
    return n.as<std::string>();
  }
  std::string text(const char* key, const std::string& fallback) const { return has(key) ? text(key) : fallback; }

  bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto n = child(key);
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      ctx_.error(n.Mark(), "'" + std::string(key) + "' must be true or false");
    }
  }

  std::vector<double> numbers(const char* key) const {
    const auto n = child(key);
    if (!n.IsSequence()) ctx_.error(n.Mark(), "'" + std::string(key) + "' must be a list of numbers");
    std::vector<double> out;
    for (const auto& e : n) out.push_back(to_number(e, key));
    return out;
  }
  std::vector<double> numbers(const char* key, std::vector<double> fallback) const {
    return has(key) ? numbers(key) : std::move(fallback);
  }

  Section sub(const char* key) const { return Section(ctx_, child(key), name_ + "." + key); }

  [[noreturn]] void error(const char* key, const std::string& msg) const {
    ctx_.error(has(key) ? node_[key].Mark() : node_.Mark(), msg);
  }

  double to_number(const YAML::Node& n, const char* key) const {
    if (!n.IsScalar()) ctx_.error(n.Mark(), "'" + std::string(key) + "' must be a number");
    const auto raw = n.as<std::string>();
    try {
      std::size_t used = 0;
      const double v = std::stod(raw, &used);
      if (used != raw.size() || !std::isfinite(v)) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      ctx_.error(n.Mark(), "'" + std::string(key) + "' must be a finite number, got '" + raw + "'");
    }
  }

 private:
  const Context& ctx_;
  YAML::Node node_;
  std::string name_;
};

double polynomial(const std::vector<double>& c, double n) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * n + *it;
  return v;
}

// Sequence generators: values, affine (polynomial coefficients), geometric, unit.
std::vector<double> sequence_from(const Section& s, std::size_t dimension, bool allow_unit) {
  const auto gen = s.text("generator");
  if (gen == "values") {
    s.allow({"generator", "values"});
    auto v = s.numbers("values");
    if (v.size() > dimension) s.error("values", "more values than the working dimension " + std::to_string(dimension));
    return v;
  }
  if (gen == "affine") {
    s.allow({"generator", "coefficients"});
    const auto c = s.numbers("coefficients");
    if (c.empty()) s.error("coefficients", "'coefficients' must not be empty");
    std::vector<double> v(dimension);
    for (std::size_t n = 0; n < dimension; ++n) v[n] = polynomial(c, static_cast<double>(n));
    return v;
  }
  if (gen == "geometric") {
    s.allow({"generator", "amplitude", "rate", "support"});
    const double amp = s.number("amplitude", 1.0);
    const double rate = s.number("rate");
    const std::size_t support = s.count("support", 1, dimension, dimension);
    std::vector<double> v(support);
    for (std::size_t n = 0; n < support; ++n) v[n] = amp * std::exp(-rate * static_cast<double>(n));
    return v;
  }
  if (gen == "unit" && allow_unit) {
    s.allow({"generator", "index", "value"});
    const std::size_t idx = s.count("index", 0, dimension - 1);
    std::vector<double> v(idx + 1, 0.0);
    v[idx] = s.number("value", 1.0);
    return v;
  }
  s.error("generator", "unknown generator '" + gen + "' in '" + s.name() + "'");
}

// Matrix generators: zero, diagonal, shift, band, number, coo.
OperatorMatrix matrix_from(const Section& s, std::size_t dimension, const std::vector<double>& death) {
  const auto gen = s.text("generator");
  std::vector<Triplet> t;
  if (gen == "zero") {
    s.allow({"generator"});
    return OperatorMatrix{};
  }
  if (gen == "diagonal") {
    s.allow({"generator", "values", "coefficients"});
    std::vector<double> d;
    if (s.has("values")) {
      d = s.numbers("values");
      if (d.size() > dimension) s.error("values", "more values than the working dimension");
    } else {
      const auto c = s.numbers("coefficients");
      d.resize(dimension);
      for (std::size_t n = 0; n < dimension; ++n) d[n] = polynomial(c, static_cast<double>(n));
    }
    return OperatorMatrix::diagonal(d);
  }
  if (gen == "number") {
    s.allow({"generator", "factor"});
    const double f = s.number("factor", 1.0);
    for (std::size_t n = 1; n < dimension; ++n) t.push_back({n, n, f * static_cast<double>(n)});
    return OperatorMatrix::from_triplets(std::move(t), dimension, 0);
  }
  if (gen == "shift") {
    s.allow({"generator", "offset", "value", "relative"});
    const long long off = s.integer("offset");
    const double value = s.number("value", 0.0);
    const double rel = s.number("relative", 0.0);
    if (off == 0) s.error("offset", "shift offset must be nonzero (use 'diagonal')");
    for (std::size_t k = 0; k < dimension; ++k) {
      const long long row = static_cast<long long>(k) + off;
      if (row < 0 || row >= static_cast<long long>(dimension)) continue;
      t.push_back({static_cast<std::size_t>(row), k, value + rel * death[k]});
    }
    return OperatorMatrix::from_triplets(std::move(t), dimension, static_cast<int>(std::abs(off)));
  }
  if (gen == "band") {
    s.allow({"generator", "lower", "upper", "amplitude", "decay", "growth", "include_diagonal"});
    const auto lower = static_cast<long long>(s.count("lower", 0, 1000, 1));
    const auto upper = static_cast<long long>(s.count("upper", 0, 1000, 1));
    const double amp = s.number("amplitude");
    const double decay = s.number("decay", 0.0);
    const double growth = s.number("growth", 0.0);
    const bool with_diagonal = s.flag("include_diagonal", true);
    for (std::size_t k = 0; k < dimension; ++k) {
      for (long long j = -upper; j <= lower; ++j) {
        if (j == 0 && !with_diagonal) continue;
        const long long row = static_cast<long long>(k) + j;
        if (row < 0 || row >= static_cast<long long>(dimension)) continue;
        const double v = amp * std::exp(-decay * static_cast<double>(std::abs(j))) * (1.0 + growth * static_cast<double>(k));
        t.push_back({static_cast<std::size_t>(row), k, v});
      }
    }
    return OperatorMatrix::from_triplets(std::move(t), dimension, static_cast<int>(std::max(lower, upper)));
  }
  if (gen == "coo") {
    s.allow({"generator", "entries"});
    const auto entries = s.child("entries");
    if (!entries.IsSequence()) s.error("entries", "'entries' must be a list of [row, col, value]");
    for (const auto& e : entries) {
      if (!e.IsSequence() || e.size() != 3) s.error("entries", "each entry must be [row, col, value]");
      const double r = s.to_number(e[0], "entries");
      const double c = s.to_number(e[1], "entries");
      if (r < 0 || c < 0 || r != std::floor(r) || c != std::floor(c) || r >= dimension || c >= dimension) {
        s.error("entries", "entry indices must be integers below the working dimension");
      }
      t.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), s.to_number(e[2], "entries")});
    }
    return OperatorMatrix::from_triplets(std::move(t), dimension);
  }
  s.error("generator", "unknown generator '" + gen + "' in '" + s.name() + "'");
}

std::vector<double> kernel_csv(const Section& s, const std::string& path, std::size_t cells) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    s.error("path", e.what());
  }
  std::vector<double> values;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.rfind(',');
    const auto field = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(field, &used);
      values.push_back(v);
    } catch (const std::exception&) {
      if (values.empty() && line_no == 1) continue;  // header row
      s.error("path", path + ":" + std::to_string(line_no) + ": not a number");
    }
  }
  if (values.size() != cells) {
    s.error("path", path + " has " + std::to_string(values.size()) + " samples, expected " + std::to_string(cells));
  }
  return values;
}

std::vector<double> kernel_from(const Section& s, std::size_t cells, double spacing, const Context& ctx) {
  const auto gen = s.text("generator");
  std::vector<double> a;
  if (gen == "gaussian" || gen == "tophat") {
    s.allow({"generator", "amplitude", "width", "add"});
    a = named_kernel(gen, cells, spacing, s.number("amplitude", 1.0), s.number("width"));
  } else if (gen == "values") {
    s.allow({"generator", "values", "add"});
    a = s.numbers("values");
    if (a.size() != cells) s.error("values", "kernel needs exactly " + std::to_string(cells) + " samples");
  } else if (gen == "csv") {
    s.allow({"generator", "path", "add"});
    auto path = s.text("path");
    if (!std::filesystem::path(path).is_absolute()) path = (std::filesystem::path(ctx.base_dir) / path).string();
    a = kernel_csv(s, path, cells);
  } else if (gen == "zero") {
    s.allow({"generator", "add"});
    a.assign(cells, 0.0);
  } else {
    s.error("generator", "unknown kernel generator '" + gen + "' (gaussian, tophat, values, csv, zero)");
  }
  for (double v : a) {
    if (!(v >= 0.0)) s.error("generator", "kernel samples must be nonnegative");
  }
  return symmetrize_kernel(std::move(a));
}

Hierarchy hierarchy_from(const Section& s, const LogisticParams& p, int n_max, const Context& ctx) {
  const auto kind_name = s.text("kind", "correlation");
  HierarchyKind kind;
  if (kind_name == "correlation") {
    kind = HierarchyKind::Correlation;
  } else if (kind_name == "quasiobservable") {
    kind = HierarchyKind::QuasiObservable;
  } else {
    s.error("kind", "'kind' must be correlation or quasiobservable");
  }
  const auto gen = s.text("generator");
  if (gen == "poisson") {
    s.allow({"kind", "generator", "density"});
    const double z = s.number("density");
    auto h = Hierarchy::zeros(kind, p.cells, p.spacing, n_max);
    for (int n = 0; n <= n_max; ++n) std::fill(h.comps[n].begin(), h.comps[n].end(), std::pow(z, n));
    return h;
  }
  if (gen == "indicator") {
    s.allow({"kind", "generator", "level", "value"});
    const auto level = static_cast<int>(s.count("level", 0, static_cast<std::size_t>(n_max)));
    auto h = Hierarchy::zeros(kind, p.cells, p.spacing, n_max);
    std::fill(h.comps[level].begin(), h.comps[level].end(), s.number("value", 1.0));
    return h;
  }
  if (gen == "random") {
    s.allow({"kind", "generator", "seed", "data_max"});
    Rng rng(static_cast<std::uint64_t>(s.integer("seed", 1)));
    const auto data_max = static_cast<int>(s.count("data_max", 0, static_cast<std::size_t>(n_max), static_cast<std::size_t>(n_max)));
    return random_hierarchy(rng, kind, p.cells, p.spacing, n_max, data_max);
  }
  if (gen == "file") {
    s.allow({"kind", "generator", "path"});
    auto path = s.text("path");
    if (!std::filesystem::path(path).is_absolute()) path = (std::filesystem::path(ctx.base_dir) / path).string();
    try {
      auto h = Hierarchy::from_json(nlohmann::json::parse(read_text_file(path)));
      if (h.cells != p.cells || h.n_max() != n_max) s.error("path", "hierarchy file does not match cells / n_max");
      h.spacing = p.spacing;
      return h;
    } catch (const nlohmann::json::exception& e) {
      s.error("path", std::string("malformed hierarchy file: ") + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      s.error("path", e.what());
    }
  }
  s.error("generator", "unknown hierarchy generator '" + gen + "' (poisson, indicator, random, file)");
}

void parse_ode(const Section& root, const Context& ctx, ModelConfig& cfg) {
  root.allow({"model", "scale", "death", "birth", "coupling", "schedule", "initial", "functional"});
  const auto scale = root.sub("scale");
  scale.allow({"dimension", "alpha_star", "alpha_grid", "nu_grid", "safety"});
  const std::size_t dim = scale.count("dimension", 1, kMaxDimension);
  auto& m = cfg.ode;
  m.alpha_star = scale.number("alpha_star");
  m.alpha_grid = scale.numbers("alpha_grid", {});
  m.nu_grid = scale.numbers("nu_grid", {0.1, 0.5, 1.0});
  m.safety = scale.number("safety", 1.1);
  if (!(m.safety >= 1.0)) scale.error("safety", "'safety' must be >= 1");
  for (double a : m.alpha_grid) {
    if (!(a > m.alpha_star)) scale.error("alpha_grid", "alpha_grid entries must exceed alpha_star");
  }

  const auto death_sec = root.sub("death");
  auto death = sequence_from(death_sec, dim, false);
  death.resize(dim, death.empty() ? 0.0 : death.back());
  for (double d : death) {
    if (!(d >= 0.0)) death_sec.error("generator", "death rates must be nonnegative");
  }
  m.d = DiagonalGenerator(death);
  m.b = root.has("birth") ? matrix_from(root.sub("birth"), dim, death) : OperatorMatrix{};
  m.c = root.has("coupling") ? matrix_from(root.sub("coupling"), dim, death) : OperatorMatrix{};

  if (root.has("schedule")) {
    const auto sch = root.sub("schedule");
    sch.allow({"times", "scales", "interpolation"});
    CouplingSchedule s;
    s.times = sch.numbers("times");
    s.scales = sch.numbers("scales");
    if (s.times.empty() || s.times.size() != s.scales.size()) sch.error("scales", "'times' and 'scales' need equal, nonzero lengths");
    if (!std::is_sorted(s.times.begin(), s.times.end()) ||
        std::adjacent_find(s.times.begin(), s.times.end()) != s.times.end()) {
      sch.error("times", "'times' must be strictly increasing");
    }
    const auto interp = sch.text("interpolation", "linear");
    if (interp == "linear") {
      s.interpolation = Interpolation::Linear;
    } else if (interp == "piecewise_constant") {
      s.interpolation = Interpolation::PiecewiseConstant;
    } else {
      sch.error("interpolation", "'interpolation' must be linear or piecewise_constant");
    }
    cfg.schedule = s;
  }
  if (root.has("initial")) cfg.initial = sequence_from(root.sub("initial"), dim, true);
  if (root.has("functional")) cfg.functional = sequence_from(root.sub("functional"), dim, true);
  (void)ctx;
}

void parse_logistic(const Section& root, const Context& ctx, ModelConfig& cfg) {
  root.allow({"model", "logistic", "kernel_plus", "kernel_minus", "initial", "sampler"});
  const auto lg = root.sub("logistic");
  lg.allow({"cells", "length", "m", "theta", "b", "n_max"});
  auto& p = cfg.logistic;
  p.cells = lg.count("cells", 1, 4096);
  const double length = lg.number("length", 1.0);
  if (!(length > 0.0)) lg.error("length", "'length' must be positive");
  p.spacing = length / static_cast<double>(p.cells);
  p.m = lg.number("m", 0.0);
  p.theta = lg.number("theta", 1.0);
  p.b = lg.number("b", 0.0);
  cfg.n_max = static_cast<int>(lg.count("n_max", 1, 8, 2));
  if (!(p.m >= 0.0)) lg.error("m", "'m' must be >= 0");
  if (!(p.theta > 0.0)) lg.error("theta", "'theta' must be > 0");
  if (!(p.b >= 0.0)) lg.error("b", "'b' must be >= 0");

  const auto kp = root.sub("kernel_plus");
  p.a_plus = kernel_from(kp, p.cells, p.spacing, ctx);
  const auto km = root.sub("kernel_minus");
  p.a_minus = kernel_from(km, p.cells, p.spacing, ctx);
  // "add: theta_a_plus" adds theta a^+ to a^-, so the stability condition holds by construction.
  if (km.has("add")) {
    if (km.text("add") != "theta_a_plus") km.error("add", "'add' supports only theta_a_plus");
    for (std::size_t j = 0; j < p.cells; ++j) p.a_minus[j] += p.theta * p.a_plus[j];
  }
  if (kp.has("add")) kp.error("add", "'add' is only available in kernel_minus");

  if (root.has("initial")) cfg.hierarchy = hierarchy_from(root.sub("initial"), p, cfg.n_max, ctx);
  if (root.has("sampler")) {
    const auto sm = root.sub("sampler");
    sm.allow({"n_max", "samples", "seed"});
    cfg.sampler.n_max = static_cast<int>(sm.count("n_max", 2, 64, 6));
    cfg.sampler.samples = static_cast<int>(sm.count("samples", 0, 10000000, 2000));
    cfg.sampler.seed = static_cast<std::uint64_t>(sm.integer("seed", 1));
  }
  try {
    p.validate();
  } catch (const Error& e) {
    ctx.error(lg.node().Mark(), e.what());
  }
}

}  // namespace

ModelConfig parse_model(const std::string& text, const std::string& source, const std::string& base_dir) {
  const Context ctx{source, base_dir};
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    ctx.error(e.mark, e.msg);
  }
  if (!doc || doc.IsNull()) fail(ErrorCode::ConfigError, source + ":1:1: empty model file");
  ModelConfig cfg;
  cfg.source = source;
  try {
    const Section root(ctx, doc, "model file");
    const auto kind = root.text("model", "ode");
    if (kind == "ode") {
      cfg.kind = ModelKind::Ode;
      parse_ode(root, ctx, cfg);
    } else if (kind == "logistic") {
      cfg.kind = ModelKind::Logistic;
      parse_logistic(root, ctx, cfg);
    } else {
      root.error("model", "'model' must be ode or logistic");
    }
  } catch (const YAML::Exception& e) {
    ctx.error(e.mark, e.msg);
  }
  return cfg;
}

ModelConfig load_model(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse_model(text, path, dir.empty() ? "." : dir);
}

OperatorFamily coupling_family(const ModelConfig& cfg) {
  const auto c = cfg.ode.c.truncated(cfg.ode.dimension());
  if (!cfg.schedule) return OperatorFamily(c);
  std::vector<OperatorMatrix> members;
  for (double s : cfg.schedule->scales) members.push_back(c.scaled(s));
  return OperatorFamily(cfg.schedule->times, std::move(members), cfg.schedule->interpolation);
}

WConfig ode_wconfig(const ModelConfig& cfg, const std::vector<double>& alphas, double tau_max, KCertificate* cert) {
  if (cfg.kind != ModelKind::Ode) fail(ErrorCode::ConfigError, cfg.source + ": this command needs an ODE model");
  if (tau_max > 0.0 && alphas.size() >= 2) {
    // No admissible span exceeds the horizon between the outermost levels, so the contraction
    // sample need not reach past it.
    WConfig probe = model_wconfig(cfg.ode, alphas, 0.0);
    probe.B = coupling_family(cfg);
    const double T = existence_time(alphas.front(), alphas.back(), horizon_table(probe, alphas.back(), alphas.front()));
    if (std::isfinite(T)) tau_max = std::min(tau_max, T);
  }
  WConfig w = model_wconfig(cfg.ode, alphas, tau_max, cert);
  w.B = coupling_family(cfg);
  return w;
}

}  // namespace scaleevo
