#include "mosco/experiment.hpp"

#include "mosco/constants.hpp"
#include "mosco/mosco_lab.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace mosco {

using nlohmann::json;

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"bbm_limit", "check_kernel", "concentration", "cross_term",
                                                 "density",   "diffusion_matrix", "mosco"};
  return kinds;
}

namespace {

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  return j;
}

double get_number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  return v.get<int>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError("'" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const json& obj, const std::string& key, const std::vector<double>& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_array()) throw ConfigError("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError("'" + key + "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

template <class F>
auto translate(F&& f, const std::string& what) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

DomainSpec parse_domain(const json& j) {
  require_object(j, "domain");
  reject_unknown(j, "domain", {"dim", "geometry", "bounds", "vertices", "n", "r_trunc"});
  DomainSpec d;
  d.dim = get_int(j, "dim", 1);
  d.geometry = translate([&] { return geometry_from_string(get_string(j, "geometry", d.dim == 1 ? "interval" : "box")); },
                         "domain");
  d.bounds = get_numbers(j, "bounds", d.dim == 1 ? std::vector<double>{0.0, 1.0} : std::vector<double>{0.0, 1.0, 0.0, 1.0});
  if (j.contains("vertices")) {
    if (!j["vertices"].is_array()) throw ConfigError("'vertices' must be an array of pairs");
    for (const auto& v : j["vertices"]) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError("'vertices' must be an array of pairs");
      d.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
  }
  d.n = get_int(j, "n", 8);
  d.r_trunc = get_number(j, "r_trunc", 2.0);
  return d;
}

MollifierParams parse_base(const json& j, KernelKind kind, int dim) {
  MollifierParams p;
  p.dim = dim;
  if (kind == KernelKind::J4) p.kind = MollifierKind::BoundedPoly;
  if (j.is_null()) return p;
  require_object(j, "kernel.base");
  reject_unknown(j, "kernel.base", {"family", "dim", "beta", "eps0", "profile"});
  p.kind = translate([&] { return mollifier_kind_from_string(get_string(j, "family", to_string(p.kind))); }, "kernel.base");
  p.beta = get_number(j, "beta", p.beta);
  p.eps0 = get_number(j, "eps0", p.eps0);
  p.profile = translate([&] { return profile_shape_from_string(get_string(j, "profile", "exp")); }, "kernel.base");
  return p;
}

KernelParams parse_kernel(const json& j, int dim) {
  require_object(j, "kernel");
  reject_unknown(j, "kernel", {"kind", "base", "lambda", "beta", "tail", "gamma", "alpha0", "modes"});
  KernelParams k;
  k.kind = translate([&] { return kernel_kind_from_string(get_string(j, "kind", "nu")); }, "kernel");
  k.base = parse_base(j.contains("base") ? j["base"] : json(), k.kind, dim);
  k.lambda = get_number(j, "lambda", 0.0);
  k.beta = get_number(j, "beta", 1.0);
  const std::string tail = get_string(j, "tail", "exponential");
  if (tail == "exponential") k.tail = TailShape::Exponential;
  else if (tail == "gaussian") k.tail = TailShape::Gaussian;
  else throw ConfigError("unknown tail '" + tail + "'");
  k.gamma = get_number(j, "gamma", 0.5);
  k.alpha0 = get_number(j, "alpha0", 1.0);
  k.modes = get_int(j, "modes", 6);
  return k;
}

Tolerances parse_tolerances(const json& j) {
  Tolerances t;
  if (j.is_null()) return t;
  require_object(j, "tolerances");
  reject_unknown(j, "tolerances",
                 {"tail_tol", "matrix_tol", "mosco_tol", "solver_tol", "quad_tol", "bbm_tol", "cross_tol", "liminf_tol"});
  t.tail_tol = get_number(j, "tail_tol", t.tail_tol);
  t.matrix_tol = get_number(j, "matrix_tol", t.matrix_tol);
  t.mosco_tol = get_number(j, "mosco_tol", t.mosco_tol);
  t.solver_tol = get_number(j, "solver_tol", t.solver_tol);
  t.quad_tol = get_number(j, "quad_tol", t.quad_tol);
  t.bbm_tol = get_number(j, "bbm_tol", t.bbm_tol);
  t.cross_tol = get_number(j, "cross_tol", t.cross_tol);
  t.liminf_tol = get_number(j, "liminf_tol", t.liminf_tol);
  for (double v : {t.tail_tol, t.matrix_tol, t.mosco_tol, t.solver_tol, t.quad_tol, t.bbm_tol, t.cross_tol, t.liminf_tol})
    if (!(v > 0.0)) throw ConfigError("all tolerances must be positive");
  return t;
}

PairQuadrature parse_quadrature(const json& j) {
  PairQuadrature q;
  if (j.is_null()) return q;
  require_object(j, "quadrature");
  reject_unknown(j, "quadrature", {"radial_order", "angular_order", "radial_order_low", "angular_order_low",
                                   "spatial_points", "spatial_points_modulated"});
  q.radial_order = get_int(j, "radial_order", q.radial_order);
  q.angular_order = get_int(j, "angular_order", q.angular_order);
  q.radial_order_low = get_int(j, "radial_order_low", q.radial_order_low);
  q.angular_order_low = get_int(j, "angular_order_low", q.angular_order_low);
  q.spatial_points = get_int(j, "spatial_points", q.spatial_points);
  q.spatial_points_modulated = get_int(j, "spatial_points_modulated", q.spatial_points_modulated);
  for (int v : {q.radial_order, q.angular_order, q.radial_order_low, q.angular_order_low, q.spatial_points,
                q.spatial_points_modulated})
    if (v < 1 || v > 200) throw ConfigError("quadrature orders must lie in [1, 200]");
  return q;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  require_object(j, "config");
  reject_unknown(j, "config", {"spec_version", "name", "experiment", "domain", "kernel", "basis", "alpha_sweep",
                               "function", "tolerances", "quadrature", "seed", "params"});
  ExperimentConfig c;
  if (!j.contains("spec_version")) throw ConfigError("missing spec_version");
  c.spec_version = get_int(j, "spec_version", 0);
  if (c.spec_version != 1) throw ConfigError("unsupported spec_version " + std::to_string(c.spec_version));
  c.name = get_string(j, "name", "");
  if (c.name.empty()) throw ConfigError("missing name");
  for (char ch : c.name)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.'))
      throw ConfigError("name may only contain letters, digits, '_', '-' and '.'");
  c.experiment = get_string(j, "experiment", "");
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.experiment) == kinds.end())
    throw ConfigError("unknown experiment '" + c.experiment + "'");
  if (j.contains("domain")) c.domain = parse_domain(j["domain"]);
  int dim = c.domain ? c.domain->dim : 1;
  if (!c.domain && j.contains("kernel") && j["kernel"].is_object() && j["kernel"].contains("base") &&
      j["kernel"]["base"].is_object())
    dim = get_int(j["kernel"]["base"], "dim", 1);
  c.kernel = parse_kernel(j.contains("kernel") ? j["kernel"] : json::object(), dim);
  c.basis = translate([&] { return basis_from_string(get_string(j, "basis", "p1")); }, "basis");
  c.alpha_sweep = get_numbers(j, "alpha_sweep", c.alpha_sweep);
  if (c.alpha_sweep.empty()) throw ConfigError("alpha_sweep is empty");
  for (std::size_t k = 0; k < c.alpha_sweep.size(); ++k) {
    if (!(c.alpha_sweep[k] > 0.0 && c.alpha_sweep[k] < 2.0)) throw ConfigError("alpha_sweep entries must lie in (0, 2)");
    if (k > 0 && !(c.alpha_sweep[k] > c.alpha_sweep[k - 1])) throw ConfigError("alpha_sweep must be strictly increasing");
  }
  if (j.contains("function")) {
    require_object(j["function"], "function");
    c.function = j["function"];
  }
  c.tol = parse_tolerances(j.contains("tolerances") ? j["tolerances"] : json());
  if (c.domain) c.domain->tail_tol = c.tol.tail_tol;
  c.quadrature = parse_quadrature(j.contains("quadrature") ? j["quadrature"] : json());
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      throw ConfigError("'seed' must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  c.kernel.seed = c.seed;
  if (j.contains("params")) c.params = require_object(j["params"], "params");
  const bool needs_domain = c.experiment != "check_kernel" && c.experiment != "concentration";
  if (needs_domain && !c.domain) throw ConfigError("experiment '" + c.experiment + "' needs a domain");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& c) {
  translate([&] {
    KernelFamily k(c.kernel);
    for (double a : c.alpha_sweep) k.radial(a, 0.5);
    if (c.domain) {
      Domain d(*c.domain);
      if (k.dim() != d.dim()) throw ConfigError("kernel and domain dimensions differ");
      make_function(c.function, d.dim());
    }
    return 0;
  }, "invalid config");
}

ScalarField make_function(const json& spec, int dim) {
  const std::string kind = get_string(spec, "kind", "linear");
  if (kind == "linear") {
    reject_unknown(spec, "function", {"kind", "coeffs", "offset"});
    auto c = get_numbers(spec, "coeffs", std::vector<double>(dim, 1.0));
    if (static_cast<int>(c.size()) != dim) throw ConfigError("linear coeffs must have one entry per dimension");
    const double b = get_number(spec, "offset", 0.0);
    return [c, b](const Point& x) {
      double v = b;
      for (int k = 0; k < x.size(); ++k) v += c[k] * x(k);
      return v;
    };
  }
  if (kind == "constant") {
    reject_unknown(spec, "function", {"kind", "value"});
    const double v = get_number(spec, "value", 1.0);
    return [v](const Point&) { return v; };
  }
  if (kind == "bump") {
    reject_unknown(spec, "function", {"kind", "centre", "radius", "amplitude"});
    auto c = get_numbers(spec, "centre", std::vector<double>(dim, 0.5));
    if (static_cast<int>(c.size()) != dim) throw ConfigError("bump centre must have one entry per dimension");
    const double r = get_number(spec, "radius", 0.5);
    const double a = get_number(spec, "amplitude", 1.0);
    if (!(r > 0.0)) throw ConfigError("bump radius must be positive");
    return [c, r, a](const Point& x) {
      double t2 = 0.0;
      for (int k = 0; k < x.size(); ++k) t2 += (x(k) - c[k]) * (x(k) - c[k]);
      t2 /= r * r;
      return t2 < 1.0 ? a * std::exp(-1.0 / (1.0 - t2)) : 0.0;
    };
  }
  if (kind == "half_indicator") {
    reject_unknown(spec, "function", {"kind", "axis", "split", "value"});
    const int axis = get_int(spec, "axis", 0);
    if (axis < 0 || axis >= dim) throw ConfigError("half_indicator axis out of range");
    const double s = get_number(spec, "split", 0.5);
    const double v = get_number(spec, "value", 1.0);
    return [axis, s, v](const Point& x) { return x(axis) >= s ? v : 0.0; };
  }
  if (kind == "sine") {
    reject_unknown(spec, "function", {"kind", "frequency"});
    const double k = get_number(spec, "frequency", 1.0);
    return [k](const Point& x) {
      double v = 1.0;
      for (int i = 0; i < x.size(); ++i) v *= std::sin(k * std::numbers::pi * x(i));
      return v;
    };
  }
  if (kind == "quadratic") {
    reject_unknown(spec, "function", {"kind"});
    return [](const Point& x) { return x.squaredNorm(); };
  }
  throw ConfigError("unknown function kind '" + kind + "'");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17e}", v);
}

namespace {

struct Context {
  const ExperimentConfig& c;
  ExperimentResult& r;

  double param(const std::string& key, double fallback) const { return get_number(c.params, key, fallback); }
  int param_int(const std::string& key, int fallback) const { return get_int(c.params, key, fallback); }
  std::vector<double> params(const std::string& key, const std::vector<double>& fallback) const {
    return get_numbers(c.params, key, fallback);
  }
  std::string param_string(const std::string& key, const std::string& fallback) const {
    return get_string(c.params, key, fallback);
  }
  QuadOptions quad() const {
    QuadOptions q;
    q.pair = c.quadrature;
    q.quad_tol = c.tol.quad_tol;
    return q;
  }
  void assert_that(const std::string& id, bool passed, double value, double tolerance) {
    r.assertions.push_back({id, passed, value, tolerance});
  }
};

std::string alpha_tag(double a) { return fmt::format("{}", a); }

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

Point domain_centre(const Domain& d) {
  Point c = Point::Zero(d.dim());
  for (int i = 0; i < d.omega_cell_count(); ++i) c += d.cells()[i].corner + 0.5 * d.spacing();
  return c / d.omega_cell_count();
}

Point point_param(const Context& ctx, const std::string& key, const Point& fallback) {
  if (!ctx.c.params.contains(key)) return fallback;
  const auto v = ctx.params(key, {});
  if (static_cast<Eigen::Index>(v.size()) != fallback.size()) throw ConfigError("'" + key + "' has the wrong dimension");
  return v.size() == 1 ? make_point(v[0]) : make_point(v[0], v[1]);
}

const std::vector<std::string> kFormColumns = {"experiment", "alpha", "value", "error_estimate", "tail_bound",
                                               "inner_part", "cross_part"};

std::vector<std::string> form_row(const std::string& experiment, double alpha, const FormReport& f) {
  return {experiment,         format_number(alpha),        format_number(f.value),     format_number(f.error_estimate),
          format_number(f.tail_bound), format_number(f.inner_part), format_number(f.cross_part)};
}

json point_json(const Point& p) {
  json a = json::array();
  for (int k = 0; k < p.size(); ++k) a.push_back(p(k));
  return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

void run_check_kernel(Context& ctx) {
  KernelFamily k(ctx.c.kernel);
  SampleSpec s;
  s.x_per_axis = ctx.param_int("x_per_axis", s.x_per_axis);
  s.x_extent = ctx.param("x_extent", s.x_extent);
  s.radii = ctx.param_int("radii", s.radii);
  s.r_min = ctx.param("r_min", s.r_min);
  s.directions = ctx.param_int("directions", s.directions);
  const double delta = ctx.param("delta", 1.0);
  ctx.r.columns = {"alpha", "worst_ratio", "min_ratio", "max_ratio", "lambda", "tail_integral", "witness_x0",
                   "witness_x1", "witness_h0", "witness_h1"};
  const auto L = check_condition_L(k, delta, ctx.c.alpha_sweep);
  bool witnessed = false;
  for (std::size_t i = 0; i < ctx.c.alpha_sweep.size(); ++i) {
    const double a = ctx.c.alpha_sweep[i];
    const auto E = check_condition_E(k, a, s);
    auto coord = [](const Point& p, int k) { return k < p.size() ? p(k) : 0.0; };
    ctx.r.rows.push_back({format_number(a), format_number(E.worst_ratio), format_number(E.min_ratio),
                          format_number(E.max_ratio), format_number(k.lambda()), format_number(L.values[i]),
                          format_number(coord(E.witness_x, 0)), format_number(coord(E.witness_x, 1)),
                          format_number(coord(E.witness_h, 0)), format_number(coord(E.witness_h, 1))});
    ctx.assert_that("condition_E@alpha=" + alpha_tag(a), E.holds, E.worst_ratio, k.lambda());
    if (!E.holds && !witnessed) {
      witnessed = true;
      ctx.r.details["witness"] = {{"alpha", a}, {"x", point_json(E.witness_x)}, {"h", point_json(E.witness_h)},
                                  {"ratio", E.worst_ratio}};
    }
  }
  ctx.assert_that("condition_L_finite", L.finite, L.values.back(), 0.0);
  ctx.assert_that("condition_L_decreasing", L.decreasing, L.values.back(), L.values.front());
  const double rel = L.values.front() > 0.0 ? L.values.back() / L.values.front() : 0.0;
  ctx.assert_that("condition_L_to_zero", L.tends_to_zero, rel, 0.1);
  const auto ad = check_almost_decreasing(k.base(), 2.0 - ctx.c.alpha_sweep.back());
  ctx.assert_that("base_almost_decreasing", ad.holds, ad.worst_ratio, k.base().almost_decreasing_constant());
  ctx.r.details["lambda"] = k.lambda();
}

double bbm_closed_form(const ExperimentConfig& c, const Domain& d, double alpha) {
  if (c.kernel.kind != KernelKind::Nu || c.kernel.base.kind != MollifierKind::PowerLaw || d.dim() != 1 ||
      d.spec().geometry != Geometry::Interval || get_string(c.function, "kind", "linear") != "linear")
    return std::nan("");
  const double slope = get_numbers(c.function, "coeffs", {1.0}).at(0);
  const double L = d.spec().bounds[1] - d.spec().bounds[0];
  const double e = 2.0 - alpha;
  const double m = std::min(L, 1.0);
  return slope * slope * (L * std::pow(m, e) - e * std::pow(m, 1.0 + e) / (1.0 + e));
}

Eigen::MatrixXd local_matrix(Context& ctx, const KernelFamily& k, const Domain& d) {
  if (ctx.c.params.contains("A")) {
    const double a = ctx.param("A", 1.0);
    return a * Eigen::MatrixXd::Identity(d.dim(), d.dim());
  }
  const Point x = point_param(ctx, "x", domain_centre(d));
  const auto dm = diffusion_matrix(k, x, ctx.param("delta", 1.0), ctx.c.alpha_sweep, ctx.c.tol.matrix_tol);
  ctx.r.details["A"] = matrix_json(dm.A);
  ctx.r.details["A_converged"] = dm.converged;
  return dm.A;
}

void run_bbm(Context& ctx) {
  KernelFamily k(ctx.c.kernel);
  Domain d(*ctx.c.domain);
  const auto u = sample_function(d, make_function(ctx.c.function, d.dim()), SpaceTag::HnuOmega, ctx.c.basis);
  const Eigen::MatrixXd A = local_matrix(ctx, k, d);
  const double local = eval_form_local(A, u, u);
  ctx.r.details["local_value"] = local;
  ctx.r.columns = kFormColumns;
  std::vector<double> gaps;
  const double cf_tol = ctx.param("closed_form_tol", 1e-6);
  for (double a : ctx.c.alpha_sweep) {
    NonlocalForm form(k, a, d, ctx.c.basis, ctx.quad());
    const auto rep = form.inner(u, u);
    ctx.r.rows.push_back(form_row("bbm_limit", a, rep));
    gaps.push_back(std::abs(rep.value - local));
    const double cf = bbm_closed_form(ctx.c, d, a);
    if (!std::isnan(cf)) {
      const double rel = std::abs(rep.value - cf) / std::abs(cf);
      ctx.assert_that("closed_form@alpha=" + alpha_tag(a), rel <= cf_tol, rel, cf_tol);
    }
  }
  ctx.assert_that("gap_decreasing", strictly_decreasing(gaps), gaps.back(), gaps.front());
  ctx.assert_that("final_gap", gaps.back() <= ctx.c.tol.bbm_tol, gaps.back(), ctx.c.tol.bbm_tol);
}

void run_diffusion(Context& ctx) {
  KernelFamily k(ctx.c.kernel);
  const int dim = k.dim();
  Point x = Point::Zero(dim);
  if (ctx.c.domain) x = domain_centre(Domain(*ctx.c.domain));
  x = point_param(ctx, "x", x);
  const double delta = ctx.param("delta", 1.0);
  const double tol = ctx.c.tol.matrix_tol;
  const auto dm = diffusion_matrix(k, x, delta, ctx.c.alpha_sweep, tol);
  ctx.r.columns = {"alpha"};
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) ctx.r.columns.push_back(fmt::format("a{}{}", i + 1, j + 1));
  ctx.r.columns.push_back("error_estimate");
  for (std::size_t n = 0; n < dm.alphas.size(); ++n) {
    std::vector<std::string> row{format_number(dm.alphas[n])};
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) row.push_back(format_number(dm.per_alpha[n](i, j)));
    row.push_back(format_number(dm.per_alpha_error[n]));
    ctx.r.rows.push_back(row);
  }
  ctx.assert_that("cauchy", dm.converged, dm.cauchy_gap, tol);
  ctx.assert_that("delta_consistency", dm.delta_consistent, dm.delta_gap, tol);
  const auto ell = check_ellipticity(dm.A, dim, k.lambda(), tol);
  const double excess = std::max(ell.lower + tol - ell.eigenvalues.minCoeff(), ell.eigenvalues.maxCoeff() - (ell.upper - tol));
  ctx.assert_that("ellipticity", ell.holds, excess, tol);
  if (ctx.c.params.contains("expect")) {
    const double target = ctx.param_string("expect", "") == "identity" ? 1.0 : 0.0;
    const double c = ctx.c.params["expect"].is_number() ? ctx.param("expect", 1.0) : target;
    const double gap = (dm.A - c * Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    ctx.assert_that("matrix_target", gap <= tol, gap, tol);
  }
  ctx.r.details["A"] = matrix_json(dm.A);
  ctx.r.details["A_half_delta"] = matrix_json(dm.A_half_delta);
  ctx.r.details["eigenvalues"] = point_json(dm.eigenvalues);
  ctx.r.details["lambda"] = k.lambda();
  if (!dm.diagnostic.empty()) ctx.r.details["diagnostic"] = dm.diagnostic;
}

void run_concentration(Context& ctx) {
  Mollifier m(ctx.c.kernel.base);
  const auto betas = ctx.params("betas", {0.0, 0.5, 1.0, 2.0});
  const auto eps = ctx.params("eps", {0.1, 0.01});
  const double R = ctx.param("R", 1.0);
  const double tol = ctx.param("tol", 1e-8);
  const double unit_tol = ctx.param("unit_tol", 1e-10);
  for (double b : betas)
    if (!(b >= 0.0)) throw ConfigError("betas must be nonnegative");
  if (!(R > 0.0)) throw ConfigError("R must be positive");
  ctx.r.columns = {"beta", "eps", "value", "closed_form"};
  const bool power = m.kind() == MollifierKind::PowerLaw;
  for (double b : betas) {
    const auto values = concentration_integral(m, b, R, eps);
    std::vector<std::pair<double, double>> by_eps;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const double rr = std::min(R, 1.0);
      const double cf = power ? eps[i] * std::pow(rr, b + eps[i]) / (b + eps[i]) : std::nan("");
      ctx.r.rows.push_back({format_number(b), format_number(eps[i]), format_number(values[i]), format_number(cf)});
      const std::string tag = fmt::format("beta={}@eps={}", b, eps[i]);
      if (power) ctx.assert_that("closed_form:" + tag, std::abs(values[i] - cf) <= tol, std::abs(values[i] - cf), tol);
      if (b == 0.0 && R >= m.support_radius(eps[i]))
        ctx.assert_that("unit_mass:" + tag, std::abs(values[i] - 1.0) <= unit_tol, std::abs(values[i] - 1.0), unit_tol);
      by_eps.emplace_back(eps[i], values[i]);
    }
    if (b > 0.0 && by_eps.size() > 1) {
      std::sort(by_eps.begin(), by_eps.end(), [](auto& x, auto& y) { return x.first > y.first; });
      std::vector<double> v;
      for (auto& p : by_eps) v.push_back(p.second);
      ctx.assert_that(fmt::format("concentrates:beta={}", b), strictly_decreasing(v), v.back(), v.front());
    }
  }
}

void run_cross(Context& ctx) {
  KernelFamily k(ctx.c.kernel);
  Domain d(*ctx.c.domain);
  check_truncation(d, k, ctx.c.alpha_sweep);
  const auto u = sample_function(d, make_function(ctx.c.function, d.dim()), SpaceTag::VnuFull, ctx.c.basis);
  ctx.r.columns = kFormColumns;
  std::vector<double> cross;
  double worst_decomposition = 0.0;
  for (double a : ctx.c.alpha_sweep) {
    NonlocalForm form(k, a, d, ctx.c.basis, ctx.quad());
    const auto rep = form.full(u, u);
    ctx.r.rows.push_back(form_row("cross_term", a, rep));
    cross.push_back(rep.cross_part);
    const double dec = std::abs(rep.value - rep.inner_part - 2.0 * rep.cross_part) / std::max(1e-300, std::abs(rep.value));
    worst_decomposition = std::max(worst_decomposition, dec);
  }
  ctx.assert_that("cross_decreasing", strictly_decreasing(cross), cross.back(), cross.front());
  ctx.assert_that("final_cross", cross.back() < ctx.c.tol.cross_tol, cross.back(), ctx.c.tol.cross_tol);
  ctx.assert_that("decomposition", worst_decomposition <= 1e-12, worst_decomposition, 1e-12);
}

void run_mosco(Context& ctx) {
  KernelFamily k(ctx.c.kernel);
  Domain d(*ctx.c.domain);
  const auto pair = translate([&] { return mosco_pair_from_string(ctx.param_string("pair", "dirichlet")); }, "params");
  if (pair == MoscoPair::Dirichlet) check_truncation(d, k, ctx.c.alpha_sweep);
  if (ctx.c.basis != Basis::P1) throw ConfigError("the mosco experiment needs the p1 basis");
  json fspec = ctx.c.function;
  if (!ctx.c.params.contains("use_function") && get_string(fspec, "kind", "linear") == "linear" &&
      !fspec.contains("coeffs"))
    fspec = {{"kind", "constant"}, {"value", 1.0}};
  const auto f = sample_function(d, make_function(fspec, d.dim()), SpaceTag::VnuFull, Basis::P1);
  MoscoOptions opt;
  opt.lambda = ctx.param("lambda", 1.0);
  if (!(opt.lambda > 0.0)) throw ConfigError("lambda must be positive");
  opt.mosco_tol = ctx.c.tol.mosco_tol;
  opt.solver_tol = ctx.c.tol.solver_tol;
  opt.matrix_tol = ctx.c.tol.matrix_tol;
  opt.delta = ctx.param("delta", 1.0);
  opt.quad = ctx.quad();
  const auto rep = mosco_sweep(f, k, ctx.c.alpha_sweep, pair, opt);
  ctx.r.columns = {"alpha", "l2_distance", "nonlocal_energy", "local_energy", "cross_term", "pass_flags"};
  for (std::size_t i = 0; i < rep.l2_distance.size(); ++i) {
    const bool dec = i == 0 || rep.l2_distance[i] < rep.l2_distance[i - 1];
    const bool below = rep.l2_distance[i] < opt.mosco_tol;
    ctx.r.rows.push_back({format_number(rep.alphas[i]), format_number(rep.l2_distance[i]),
                          format_number(rep.nonlocal_energy[i]), format_number(rep.local_energy),
                          format_number(rep.cross_term[i]), fmt::format("decreasing={};below_tol={}", int(dec), int(below))});
  }
  ctx.r.details["pair"] = to_string(pair);
  ctx.r.details["cells_per_axis"] = rep.cells_per_axis;
  ctx.r.details["A"] = matrix_json(rep.A);
  if (!rep.complete) throw NumericalError("sweep aborted: " + rep.diagnostic);
  ctx.assert_that("distances_decreasing", rep.decreasing, rep.l2_distance.back(), rep.l2_distance.front());
  ctx.assert_that("final_distance", rep.final_below_tol, rep.l2_distance.back(), opt.mosco_tol);

  // Closed-form check of the local solver: -a u'' + lambda u = c on (l, r), u = 0 at the ends.
  if (d.dim() == 1 && pair == MoscoPair::Dirichlet && get_string(fspec, "kind", "") == "constant") {
    const double c = get_number(fspec, "value", 1.0);
    const double a = rep.A(0, 0);
    const double l = d.spec().bounds[0], r = d.spec().bounds[1];
    const double kappa = std::sqrt(opt.lambda / a);
    const double mid = 0.5 * (l + r);
    double err = 0.0;
    const auto& u = *rep.local_solution;
    for (int i = 0; i < d.closure_node_count(); ++i) {
      const double x = d.nodes()[i](0);
      const double exact = c / opt.lambda * (1.0 - std::cosh(kappa * (x - mid)) / std::cosh(kappa * 0.5 * (r - l)));
      err = std::max(err, std::abs(u.full_coeffs()(i) - exact));
    }
    const double h = d.spacing()(0);
    const double ode_tol = ctx.param("ode_constant", 1.0) * h * h;
    ctx.assert_that("local_solver_ode", err <= ode_tol, err, ode_tol);
  }
}

void run_density(Context& ctx) {
  KernelFamily k(ctx.c.kernel);
  Domain d(*ctx.c.domain);
  check_truncation(d, k, ctx.c.alpha_sweep);
  json fspec = ctx.c.function;
  if (get_string(fspec, "kind", "linear") == "linear" && !fspec.contains("coeffs")) fspec = {{"kind", "half_indicator"}};
  const auto u = sample_function(d, make_function(fspec, d.dim()), SpaceTag::VnuFull, ctx.c.basis);
  const auto eps = ctx.params("eps", {0.2, 0.1, 0.05, 0.025});
  const auto dir = ctx.params("direction", std::vector<double>(d.dim(), 0.0));
  Point direction = dir.size() == 1 ? make_point(dir[0]) : make_point(dir[0], dir.size() > 1 ? dir[1] : 0.0);
  if (direction.size() != d.dim()) throw ConfigError("direction has the wrong dimension");
  if (direction.norm() == 0.0) direction(0) = 1.0;
  const double tau = ctx.param("tau", 2.0);
  ctx.r.columns = {"alpha", "eps", "seminorm", "l2_distance"};
  for (double a : ctx.c.alpha_sweep) {
    NonlocalForm form(k, a, d, ctx.c.basis, ctx.quad());
    std::vector<double> semis;
    for (double e : eps) {
      const auto v = translate([&] { return smooth_approximation(u, e, direction, tau); }, "params");
      const auto diff = difference(v, u);
      const double s = seminorm_V_nu(form, diff);
      semis.push_back(s);
      ctx.r.rows.push_back({format_number(a), format_number(e), format_number(s), format_number(l2_norm_all(diff))});
    }
    ctx.assert_that("seminorm_decreasing@alpha=" + alpha_tag(a), strictly_decreasing(semis), semis.back(), semis.front());
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult r;
  Context ctx{config, r};
  try {
    if (config.domain && config.domain->dim != config.kernel.base.dim)
      throw ConfigError("kernel and domain dimensions differ");
    const auto& e = config.experiment;
    if (e == "check_kernel") run_check_kernel(ctx);
    else if (e == "bbm_limit") run_bbm(ctx);
    else if (e == "diffusion_matrix") run_diffusion(ctx);
    else if (e == "concentration") run_concentration(ctx);
    else if (e == "cross_term") run_cross(ctx);
    else if (e == "mosco") run_mosco(ctx);
    else if (e == "density") run_density(ctx);
    else throw ConfigError("unknown experiment '" + e + "'");
    const auto failed = std::count_if(r.assertions.begin(), r.assertions.end(), [](const Assertion& a) { return !a.passed; });
    if (failed > 0) {
      r.exit_code = kExitAssertion;
      r.status = "fail";
      r.reason = fmt::format("{} of {} assertions failed", failed, r.assertions.size());
    }
  } catch (const ConfigError& e) {
    r.exit_code = kExitConfig;
    r.status = "config_error";
    r.reason = e.what();
  } catch (const std::invalid_argument& e) {
    r.exit_code = kExitConfig;
    r.status = "config_error";
    r.reason = e.what();
  } catch (const std::domain_error& e) {
    r.exit_code = kExitConfig;
    r.status = "config_error";
    r.reason = e.what();
  } catch (const std::exception& e) {
    r.exit_code = kExitNumerical;
    r.status = "numerical_error";
    r.reason = e.what();
  }
  return r;
}

std::string render_csv(const ExperimentResult& result) {
  std::string out;
  for (std::size_t i = 0; i < result.columns.size(); ++i) out += (i ? "," : "") + result.columns[i];
  out += "\n";
  for (const auto& row : result.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += "\n";
  }
  return out;
}

json render_summary(const ExperimentConfig& config, const ExperimentResult& result) {
  json s;
  s["name"] = config.name;
  s["experiment"] = config.experiment;
  s["spec_version"] = config.spec_version;
  s["seed"] = config.seed;
  s["status"] = result.status;
  s["exit_code"] = result.exit_code;
  s["reason"] = result.reason;
  if (config.domain) s["cells_per_axis"] = config.domain->n;
  json list = json::array();
  for (const auto& a : result.assertions)
    list.push_back({{"id", a.id}, {"passed", a.passed}, {"value", a.value}, {"tolerance", a.tolerance}});
  s["assertions"] = list;
  s["details"] = result.details;
  return s;
}

void write_artifacts(const std::string& out_dir, const std::string& name, const ExperimentConfig* config,
                     const ExperimentResult& result) {
  std::filesystem::create_directories(out_dir);
  const auto base = std::filesystem::path(out_dir) / name;
  {
    std::ofstream csv(base.string() + ".csv");
    csv << render_csv(result);
  }
  json summary;
  if (config) {
    summary = render_summary(*config, result);
  } else {
    summary = {{"name", name}, {"status", result.status}, {"exit_code", result.exit_code}, {"reason", result.reason},
               {"assertions", json::array()}};
  }
  std::ofstream js(base.string() + ".summary.json");
  js << summary.dump(2) << "\n";
}

std::string catalog_text() {
  struct Entry {
    std::string section, id, params, note;
  };
  std::vector<Entry> entries = {
      {"mollifier", "bounded_poly", "{d, beta}", "(d+beta)/(w eps^(d+beta)) |x|^beta on B_eps, -d < beta <= 2"},
      {"mollifier", "log_annulus", "{d, eps0}", "|x|^-d / (w log(eps0/eps)) on eps < |x| < eps0; not almost decreasing"},
      {"mollifier", "power_law", "{d}", "eps/w |x|^(eps-d) on B_1, eps = 2 - alpha"},
      {"mollifier", "profile", "{d, profile in {exp, half_gaussian, indicator}}", "|x|^(1-d) phi(|x|/eps) / (w eps)"},
      {"mollifier", "shifted_critical", "{d, eps0}", "(|x|+eps)^-d / (w b_eps) on B_eps0"},
      {"mollifier", "shifted_power", "{d, beta, eps0}", "(|x|+eps)^beta / (w b_eps) on B_eps0, beta < -d to concentrate"},
      {"mollifier", "shifted_ratio", "{d, beta, eps0}", "|x|^beta / (w b_eps (|x|+eps)^(d+beta)) on B_eps0, 0 < beta <= 2"},
      {"kernel", "j1", "{}", "C_{d,alpha} |h|^(-d-alpha); base power_law"},
      {"kernel", "j2", "{beta}", "C_{d,alpha} |h|^(-d-alpha) on B_1, (2-alpha) |h|^(-d-beta) outside; base power_law"},
      {"kernel", "j3", "{tail in {exponential, gaussian}}", "C_{d,alpha} |h|^(-d-alpha) on B_1, (2-alpha) tail outside; base power_law"},
      {"kernel", "j4", "{}", "(2-alpha)^(-d-2) on B_(2-alpha); base bounded_poly with beta = 2"},
      {"kernel", "nu", "{base}", "|h|^-2 rho_(2-alpha)(h) of the base family"},
      {"kernel", "perturbed", "{base, lambda, modes, seed}", "c(x, y) nu^alpha(x - y) with Lambda^-1 <= c <= Lambda"},
      {"kernel", "violator", "{base, gamma, lambda}", "|h|^-gamma nu^alpha(h); breaks the comparison with nu^alpha"},
  };
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.section, a.id) < std::tie(b.section, b.id);
  });
  std::string out;
  std::string section;
  for (const auto& e : entries) {
    if (e.section != section) {
      section = e.section;
      out += (out.empty() ? "" : "\n") + section + "s\n";
    }
    out += fmt::format("  {:<17} params {}\n  {:<17} {}\n", e.id, e.params, "", e.note);
  }
  out += "\nexperiments\n";
  for (const auto& e : experiment_kinds()) out += "  " + e + "\n";
  return out;
}

}  // namespace mosco
