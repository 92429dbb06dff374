#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <thread>

#include "nematic/analysis.hpp"
#include "nematic/csv.hpp"
#include "nematic/stability.hpp"
#include "nematic/tensor.hpp"

namespace nematic::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double a2 = 1.0, b2 = 1.0, c2 = 1.0;
  int k = 1;
  std::optional<double> R, rmax;
  bool infinite = false;
  int n = 1000;
  std::string grading = "composite";
  double tol = 1e-8;
  int max_iter = 100;
  std::string method = "newton";
  std::string bc = "asymptotic";
  bool allow_b_zero = false;
  std::string out;
  int jobs = 1;
  std::uint64_t seed = 20240601;
  // sweep
  std::string axis;
  std::vector<double> values;
  // stability
  std::optional<double> r_a, r_b;
  // qfield
  int angles = 256;
  int stride = 1;
};

enum class Domain { Finite, Infinite };

double finite_radius(const RunConfig& c) { return c.R.value_or(20.0); }
double infinite_radius(const RunConfig& c) { return c.rmax.value_or(c.R.value_or(200.0)); }

void validate(const RunConfig& c) {
  if (!(c.tol > 0.0) || c.tol > 1e-2) throw UsageError("--tol must lie in (0, 1e-2]");
  if (c.n < kMinCells) throw UsageError("--n must be at least " + std::to_string(kMinCells));
  if (c.max_iter < 1) throw UsageError("--max-iter must be positive");
  if (c.jobs < 1) throw UsageError("--jobs must be positive");
  if (c.method != "newton" && c.method != "energy") throw UsageError("--method must be newton or energy");
  if (c.bc != "dirichlet" && c.bc != "asymptotic") throw UsageError("--bc must be dirichlet or asymptotic");
  if (c.R && c.rmax) throw UsageError("--R and --rmax are mutually exclusive");
}

MaterialParams make_params(const RunConfig& c) {
  if (c.b2 == 0.0 && !c.allow_b_zero)
    throw RefusedMode("b2 = 0 is a diagnostic mode; pass --allow-b-zero");
  try {
    return MaterialParams(c.a2, c.b2, c.c2, c.k, c.allow_b_zero);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

fs::path output_dir(const RunConfig& c) {
  fs::path dir = ".";
  if (!c.out.empty()) dir = c.out;
  else if (const char* env = std::getenv("NEMATIC_PROFILE_OUT"); env && *env) dir = env;
  fs::create_directories(dir);
  return dir;
}

ProfilePair solve_profile(const RunConfig& c, const MaterialParams& p, Domain domain) {
  const NewtonOptions newton{c.tol, c.max_iter};
  const BcMode bc = c.bc == "dirichlet" ? BcMode::DirichletConst : BcMode::AsymptoticCorrected;
  if (domain == Domain::Infinite) {
    const double R = infinite_radius(c);
    if (R < 50.0) throw UsageError("infinite-domain runs need R_max >= 50");
    if (c.method == "newton") return solve_infinite(p, R, c.n, {bc, newton});
    if (p.b_zero()) throw RefusedMode("b2 = 0 has no solution on the infinite domain");
    const RadialGrid g = build_grid(R, c.n, Grading::composite());
    const Boundary boundary = Boundary::truncated(p, R, bc);
    auto [u, v] = default_initial_guess(p, g, boundary);
    ProfilePair init{g, u, v, p, 0.0, SolveMethod::EnergyMin, boundary};
    StepRule rule;
    rule.max_iter = std::max(c.max_iter, rule.max_iter);
    return minimize_energy(p, g, init, rule, c.tol);
  }
  Grading grading;
  try {
    grading = Grading::parse(c.grading);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const RadialGrid g = build_grid(finite_radius(c), c.n, grading);
  if (c.method == "newton") return solve_finite(p, g, std::nullopt, newton);
  const Boundary boundary = Boundary::finite(p, finite_radius(c));
  auto [u, v] = default_initial_guess(p, g, boundary);
  ProfilePair init{g, u, v, p, 0.0, SolveMethod::EnergyMin, boundary};
  StepRule rule;
  rule.max_iter = std::max(c.max_iter, rule.max_iter);
  return minimize_energy(p, g, init, rule, c.tol);
}

Domain domain_of(const RunConfig& c) {
  return (c.infinite || c.rmax) ? Domain::Infinite : Domain::Finite;
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json header(const std::string& kind, const MaterialParams& p) {
  const auto d = derive_constants(p);
  const Regime regime = classify_regime(p);
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  j["params"] = {{"a2", p.a2()}, {"b2", p.b2()}, {"c2", p.c2()}, {"k", p.k()},
                 {"allow_b_zero", p.allow_b_zero()}};
  j["regime"] = {{"tag", std::string(to_string(regime.tag))},
                 {"discriminant", regime.discriminant},
                 {"tolerance", regime.tolerance}};
  j["constants"] = {{"s_plus", d.s_plus}, {"s_minus", d.s_minus}, {"mu", number(d.mu)},
                    {"u_inf", d.u_inf},   {"v_inf", d.v_inf},     {"f_min", d.f_min}};
  return j;
}

json profile_json(const ProfilePair& pr, const RunConfig& c) {
  const bool truncated = pr.boundary.kind == Boundary::Kind::TruncatedInfinite;
  json j;
  j["domain"] = {{"type", truncated ? "truncated_infinite" : "finite"},
                 {"R", pr.grid.radius()},
                 {"bc", truncated ? json(std::string(to_string(pr.boundary.bc))) : json(nullptr)},
                 {"u_outer", pr.boundary.u_outer},
                 {"v_outer", pr.boundary.v_outer}};
  j["grid"] = {{"cells", pr.grid.size() - 1}, {"grading", pr.grid.grading().describe()}};
  j["solver"] = {{"method", std::string(to_string(pr.method))},
                 {"tol", c.tol},
                 {"max_iter", c.max_iter},
                 {"residual_norm", pr.residual_norm}};
  j["energy"] = {{"discrete", discrete_energy(pr.params, pr.grid, pr.u, pr.v)},
                 {"renormalized", discrete_energy(pr.params, pr.grid, pr.u, pr.v, true)}};
  return j;
}

json merge(json a, const json& b) {
  for (auto it = b.begin(); it != b.end(); ++it) a[it.key()] = it.value();
  return a;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_profile_csv(const fs::path& path, const ProfilePair& pr) {
  const auto res = ode_residual(pr.params, pr.grid, pr.u, pr.v, pr.boundary);
  std::vector<std::vector<double>> rows;
  rows.reserve(pr.grid.size());
  for (Eigen::Index i = 0; i < pr.grid.size(); ++i)
    rows.push_back({pr.grid.r(i), pr.u[i], pr.v[i],
                    std::max(std::abs(res.first[i]), std::abs(res.second[i]))});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, {"r", "u", "v", "residual"}, rows);
}

json bounds_json(const BoundsReport& rep) {
  json arr = json::array();
  for (const auto& b : rep.bounds)
    arr.push_back({{"name", b.name},
                   {"applicable", b.applicable},
                   {"satisfied", b.satisfied},
                   {"worst_violation", number(b.worst_violation)},
                   {"worst_location", number(b.worst_location)}});
  return {{"tolerance", rep.tolerance}, {"all_satisfied", rep.all_satisfied()}, {"bounds", arr}};
}

json tail_json(const TailFit& t) {
  return {{"window", {t.r_lo, t.r_hi}},
          {"nodes", t.nodes},
          {"fitted_u_const", t.fitted_u_const},
          {"fitted_u_coeff", t.fitted_u_coeff},
          {"fitted_v_const", t.fitted_v_const},
          {"fitted_v_coeff", t.fitted_v_coeff},
          {"predicted_u_coeff", number(t.predicted_u_coeff)},
          {"predicted_v_coeff", number(t.predicted_v_coeff)},
          {"rel_err_u", number(t.rel_err_u)},
          {"rel_err_v", number(t.rel_err_v)},
          {"v_to_u_coeff_ratio", number(t.v_to_u_coeff_ratio)},
          {"fit_residual_u", t.fit_residual_u},
          {"fit_residual_v", t.fit_residual_v},
          {"remainder_order_estimate", number(t.remainder_order_estimate)}};
}

json decoupled_json(const DecoupledTailReport& d) {
  return {{"window", {d.r_lo, d.r_hi}},
          {"x_coeff_predicted", d.x_coeff_predicted},
          {"x_coeff_fitted", d.x_coeff_fitted},
          {"y_coeff_predicted", d.y_coeff_predicted},
          {"y_coeff_fitted", d.y_coeff_fitted},
          {"x_bar_order", number(d.x_bar_order)},
          {"y_bar_order", number(d.y_bar_order)},
          {"y_over_x_max_deviation", number(d.y_over_x_max_deviation)}};
}

json stability_json(const StabilityReport& s) {
  json forms = json::object();
  for (const auto& [id, value] : s.form_values) forms[id] = number(value);
  json j = {{"k", s.k},
            {"c_k", s.c_k},
            {"support", {s.support.r_a, s.support.r_b}},
            {"support_nodes", s.support_nodes},
            {"min_rayleigh", s.min_rayleigh},
            {"tolerance", s.tolerance},
            {"certificate_present", s.certificate.has_value()},
            {"certificate_form_value", s.certificate_form_value},
            {"form_values", forms},
            {"hardy_identity_error", s.hardy_identity_error},
            {"open_question", s.open_question}};
  if (s.open_question) j["banner"] = "open question: no claim is made about the sign for k = +-1";
  return j;
}

int cmd_solve(const RunConfig& c) {
  const MaterialParams p = make_params(c);
  const ProfilePair pr = solve_profile(c, p, domain_of(c));
  const fs::path dir = output_dir(c);
  write_profile_csv(dir / "profile.csv", pr);
  write_json(dir / "energy.json", merge(header("solve", p), profile_json(pr, c)));
  std::cout << "solve: converged, residual " << format_double(pr.residual_norm) << ", energy "
            << format_double(discrete_energy(p, pr.grid, pr.u, pr.v)) << " -> " << dir.string() << '\n';
  return kOk;
}

int cmd_verify(const RunConfig& c) {
  const MaterialParams p = make_params(c);
  const ProfilePair pr = solve_profile(c, p, domain_of(c));
  const BoundsReport rep = verify_bounds(pr, 1e-6);
  const fs::path dir = output_dir(c);
  json j = merge(header("verify", p), profile_json(pr, c));
  j["bounds"] = bounds_json(rep);
  write_json(dir / "bounds.json", j);
  for (const auto& b : rep.bounds)
    std::cout << b.name << ": " << (!b.applicable ? "n/a" : b.satisfied ? "ok" : "VIOLATED") << '\n';
  return rep.all_satisfied() ? kOk : kCheckFailed;
}

int cmd_asymptotics(const RunConfig& c) {
  const MaterialParams p = make_params(c);
  if (p.b_zero()) throw RefusedMode("tail asymptotics are undefined for b2 = 0");
  const ProfilePair pr = solve_profile(c, p, Domain::Infinite);
  const double R = pr.grid.radius();
  const TailFit tf = fit_tail(pr, 0.5 * R, R);
  const DecoupledTailReport dc = decoupled_tail_check(pr);
  json j = merge(header("asymptotics", p), profile_json(pr, c));
  j["tail_fit"] = tail_json(tf);
  j["decoupled"] = decoupled_json(dc);
  write_json(output_dir(c) / "tailfit.json", j);
  std::cout << "asymptotics: A_u fitted " << format_double(tf.fitted_u_coeff) << " predicted "
            << format_double(tf.predicted_u_coeff) << ", remainder order "
            << format_double(tf.remainder_order_estimate) << '\n';
  return kOk;
}

int cmd_stability(const RunConfig& c) {
  const MaterialParams p = make_params(c);
  if (p.b_zero()) throw RefusedMode("stability runs need a truncated infinite profile, b2 > 0");
  const ProfilePair pr = solve_profile(c, p, Domain::Infinite);
  Support support = default_support(p.k(), pr.grid.radius());
  if (c.r_a) support.r_a = *c.r_a;
  if (c.r_b) support.r_b = *c.r_b;
  RayleighOptions ro;
  ro.seed = c.seed;
  const StabilityReport s = minimize_rayleigh(pr, support, ro);
  const fs::path dir = output_dir(c);
  json j = merge(header("stability", p), profile_json(pr, c));
  j["stability"] = stability_json(s);
  j["stability"]["certificate_csv"] = s.certificate ? json("certificate.csv") : json(nullptr);
  if (s.certificate) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < pr.grid.size(); ++i) rows.push_back({pr.grid.r(i), (*s.certificate)[i]});
    std::ofstream out(dir / "certificate.csv");
    write_csv(out, {"r", "xi"}, rows);
  }
  write_json(dir / "stability.json", j);
  if (s.open_question) std::cout << "open question: no claim about the sign for k = +-1\n";
  std::cout << "stability: min Rayleigh quotient " << format_double(s.min_rayleigh) << " on ["
            << format_double(support.r_a) << ", " << format_double(support.r_b) << "]"
            << (s.certificate ? ", certificate written" : "") << '\n';
  return kOk;
}

int cmd_qfield(const RunConfig& c) {
  if (c.angles < 1) throw UsageError("--angles must be positive");
  if (c.stride < 1) throw UsageError("--stride must be positive");
  const MaterialParams p = make_params(c);
  const ProfilePair pr = solve_profile(c, p, domain_of(c));
  const QField f = reconstruct(pr, c.angles, c.stride);
  const Eigen::VectorXd density = energy_density_2d(f, p);
  double sym = 0.0, trace = 0.0, e3 = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < f.node_count(); ++i) {
    const auto& q = f.matrices[i];
    const Eigen::Index j = static_cast<Eigen::Index>(i) / f.angles.size();
    sym = std::max(sym, (q - q.transpose()).cwiseAbs().maxCoeff());
    trace = std::max(trace, std::abs(q.trace()));
    e3 = std::max({e3, std::abs(q(0, 2)), std::abs(q(1, 2))});
    norm = std::max(norm, std::abs(q.squaredNorm() - f.u[j] * f.u[j] - f.v[j] * f.v[j]));
  }
  const fs::path dir = output_dir(c);
  {
    std::ofstream out(dir / "qfield.csv");
    write_qfield_csv(out, f);
  }
  json j = merge(header("qfield", p), profile_json(pr, c));
  j["qfield"] = {{"radii", f.radii.size()},
                 {"angles", f.angles.size()},
                 {"stride", c.stride},
                 {"csv", "qfield.csv"},
                 {"max_asymmetry", sym},
                 {"max_abs_trace", trace},
                 {"max_e3_offdiagonal", e3},
                 {"max_norm_mismatch", norm},
                 {"disk_energy", disk_integral(f, density)},
                 {"two_pi_discrete_energy", 2.0 * std::numbers::pi * discrete_energy(p, pr.grid, pr.u, pr.v)}};
  write_json(dir / "qfield.json", j);
  std::cout << "qfield: " << f.node_count() << " nodes -> " << (dir / "qfield.csv").string() << '\n';
  return kOk;
}

json sweep_entry(const RunConfig& c, double value) {
  json e;
  e["value"] = value;
  RunConfig rc = c;
  if (c.axis == "a2") rc.a2 = value;
  else if (c.axis == "b2") rc.b2 = value;
  else if (c.axis == "c2") rc.c2 = value;
  else rc.k = static_cast<int>(value);
  try {
    const MaterialParams p = make_params(rc);
    const auto d = derive_constants(p);
    e["s_plus"] = d.s_plus;
    e["regime"] = std::string(to_string(classify_regime(p).tag));
    const Domain domain = domain_of(rc);
    const ProfilePair pr = solve_profile(rc, p, domain);
    e["status"] = "ok";
    e["residual_norm"] = pr.residual_norm;
    e["energy"] = discrete_energy(p, pr.grid, pr.u, pr.v, domain == Domain::Infinite);
    if (domain == Domain::Infinite && !p.b_zero()) {
      const double R = pr.grid.radius();
      const TailFit tf = fit_tail(pr, 0.5 * R, R);
      e["tail_rel_err_u"] = number(tf.rel_err_u);
      e["tail_rel_err_v"] = number(tf.rel_err_v);
      RayleighOptions ro;
      ro.seed = rc.seed;
      e["min_rayleigh"] = minimize_rayleigh(pr, default_support(p.k(), R), ro).min_rayleigh;
    } else {
      e["tail_rel_err_u"] = nullptr;
      e["tail_rel_err_v"] = nullptr;
      e["min_rayleigh"] = nullptr;
    }
  } catch (const NoConvergence&) {
    e["status"] = "no_convergence";
  } catch (const SignViolation&) {
    e["status"] = "sign_violation";
  } catch (const RefusedMode&) {
    e["status"] = "refused";
  } catch (const std::exception&) {
    e["status"] = "invalid";
  }
  for (const char* key : {"s_plus", "regime", "residual_norm", "energy", "tail_rel_err_u",
                          "tail_rel_err_v", "min_rayleigh"})
    if (!e.contains(key)) e[key] = nullptr;
  return e;
}

int cmd_sweep(const RunConfig& c) {
  if (c.axis != "a2" && c.axis != "b2" && c.axis != "c2" && c.axis != "k")
    throw UsageError("--axis must be one of a2, b2, c2, k");
  if (c.values.empty()) throw UsageError("--values needs at least one entry");
  std::vector<double> values = c.values;
  std::sort(values.begin(), values.end());
  if (c.axis == "k")
    for (double v : values)
      if (v != std::round(v) || v == 0.0) throw UsageError("k values must be nonzero integers");

  std::vector<json> results(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) results[i] = sweep_entry(c, values[i]);
  };
  const int workers = std::min<int>(c.jobs, static_cast<int>(values.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "sweep";
  j["params"] = {{"a2", c.a2}, {"b2", c.b2}, {"c2", c.c2}, {"k", c.k}, {"allow_b_zero", c.allow_b_zero}};
  j["axis"] = c.axis;
  j["domain"] = {{"type", domain_of(c) == Domain::Infinite ? "truncated_infinite" : "finite"},
                 {"R", domain_of(c) == Domain::Infinite ? infinite_radius(c) : finite_radius(c)}};
  j["results"] = results;
  write_json(output_dir(c) / "sweep.json", j);
  // Exit with the code of the first failing entry in value order.
  int code = kOk;
  for (const auto& e : results) {
    const std::string status = e["status"].get<std::string>();
    std::cout << c.axis << "=" << format_double(e["value"].get<double>()) << ": " << status << '\n';
    if (code != kOk || status == "ok") continue;
    if (status == "no_convergence") code = kNoConvergence;
    else if (status == "sign_violation") code = kSignViolation;
    else if (status == "refused") code = kRefusedMode;
    else code = kUsage;
  }
  return code;
}

void add_common(CLI::App& app, RunConfig& c) {
  app.add_option("--a2", c.a2, "a^2 (> 0)");
  app.add_option("--b2", c.b2, "b^2 (>= 0; 0 needs --allow-b-zero)");
  app.add_option("--c2", c.c2, "c^2 (> 0)");
  app.add_option("--k", c.k, "winding index (nonzero)");
  app.add_option("--R", c.R, "finite domain radius");
  app.add_option("--rmax", c.rmax, "truncated infinite domain radius");
  app.add_flag("--infinite", c.infinite, "treat --R as R_max of a truncated infinite domain");
  app.add_option("--n", c.n, "grid cells");
  app.add_option("--grading", c.grading, "uniform | composite | geometric:RATIO");
  app.add_option("--tol", c.tol, "solver tolerance");
  app.add_option("--max-iter", c.max_iter, "solver iteration limit");
  app.add_option("--method", c.method, "newton | energy");
  app.add_option("--bc", c.bc, "dirichlet | asymptotic (infinite domains)");
  app.add_flag("--allow-b-zero", c.allow_b_zero, "enable the b^2 = 0 diagnostic mode");
  app.add_option("--out", c.out, "output directory (default $NEMATIC_PROFILE_OUT or .)");
  app.add_option("--jobs", c.jobs, "concurrent sweep runs");
  app.add_option("--seed", c.seed, "seed for randomized checks");
}

}  // namespace

int run(int argc, const char* const* argv) {
  RunConfig c;
  CLI::App app{"Radial profiles of k-radially symmetric nematic point defects"};
  app.name("nematic");
  app.set_config("--config", "", "flat key = value file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  add_common(app, c);
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "solve the radial system and write profile.csv, energy.json")->fallthrough();
  auto* verify = app.add_subcommand("verify", "solve and check the pointwise bounds")->fallthrough();
  auto* asym = app.add_subcommand("asymptotics", "solve on a truncated infinite domain and fit the tail")->fallthrough();
  auto* stab = app.add_subcommand("stability", "minimal Rayleigh quotient of the reduced second variation")->fallthrough();
  stab->add_option("--r-a", c.r_a, "inner support radius");
  stab->add_option("--r-b", c.r_b, "outer support radius");
  auto* sweep = app.add_subcommand("sweep", "independent runs over one parameter")->fallthrough();
  sweep->add_option("--axis", c.axis, "a2 | b2 | c2 | k")->required();
  sweep->add_option("--values", c.values, "comma separated values")->delimiter(',')->required();
  auto* qf = app.add_subcommand("qfield", "reconstruct the Q-tensor field on a polar grid")->fallthrough();
  qf->add_option("--angles", c.angles, "angular samples");
  qf->add_option("--stride", c.stride, "keep every stride-th radial node");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    validate(c);
    if (*solve) return cmd_solve(c);
    if (*verify) return cmd_verify(c);
    if (*asym) return cmd_asymptotics(c);
    if (*stab) return cmd_stability(c);
    if (*sweep) return cmd_sweep(c);
    if (*qf) return cmd_qfield(c);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const RefusedMode& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kRefusedMode;
  } catch (const NoConvergence& e) {
    std::cerr << "no convergence: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const SignViolation& e) {
    std::cerr << "sign violation: " << e.what() << '\n';
    return kSignViolation;
  } catch (const SupportViolation& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
  return kUsage;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace nematic::cli
