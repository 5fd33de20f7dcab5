#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "qsum/errors.hpp"
#include "qsum/io.hpp"
#include "qsum/solver.hpp"
#include "qsum/suites.hpp"
#include "qsum/transforms.hpp"

namespace fs = std::filesystem;
using namespace qsum;
using io::json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kVerifyFailed = 1, kInvalidSpec = 2, kNumeric = 3, kUsage = 64 };

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSpec:
    case ErrorKind::BadDirection:
    case ErrorKind::BoundViolation:
    case ErrorKind::GridMismatch:
      return kInvalidSpec;
    case ErrorKind::InvalidArgument:
      return kUsage;
    default:
      return kNumeric;
  }
}

struct Globals {
  std::size_t threads = 1;
  std::uint64_t seed = 1;
  std::string format = "csv";
  bool timestamp = false;
};

/// Collects the files of one command and writes the manifest that names them.
class Run {
 public:
  Run(std::string command, std::optional<fs::path> out, const Globals& g) : out_(std::move(out)), g_(g) {
    manifest_["tool"] = "qsum";
    manifest_["version"] = kVersion;
    manifest_["command"] = std::move(command);
    manifest_["settings"] = {{"threads", g.threads}, {"seed", g.seed}, {"format", g.format}};
    manifest_["files"] = json::array();
  }

  json& manifest() { return manifest_; }
  bool to_stdout() const { return !out_.has_value(); }
  std::string ref() const { return to_stdout() ? "stdout" : "manifest.json"; }

  void problem(const io::ProblemFile& pf) {
    const std::string canonical = pf.canonical.dump();
    spec_hash_ = io::git_blob_sha1(canonical);
    manifest_["spec_hash"] = spec_hash_;
    manifest_["spec"] = pf.canonical;
  }

  void emit_json(const std::string& name, json j) {
    j["manifest"] = ref();
    if (!spec_hash_.empty()) j["spec_hash"] = spec_hash_;
    emit(name, j.dump(1) + "\n");
  }

  void emit_table(const std::string& stem, const io::Table& t) {
    if (g_.format == "json")
      emit_json(stem + ".json", t.to_json(ref()));
    else
      emit(stem + ".csv", t.to_csv(ref() + (spec_hash_.empty() ? "" : " spec_hash=" + spec_hash_)));
  }

  void finish(json outcome) {
    manifest_["outcome"] = std::move(outcome);
    if (g_.timestamp) {
      const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      char buf[32];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
      manifest_["timestamp"] = buf;
    }
    if (!to_stdout()) io::write_file(*out_ / "manifest.json", manifest_.dump(1) + "\n");
  }

 private:
  void emit(const std::string& name, const std::string& contents) {
    if (to_stdout()) {
      std::cout << contents;
      return;
    }
    manifest_["files"].push_back({{"name", name}, {"sha1", io::write_file(*out_ / name, contents)}});
  }

  std::optional<fs::path> out_;
  const Globals& g_;
  json manifest_;
  std::string spec_hash_;
};

json quadrature_settings(const SumSetup& s, const FieldOptions& f) {
  return {{"ray",
           {{"variable", "s = log|u|"},
            {"window", "log|t| +- sqrt(2 (log q / k) (log(1e12) + 2))"},
            {"step", "width_fraction * sqrt(log q / k)"},
            {"width_fraction", s.ray_width_fraction},
            {"min_doublings", s.ray_min_doublings},
            {"certified_radius", s.certified_radius}}},
          {"deceleration_contour",
           {{"radius", s.contour_radius},
            {"nodes_per_turn", s.contour_nodes},
            {"orientation", "x = radius e^{it}, t increasing"},
            {"borel_prefactor", "q^{1/(8k)} sqrt(k) / sqrt(2 pi log q), real after dx/x = i dt"}}},
          {"fourier", {{"rule", "trapezoid on the problem grid"}, {"beta_prime", s.beta_prime}}},
          {"continuation", {{"series_fraction", f.series_fraction}, {"contour_nodes", f.contour_nodes}}}};
}

io::Table suite_table(const SuiteResult& r) {
  io::Table t{{"suite", "check", "case", "error", "tolerance", "pass", "witness"}, {}};
  for (const auto& row : r.rows)
    t.rows.push_back({r.suite, row.check, row.label, row.error, row.tolerance, row.pass, row.witness});
  return t;
}

json suite_outcome(const SuiteResult& r) {
  std::size_t failed = 0;
  for (const auto& row : r.rows) failed += row.pass ? 0 : 1;
  return {{"suite", r.suite}, {"rows", r.rows.size()}, {"failed", failed}, {"pass", r.pass()}};
}

int cmd_validate(const std::string& file, const std::optional<fs::path>& out, const Globals& g) {
  Run run("validate", out, g);
  const auto pf = io::load_problem(file);
  run.problem(pf);
  const auto res = geometry_suite(pf.spec, pf.direction);
  io::Table t{{"condition", "label", "ok", "witness"}, {}};
  bool ok = true;
  for (const auto& row : res.rows) {
    if (row.check != "structure" && row.check != "sector" && row.check != "lower_bound") continue;
    t.rows.push_back({row.check, row.label, row.pass, row.witness});
    ok = ok && row.pass;
    if (!row.pass) std::cerr << "violation: " << row.check << " " << row.label << ": " << row.witness << "\n";
  }
  run.emit_table("validate", t);
  run.finish({{"valid", ok}});
  return ok ? kOk : kInvalidSpec;
}

void require_valid(const ProblemSpec& spec) {
  for (const auto& c : check_structure(spec))
    if (!c.ok) fail(ErrorKind::InvalidSpec, "condition " + c.name + " fails: " + c.witness);
}

int cmd_solve(const std::string& file, const SolverOptions& opt, const fs::path& out, const Globals& g) {
  Run run("solve", out, g);
  const auto pf = io::load_problem(file);
  run.problem(pf);
  require_valid(pf.spec);
  const auto& spec = pf.spec;
  const auto cfg = select_sector(spec, pf.direction);
  pm_lower_bound_report(spec, cfg);
  run.manifest()["config"] = io::sector_to_json(cfg);
  run.manifest()["arguments"] = {{"order", opt.order}, {"tol", opt.tol}, {"force_triangular", opt.force_triangular}};

  const auto sol = solve_fixed_point(spec, cfg, opt);
  const auto U = assemble_U_hat(sol, spec.params);
  run.emit_json("omega.json", io::series_to_json(sol.omega));
  run.emit_json("U_hat.json", io::series_to_json(U));

  const double beta_prime = spec.beta / 2.0;
  std::vector<cplx> zs;
  for (double im : {0.0, beta_prime / 2})
    for (int i = -4; i <= 4; ++i) zs.emplace_back(0.5 * i, im);
  const auto table = assemble_u_hat(U, zs, beta_prime);
  io::Table t{{"p", "z_re", "z_im", "re", "im"}, {}};
  for (std::size_t p = 1; p <= U.order(); ++p)
    for (std::size_t i = 0; i < zs.size(); ++i)
      t.rows.push_back({p, zs[i].real(), zs[i].imag(), table[p - 1][i].real(), table[p - 1][i].imag()});
  run.emit_table("u_hat", t);

  json report = io::solution_report(sol, opt);
  report["sector"] = io::sector_to_json(cfg);
  json orders = json::array();
  for (const auto& r : main_equation_residual(U, spec))
    orders.push_back({{"order", r.order}, {"absolute", r.absolute}, {"relative", r.relative}, {"counted", r.counted}});
  report["main_equation_residual"] = orders;
  run.emit_json("report.json", report);
  run.finish({{"iterations", sol.iterations}, {"residual_1R", sol.residual_1R}, {"contraction_warning", sol.contraction_warning}});
  if (sol.contraction_warning) std::cerr << "warning: no contraction; result relies on the triangular structure\n";
  return kOk;
}

int cmd_verify(const std::optional<std::string>& file, const std::string& suite, std::size_t order,
               const std::optional<fs::path>& out, const Globals& g) {
  Run run("verify", out, g);
  SuiteResult res;
  if (suite == "identities") {
    if (file) run.problem(io::load_problem(*file));
    res = identities_suite(g.seed);
  } else {
    if (!file) fail(ErrorKind::InvalidArgument, "suite " + suite + " needs a problem file");
    const auto pf = io::load_problem(*file);
    run.problem(pf);
    if (suite == "geometry") {
      res = geometry_suite(pf.spec, pf.direction);
    } else {
      require_valid(pf.spec);
      const auto cfg = select_sector(pf.spec, pf.direction);
      run.manifest()["config"] = io::sector_to_json(cfg);
      run.manifest()["quadrature"] = quadrature_settings(SumSetup::from(pf.spec, cfg), {});
      if (suite == "theorem2") {
        Theorem2Options o;
        o.order = order;
        res = theorem2_suite(pf.spec, pf.direction, o);
      } else {
        res = asymptotics_suite(pf.spec, pf.direction, order);
      }
    }
  }
  run.manifest()["arguments"] = {{"suite", suite}, {"order", order}};
  run.emit_table("verify_" + suite, suite_table(res));
  run.finish(suite_outcome(res));
  if (!res.pass())
    for (const auto& row : res.rows)
      if (!row.pass) std::cerr << "FAIL " << row.check << " " << row.label << ": " << row.witness << "\n";
  return res.pass() ? kOk : kVerifyFailed;
}

struct SumPoint {
  double t_r, t_theta, z_re, z_im;
};

std::vector<SumPoint> read_points(const fs::path& file) {
  std::istringstream in(io::read_file(file));
  std::vector<SumPoint> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    for (auto& c : line)
      if (c == ',') c = ' ';
    std::istringstream ls(line);
    SumPoint p{};
    if (!(ls >> p.t_r >> p.t_theta >> p.z_re >> p.z_im)) {
      if (pts.empty() && line.find_first_of("abcdefghijklmnopqrstuvwxyz_") != std::string::npos) continue;  // header
      fail(ErrorKind::InvalidArgument, "points file: cannot parse \"" + line + "\"");
    }
    pts.push_back(p);
  }
  return pts;
}

int cmd_sum(const std::string& file, const fs::path& points_file, const std::optional<fs::path>& omega_file,
            std::size_t order, const std::optional<fs::path>& out, const Globals& g) {
  Run run("sum", out, g);
  const auto pf = io::load_problem(file);
  run.problem(pf);
  require_valid(pf.spec);
  const auto& spec = pf.spec;
  const auto cfg = select_sector(spec, pf.direction);
  run.manifest()["config"] = io::sector_to_json(cfg);
  const auto setup = SumSetup::from(spec, cfg);
  const FieldOptions fopt{};
  run.manifest()["quadrature"] = quadrature_settings(setup, fopt);

  // With --omega the Borel function is that polynomial, used on the whole ray.
  std::optional<FourierSeries> poly;
  std::unique_ptr<BorelField> field;
  if (omega_file) {
    poly = io::load_series(*omega_file);
    if (!(poly->zero().grid() == spec.grid)) fail(ErrorKind::GridMismatch, "omega is not on the problem grid");
    run.manifest()["omega"] = {{"file", omega_file->filename().string()},
                               {"sha1", io::git_blob_sha1(io::read_file(*omega_file))}};
  } else {
    SolverOptions so;
    so.order = order;
    const auto sol = solve_fixed_point(spec, cfg, so);
    field = std::make_unique<BorelField>(spec, cfg, sol.omega, fopt);
    run.manifest()["arguments"] = {{"order", order}};
  }
  const SectorFunction omega = field ? field->as_function() : SectorFunction([&](cplx u) {
    FourierFn acc = poly->zero();
    cplx up = 1.0;
    for (std::size_t p = 1; p <= poly->order(); ++p) {
      up *= u;
      acc += poly->coeff(p) * up;
    }
    return acc;
  });

  io::Table t{{"t_r", "t_theta", "z_re", "z_im", "re", "im", "ray_error", "grid_error", "contour_error", "budget", "status"},
              {}};
  std::size_t flagged = 0;
  for (const auto& p : read_points(points_file)) {
    std::vector<json> row{p.t_r, p.t_theta, p.z_re, p.z_im};
    const cplx z(p.z_re, p.z_im);
    auto flag = [&](const std::string& status) {
      row.insert(row.end(), {nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, status});
      ++flagged;
    };
    if (p.t_r < 0.0) {
      flag("InvalidArgument");
    } else if (std::abs(p.z_im) > setup.beta_prime) {
      flag("StripViolation");
    } else if (p.t_r == 0.0) {
      row.insert(row.end(), {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, "ok"});
    } else {
      try {
        const auto v = gq_sum(omega, CoveringPoint(p.t_r, p.t_theta), z, setup);
        row.insert(row.end(), {v.value.real(), v.value.imag(), v.ray_error, v.grid_error, v.contour_error, v.budget(), "ok"});
      } catch (const Error& e) {
        flag(std::string(to_string(e.kind())));
      }
    }
    t.rows.push_back(std::move(row));
  }
  run.emit_table("sum", t);
  run.finish({{"points", t.rows.size()}, {"flagged", flagged}});
  return kOk;
}

int cmd_transform(const std::string& kind, int power, double q, int k, double r, double theta, int p, double radius,
                  const std::optional<fs::path>& out, const Globals& g) {
  Run run("transform", out, g);
  const QParams P(q, k);
  const CoveringPoint x(r, theta);
  auto mono = [power](cplx u) { return std::pow(u, power); };
  QuadResult res;
  double exponent = 0.0;
  if (kind == "laplace") {
    res = q_laplace(mono, x, RayQuadrature::around(r, theta, P), P);
    exponent = to_double(borel_exponent(power, k));
  } else if (kind == "borel") {
    res = q_borel_analytic([&](const CoveringPoint& c) { return mono(c.to_complex()); }, x,
                           CircleContour::around(radius, theta, k, P.log_q()), P);
    exponent = -to_double(borel_exponent(power, k));
  } else {
    res = deceleration_integral(mono, p, x,
                                CircleContour::around(radius, theta, deceleration_orders(p, k).kernel, P.log_q()), P);
    exponent = to_double(deceleration_exponent(power, p, k));
  }
  const cplx formal = std::pow(q, exponent) * std::pow(x.to_complex(), power);
  io::Table t{{"kind", "power", "q", "k", "r", "theta", "re", "im", "formal_re", "formal_im", "abs_error", "quad_error", "nodes"},
              {}};
  t.rows.push_back({kind, power, q, k, r, theta, res.value.real(), res.value.imag(), formal.real(), formal.imag(),
                    std::abs(res.value - formal), res.error, res.nodes});
  run.emit_table("transform", t);
  run.manifest()["arguments"] = {{"kind", kind}, {"power", power}, {"q", q}, {"k", k}, {"r", r}, {"theta", theta},
                                 {"p", p}, {"radius", radius}};
  run.finish({{"abs_error", std::abs(res.value - formal)}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"q-Borel-Laplace summation for q-difference-Mahler problems"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (evaluation is currently sequential)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Seed for randomized suites");
  app.add_option("--format", g.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--timestamp", g.timestamp, "Record the wall-clock time in the manifest");

  std::string spec_file;
  std::optional<std::string> out_dir;

  auto* validate = app.add_subcommand("validate", "Check the structural and gap conditions of a problem");
  validate->add_option("spec", spec_file, "Problem JSON")->required()->check(CLI::ExistingFile);
  validate->add_option("--out", out_dir, "Output directory (default: stdout)");

  SolverOptions sopt;
  std::string solve_out = ".";
  auto* solve = app.add_subcommand("solve", "Solve the Borel-plane fixed point and write the formal solution");
  solve->add_option("spec", spec_file, "Problem JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--order", sopt.order, "Truncation order N")->check(CLI::PositiveNumber);
  solve->add_option("--tol", sopt.tol, "Picard step tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--out", solve_out, "Output directory");
  solve->add_flag("--force-triangular", sopt.force_triangular, "Iterate through norm blow-up");

  std::optional<std::string> verify_spec;
  std::string suite;
  std::size_t verify_order = 16;
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("spec", verify_spec, "Problem JSON (optional for identities)")->check(CLI::ExistingFile);
  verify->add_option("--suite", suite, "Suite name")
      ->required()
      ->check(CLI::IsMember({"identities", "geometry", "theorem2", "asymptotics"}));
  verify->add_option("--order", verify_order, "Truncation order N")->check(CLI::PositiveNumber);
  verify->add_option("--out", out_dir, "Output directory (default: stdout)");

  std::string points_file;
  std::optional<std::string> omega_file;
  std::size_t sum_order = 16;
  auto* sum = app.add_subcommand("sum", "Evaluate the G_q-sum at listed points");
  sum->add_option("spec", spec_file, "Problem JSON")->required()->check(CLI::ExistingFile);
  sum->add_option("--points", points_file, "CSV of t_r,t_theta,z_re,z_im")->required()->check(CLI::ExistingFile);
  sum->add_option("--omega", omega_file, "Borel-plane polynomial to sum instead of the solution")
      ->check(CLI::ExistingFile);
  sum->add_option("--order", sum_order, "Truncation order N")->check(CLI::PositiveNumber);
  sum->add_option("--out", out_dir, "Output directory (default: stdout)");

  std::string kind = "laplace";
  int power = 1, k = 1, p = 2;
  double q = 2.0, r = 0.1, theta = 0.0, radius = 0.25;
  auto* transform = app.add_subcommand("transform", "Evaluate one transform of a monomial against its formal value");
  transform->add_option("--kind", kind, "laplace, borel or deceleration")
      ->check(CLI::IsMember({"laplace", "borel", "deceleration"}));
  transform->add_option("--power", power, "Monomial power n")->check(CLI::NonNegativeNumber);
  transform->add_option("--q", q, "Base q > 1");
  transform->add_option("--k", k, "Order k >= 1")->check(CLI::PositiveNumber);
  transform->add_option("--r", r, "Modulus of the evaluation point")->check(CLI::PositiveNumber);
  transform->add_option("--theta", theta, "Argument of the evaluation point on the covering");
  transform->add_option("--p", p, "Mahler power for deceleration")->check(CLI::Range(2, 64));
  transform->add_option("--radius", radius, "Contour radius")->check(CLI::PositiveNumber);
  transform->add_option("--out", out_dir, "Output directory (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  auto out_path = [&]() -> std::optional<fs::path> {
    if (out_dir) return fs::path(*out_dir);
    return std::nullopt;
  };
  try {
    if (*validate) return cmd_validate(spec_file, out_path(), g);
    if (*solve) return cmd_solve(spec_file, sopt, solve_out, g);
    if (*verify) return cmd_verify(verify_spec, suite, verify_order, out_path(), g);
    if (*sum)
      return cmd_sum(spec_file, points_file, omega_file ? std::optional<fs::path>(*omega_file) : std::nullopt, sum_order,
                     out_path(), g);
    if (*transform) return cmd_transform(kind, power, q, k, r, theta, p, radius, out_path(), g);
  } catch (const Error& e) {
    std::cerr << "qsum: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "qsum: " << e.what() << "\n";
    return kNumeric;
  }
  return kUsage;
}
