#include "qsum/io.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "qsum/errors.hpp"

namespace qsum::io {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(ErrorKind::InvalidSpec, where + ": " + what);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<int>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj[key], where + "." + key) : fallback;
}

void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) bad(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) bad(where, "unknown field \"" + key + "\"");
}

Polynomial polynomial(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) bad(where, "expected a non-empty coefficient array");
  Polynomial p;
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      p.coeffs.push_back(complex_from_json(j[i]));
    } catch (const Error&) {
      bad(where + "[" + std::to_string(i) + "]", "expected a number or [re, im]");
    }
  }
  return p;
}

json polynomial_to_json(const Polynomial& p) {
  json out = json::array();
  for (auto c : p.coeffs) out.push_back(complex_to_json(c));
  return out;
}

fs::path resolve(const std::string& name, const fs::path& base_dir) {
  const fs::path p(name);
  if (p.is_absolute()) return p;
  if (fs::exists(base_dir / p)) return base_dir / p;
  return data_dir() / p;
}

json grid_to_json(const MGrid& g) { return {{"half", g.half}, {"step", g.step}}; }

MGrid grid_from_json(const json& j, const std::string& where) {
  only_keys(j, {"half", "step"}, where);
  if (!j.contains("half") || !j.contains("step")) bad(where, "needs half and step");
  const int half = integer(j["half"], where + ".half");
  const double step = number(j["step"], where + ".step");
  if (half < 1 || !(step > 0.0)) bad(where, "half must be >= 1 and step > 0");
  return MGrid(static_cast<std::size_t>(half), step);
}

}  // namespace

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  fail(ErrorKind::InvalidSpec, "expected a number or [re, im], got " + j.dump());
}

json complex_to_json(cplx z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

json fourier_to_json(const FourierFn& f) {
  json re = json::array(), im = json::array();
  for (auto v : f.values()) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  return {{"re", std::move(re)}, {"im", std::move(im)}};
}

FourierFn fourier_from_json(const json& j, const MGrid& grid, double beta, double mu, const fs::path& base_dir) {
  const std::string where = "profile";
  if (!j.is_object()) bad(where, "expected an object");
  if (j.contains("file")) {
    only_keys(j, {"file"}, where);
    if (!j["file"].is_string()) bad(where, "file must be a string");
    const fs::path p = resolve(j["file"].get<std::string>(), base_dir);
    json inner;
    try {
      inner = json::parse(read_file(p));
    } catch (const json::exception& e) {
      bad(p.string(), e.what());
    } catch (const Error& e) {
      bad(where, e.what());
    }
    return fourier_from_json(inner, grid, beta, mu, p.parent_path());
  }
  if (j.contains("gaussian")) {
    only_keys(j, {"gaussian"}, where);
    const auto& g = j["gaussian"];
    only_keys(g, {"scale", "width", "shift"}, where + ".gaussian");
    const cplx scale = g.contains("scale") ? complex_from_json(g["scale"]) : cplx(1.0);
    const double width = number_or(g, "width", 1.0, where);
    const double shift = number_or(g, "shift", 0.0, where);
    if (!(width > 0.0)) bad(where, "gaussian width must be positive");
    return FourierFn::sample(
        grid, [=](double m) { return scale * std::exp(-(m - shift) * (m - shift) / (2 * width * width)); }, beta, mu);
  }
  std::vector<cplx> values;
  if (j.contains("values")) {
    only_keys(j, {"values"}, where);
    if (!j["values"].is_array()) bad(where, "values must be an array");
    for (const auto& v : j["values"]) values.push_back(complex_from_json(v));
  } else if (j.contains("re")) {
    only_keys(j, {"re", "im"}, where);
    const auto& re = j["re"];
    const json im = j.contains("im") ? j["im"] : json::array();
    if (!re.is_array() || !im.is_array() || (!im.empty() && im.size() != re.size()))
      bad(where, "re and im must be arrays of equal length");
    for (std::size_t i = 0; i < re.size(); ++i)
      values.emplace_back(number(re[i], where + ".re"), im.empty() ? 0.0 : number(im[i], where + ".im"));
  } else {
    bad(where, "expected one of values, re/im, gaussian, file");
  }
  if (values.size() != grid.size())
    bad(where, std::to_string(values.size()) + " samples for a grid of " + std::to_string(grid.size()));
  return FourierFn(grid, std::move(values), beta, mu);
}

ProblemFile parse_problem(const json& j, const fs::path& base_dir) {
  only_keys(j,
            {"name", "description", "q", "k", "eps_abs", "eps_rel", "Q", "R_D", "alpha_D", "d_D", "beta", "mu", "grid",
             "terms", "forcing", "direction"},
            "problem");
  for (const char* key : {"q", "k", "Q", "R_D"})
    if (!j.contains(key)) bad("problem", std::string("missing field \"") + key + "\"");

  ProblemFile out;
  ProblemSpec& s = out.spec;
  try {
    s.params = QParams(number(j["q"], "q"), integer(j["k"], "k"), number_or(j, "eps_abs", 1e-12, "problem"),
                       number_or(j, "eps_rel", 1e-10, "problem"));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidSpec) throw;
    bad("problem", e.what());
  }
  s.Q = polynomial(j["Q"], "Q");
  s.RD = polynomial(j["R_D"], "R_D");
  s.alpha_D = number_or(j, "alpha_D", 1.0, "problem");
  s.d_D = j.contains("d_D") ? integer(j["d_D"], "d_D") : 1;
  s.beta = number_or(j, "beta", 1.0, "problem");
  s.mu = number_or(j, "mu", 2.0, "problem");
  if (!(s.beta > 0.0) || !(s.mu > 1.0)) bad("problem", "need beta > 0 and mu > 1");
  s.grid = j.contains("grid") ? grid_from_json(j["grid"], "grid") : MGrid::defaults(s.beta);
  out.direction = number_or(j, "direction", 0.0, "problem");

  if (j.contains("terms")) {
    if (!j["terms"].is_array()) bad("terms", "expected an array");
    for (std::size_t i = 0; i < j["terms"].size(); ++i) {
      const auto& t = j["terms"][i];
      const std::string where = "terms[" + std::to_string(i) + "]";
      only_keys(t, {"l0", "l1", "l2", "R", "A"}, where);
      for (const char* key : {"l0", "l1", "l2", "R", "A"})
        if (!t.contains(key)) bad(where, std::string("missing field \"") + key + "\"");
      MahlerTerm m;
      m.l0 = integer(t["l0"], where + ".l0");
      m.l1 = integer(t["l1"], where + ".l1");
      m.l2 = integer(t["l2"], where + ".l2");
      m.R = polynomial(t["R"], where + ".R");
      m.A = fourier_from_json(t["A"], s.grid, s.beta, s.mu, base_dir);
      s.terms.push_back(std::move(m));
    }
  }
  if (j.contains("forcing")) {
    if (!j["forcing"].is_array()) bad("forcing", "expected an array");
    for (std::size_t i = 0; i < j["forcing"].size(); ++i) {
      const auto& f = j["forcing"][i];
      const std::string where = "forcing[" + std::to_string(i) + "]";
      only_keys(f, {"j", "F"}, where);
      if (!f.contains("j") || !f.contains("F")) bad(where, "needs j and F");
      s.forcing.push_back({integer(f["j"], where + ".j"), fourier_from_json(f["F"], s.grid, s.beta, s.mu, base_dir)});
    }
  }
  out.canonical = problem_to_json(s, out.direction);
  return out;
}

ProblemFile load_problem(const fs::path& file) {
  json j;
  try {
    j = json::parse(read_file(file));
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidSpec, file.string() + ": " + e.what());
  }
  return parse_problem(j, file.parent_path());
}

json problem_to_json(const ProblemSpec& s, double direction) {
  json j;
  j["q"] = s.params.q();
  j["k"] = s.params.k();
  j["eps_abs"] = s.params.eps_abs();
  j["eps_rel"] = s.params.eps_rel();
  j["Q"] = polynomial_to_json(s.Q);
  j["R_D"] = polynomial_to_json(s.RD);
  j["alpha_D"] = s.alpha_D;
  j["d_D"] = s.d_D;
  j["beta"] = s.beta;
  j["mu"] = s.mu;
  j["grid"] = grid_to_json(s.grid);
  j["direction"] = direction;
  j["terms"] = json::array();
  for (const auto& t : s.terms)
    j["terms"].push_back({{"l0", t.l0}, {"l1", t.l1}, {"l2", t.l2}, {"R", polynomial_to_json(t.R)}, {"A", fourier_to_json(t.A)}});
  j["forcing"] = json::array();
  for (const auto& f : s.forcing) j["forcing"].push_back({{"j", f.j}, {"F", fourier_to_json(f.F)}});
  return j;
}

json series_to_json(const FourierSeries& s) {
  const auto& z = s.zero();
  json coeffs = json::array();
  for (std::size_t p = 1; p <= s.order(); ++p) {
    json c = fourier_to_json(s.coeff(p));
    c["p"] = p;
    coeffs.push_back(std::move(c));
  }
  return {{"order", s.order()}, {"grid", grid_to_json(z.grid())}, {"beta", z.beta()}, {"mu", z.mu()},
          {"coefficients", std::move(coeffs)}};
}

FourierSeries series_from_json(const json& j) {
  only_keys(j, {"order", "grid", "beta", "mu", "coefficients", "manifest", "spec_hash"}, "series");
  for (const char* key : {"order", "grid", "coefficients"})
    if (!j.contains(key)) bad("series", std::string("missing field \"") + key + "\"");
  const MGrid grid = grid_from_json(j["grid"], "series.grid");
  const double beta = number_or(j, "beta", 1.0, "series"), mu = number_or(j, "mu", 2.0, "series");
  const int order = integer(j["order"], "series.order");
  if (order < 1) bad("series", "order must be >= 1");
  FourierSeries s(static_cast<std::size_t>(order), FourierFn::zeros(grid, beta, mu));
  for (const auto& c : j["coefficients"]) {
    if (!c.is_object() || !c.contains("p")) bad("series.coefficients", "each entry needs p");
    const int p = integer(c["p"], "series.coefficients.p");
    if (p < 1 || p > order) bad("series.coefficients", "p = " + std::to_string(p) + " outside 1..order");
    json profile = c;
    profile.erase("p");
    s.coeff(static_cast<std::size_t>(p)) = fourier_from_json(profile, grid, beta, mu, fs::path("."));
  }
  return s;
}

FourierSeries load_series(const fs::path& file) {
  try {
    return series_from_json(json::parse(read_file(file)));
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidSpec, file.string() + ": " + e.what());
  }
}

json sector_to_json(const SectorConfig& c) {
  return {{"direction", c.d},
          {"half_opening", c.half_opening},
          {"rho", c.rho},
          {"R", c.R},
          {"alpha_tilde", c.alpha_tilde},
          {"theta_excl", c.theta_excl},
          {"delta1", c.delta1},
          {"envelope",
           {{"K0", c.envelope.K0},
            {"K1", c.envelope.K1},
            {"C0", c.envelope.C0},
            {"epsilon", c.envelope.epsilon},
            {"samples", c.envelope.samples}}}};
}

json solution_report(const BorelSolution& sol, const SolverOptions& options) {
  return {{"order", options.order},
          {"tol", options.tol},
          {"iterations", sol.iterations},
          {"residual_1R", sol.residual_1R},
          {"norm_1R", sol.norm_1R},
          {"dropped_mass", sol.dropped_mass},
          {"contraction_warning", sol.contraction_warning},
          {"contraction_history", sol.contraction_history},
          {"norm_history", sol.norm_history}};
}

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx, content.data(), content.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    fail(ErrorKind::InvalidArgument, "SHA-1 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

namespace {

std::string csv_cell(const json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  return q + "\"";
}

}  // namespace

std::string Table::to_csv(const std::string& manifest_ref) const {
  std::ostringstream out;
  out << "# manifest: " << manifest_ref << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << "\n";
  }
  return out.str();
}

json Table::to_json(const std::string& manifest_ref) const {
  json rs = json::array();
  for (const auto& row : rows) {
    json r = json::object();
    for (std::size_t i = 0; i < columns.size() && i < row.size(); ++i) r[columns[i]] = row[i];
    rs.push_back(std::move(r));
  }
  return {{"manifest", manifest_ref}, {"columns", columns}, {"rows", std::move(rs)}};
}

fs::path data_dir() {
  if (const char* env = std::getenv("QSUM_DATA_DIR"); env && *env) return fs::path(env);
  return fs::path("data");
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorKind::InvalidArgument, "cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string write_file(const fs::path& file, const std::string& contents) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + file.string());
  out << contents;
  return git_blob_sha1(contents);
}

}  // namespace qsum::io
