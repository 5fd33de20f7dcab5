#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "fixtures.hpp"
#include "qsum/errors.hpp"
#include "qsum/io.hpp"

using namespace qsum;
using io::json;

namespace {

json small_problem() {
  return json::parse(R"({
    "q": 2, "k": 1, "Q": [0.1, 0.05], "R_D": [3, 1], "alpha_D": 1, "d_D": 1,
    "beta": 1, "mu": 2, "grid": {"half": 20, "step": 0.25},
    "terms": [{"l0": 1, "l1": 0, "l2": 2, "R": [[0.5, 0.25]], "A": {"gaussian": {"scale": 0.05, "width": 0.7}}}],
    "forcing": [{"j": 1, "F": {"gaussian": {}}}]
  })");
}

}  // namespace

TEST_CASE("git blob ids") {
  // Same ids as `git hash-object`.
  CHECK(io::git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(io::git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("shortest round trip") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(std::stod(io::format_double(x)) == x);
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(3.0) == "3");
}

TEST_CASE("problem parsing") {
  const auto pf = io::parse_problem(small_problem(), ".");
  const auto& s = pf.spec;
  CHECK(s.params.q() == 2.0);
  CHECK(s.grid.size() == 41);
  REQUIRE(s.terms.size() == 1);
  CHECK(s.terms[0].R.coeffs[0] == cplx(0.5, 0.25));
  CHECK(s.terms[0].A[20] == cplx(0.05));
  CHECK(s.forcing[0].F[20] == cplx(1.0));

  // Inline values give the same canonical form and hash as the Gaussian description.
  auto j = small_problem();
  j["forcing"][0]["F"] = io::fourier_to_json(s.forcing[0].F);
  const auto again = io::parse_problem(j, ".");
  CHECK(io::git_blob_sha1(again.canonical.dump()) == io::git_blob_sha1(pf.canonical.dump()));
  const auto round = io::parse_problem(pf.canonical, ".");
  CHECK(round.canonical == pf.canonical);

  for (const char* broken : {R"({"q": 2, "k": 1, "Q": [1], "R_D": [1], "bogus": 1})",
                             R"({"q": 2, "k": 1.5, "Q": [1], "R_D": [1]})", R"({"q": 2, "k": 1, "Q": [], "R_D": [1]})",
                             R"({"q": 0.5, "k": 1, "Q": [1], "R_D": [1]})"}) {
    try {
      io::parse_problem(json::parse(broken), ".");
      FAIL("accepted " << broken);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidSpec);
    }
  }
  auto wrong_len = small_problem();
  wrong_len["forcing"][0]["F"] = json{{"values", {1, 2, 3}}};
  CHECK_THROWS_AS(io::parse_problem(wrong_len, "."), Error);
}

TEST_CASE("profile files resolve against the data directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "qsum_io_test";
  fs::create_directories(dir);
  const auto spec = io::parse_problem(small_problem(), ".").spec;
  io::write_file(dir / "F.json", io::fourier_to_json(spec.forcing[0].F).dump());
  auto j = small_problem();
  j["forcing"][0]["F"] = json{{"file", "F.json"}};
  setenv("QSUM_DATA_DIR", dir.c_str(), 1);
  const auto pf = io::parse_problem(j, "/nonexistent");
  unsetenv("QSUM_DATA_DIR");
  CHECK(pf.spec.forcing[0].F.values() == spec.forcing[0].F.values());
  fs::remove_all(dir);
}

TEST_CASE("series round trip") {
  const auto spec = testing::contraction();
  FourierSeries w(3, FourierFn::zeros(spec.grid, spec.beta, spec.mu));
  w.coeff(1) = spec.forcing[0].F;
  w.coeff(3) = cplx(0.3, -1.0 / 7.0) * spec.terms[0].A;
  const auto back = io::series_from_json(json::parse(io::series_to_json(w).dump()));
  for (std::size_t p = 1; p <= 3; ++p) CHECK(back.coeff(p).values() == w.coeff(p).values());
}

TEST_CASE("tables") {
  io::Table t{{"name", "value", "ok"}, {}};
  t.rows.push_back({"a,b", 0.1, true});
  t.rows.push_back({"plain", 2, false});
  CHECK(t.to_csv("manifest.json") == "# manifest: manifest.json\nname,value,ok\n\"a,b\",0.1,true\nplain,2,false\n");
  CHECK(t.to_json("m")["rows"][1]["value"] == 2);
}
