#include "doctest.h"

#include "fracnoether/cli.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "fracnoether");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = fracnoether::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fracnoether_cli_" + std::to_string(getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json report(const fs::path& dir) { return json::parse(slurp(dir / "report.json")); }

}  // namespace

TEST_SUITE("cli solve") {
  TEST_CASE("writes extremal and report") {
    const auto dir = scratch("solve");
    const auto r = run({"solve", "--problem", "autonomous_lq", "--alpha", "0.5", "--N", "256", "--out", dir.string()});
    CHECK(r.code == 0);
    REQUIRE(fs::exists(dir / "extremal.csv"));
    const auto csv = slurp(dir / "extremal.csv");
    CHECK(csv.rfind("t,q0,u0,p0\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 258);
    CHECK(csv.find('\r') == std::string::npos);
    const auto j = report(dir);
    for (const char* key : {"problem", "alpha", "N", "r_dyn", "r_adj", "r_stat", "charge_residual",
                            "charge_spread", "pass"}) {
      CHECK_MESSAGE(j.contains(key), key);
    }
    CHECK(j["pass"] == true);
    CHECK(j["r_dyn"].get<double>() <= 1e-10);
  }

  TEST_CASE("exit codes") {
    const auto dir = scratch("codes");
    const auto bad_alpha = run({"solve", "--alpha", "1.5", "--out", dir.string()});
    CHECK(bad_alpha.code == 2);
    CHECK(bad_alpha.err.find("(0,1]") != std::string::npos);
    CHECK(run({"solve", "--alpha", "0", "--out", dir.string()}).code == 2);
    CHECK(run({"solve", "--alpha", "abc", "--out", dir.string()}).code == 2);
    CHECK(run({"solve", "--N", "4", "--out", dir.string()}).code == 2);
    CHECK(run({"solve", "--tol", "-1", "--out", dir.string()}).code == 2);
    CHECK(run({"solve", "--a", "1", "--b", "0", "--out", dir.string()}).code == 2);
    CHECK(run({"solve", "--set", "nope=1", "--out", dir.string()}).code == 2);
    CHECK(run({"solve", "--set", "wq", "--out", dir.string()}).code == 2);
    CHECK(run({"solve", "--problem", "nope", "--out", dir.string()}).code == 4);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({}).code == 2);
  }

  TEST_CASE("iteration cap is a numeric failure") {
    // A tolerance below roundoff cannot be met.
    const auto dir = scratch("numeric");
    const auto r = run({"solve", "--tol", "1e-30", "--N", "16", "--out", dir.string()});
    CHECK(r.code == 3);
    CHECK(report(dir)["pass"] == false);
  }

  TEST_CASE("repeatable overrides") {
    const auto dir = scratch("set");
    CHECK(run({"solve", "--set", "wq=2", "--set", "decay=0.5", "--N", "32", "--out", dir.string()}).code == 0);
    const auto j = report(dir);
    CHECK(j["parameters"]["wq"] == 2.0);
    CHECK(j["parameters"]["decay"] == 0.5);
  }

  TEST_CASE("output directory from the environment") {
    const auto dir = scratch("env");
    setenv("FRACNOETHER_OUT", dir.string().c_str(), 1);
    const auto r = run({"solve", "--N", "16"});
    unsetenv("FRACNOETHER_OUT");
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "extremal.csv"));
  }

  TEST_CASE("CV problems solve through the phi = u reduction") {
    const auto dir = scratch("cv");
    CHECK(run({"solve", "--problem", "cv_kinetic", "--alpha", "1", "--N", "64", "--out", dir.string()}).code == 0);
    const auto csv = slurp(dir / "extremal.csv");
    CHECK(csv.find("1.000000000000e+00,1.000000000000e+00,") != std::string::npos);
  }
}

TEST_SUITE("cli check-conservation") {
  TEST_CASE("Hamiltonian preserved at classical order") {
    const auto dir = scratch("cc1");
    const auto r = run({"check-conservation", "--problem", "autonomous_lq", "--alpha", "1", "--N", "512",
                        "--out", dir.string()});
    CHECK(r.code == 0);
    const auto j = report(dir);
    CHECK(j["pass"] == true);
    CHECK(j["status"] == "Hamiltonian preserved");
    CHECK(j["charge_spread"].get<double>() <= 1.0 / 512);
  }

  TEST_CASE("residual shrinks from N=128 to N=256") {
    const auto d1 = scratch("cc128"), d2 = scratch("cc256");
    CHECK(run({"check-conservation", "--alpha", "0.5", "--N", "128", "--out", d1.string()}).code == 0);
    CHECK(run({"check-conservation", "--alpha", "0.5", "--N", "256", "--out", d2.string()}).code == 0);
    CHECK(report(d2)["charge_residual"].get<double>() < report(d1)["charge_residual"].get<double>());
  }

  TEST_CASE("negative control exits 0 with pass=false") {
    const auto dir = scratch("ccneg");
    const auto r = run({"check-conservation", "--problem", "noninvariant_t", "--out", dir.string()});
    CHECK(r.code == 0);
    const auto j = report(dir);
    CHECK(j["pass"] == false);
    CHECK(j["status"] == "no invariant symmetry");
    CHECK(j["symmetries"][0]["invariant"] == false);
  }

  TEST_CASE("classical_energy forces alpha to one") {
    const auto dir = scratch("ccen");
    const auto r = run({"check-conservation", "--problem", "classical_energy", "--alpha", "0.5", "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(report(dir)["alpha"] == 1.0);
    CHECK(report(dir)["pass"] == true);
  }
}

TEST_SUITE("cli frac-deriv") {
  TEST_CASE("power, alpha 1/2") {
    const auto dir = scratch("fd1");
    CHECK(run({"frac-deriv", "--function", "power", "--upsilon", "1", "--alpha", "0.5", "--N", "256",
               "--out", dir.string()}).code == 0);
    CHECK(report(dir)["max_interior_error"].get<double>() <= 1.0 / 256);
    CHECK(slurp(dir / "table.csv").rfind("t,numeric,analytic,error\n", 0) == 0);
  }

  TEST_CASE("constant has a nonzero derivative") {
    const auto dir = scratch("fd2");
    CHECK(run({"frac-deriv", "--function", "const", "--alpha", "0.5", "--N", "1024", "--out", dir.string()}).code == 0);
    std::istringstream in(slurp(dir / "table.csv"));
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
      double t, n, a, e;
      std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &t, &n, &a, &e);
      if (t >= 0.125 && t <= 0.875) {
        CHECK(n > 0.0);
        CHECK(std::abs(n - a) <= 0.02 * a);
        ++rows;
      }
    }
    CHECK(rows > 700);
  }

  TEST_CASE("power 2 at classical order") {
    const auto dir = scratch("fd3");
    CHECK(run({"frac-deriv", "--upsilon", "2", "--alpha", "1", "--N", "256", "--out", dir.string()}).code == 0);
    CHECK(report(dir)["max_interior_error"].get<double>() <= 1.0 / 256 + 1e-12);
  }

  TEST_CASE("sine on the right side") {
    const auto dir = scratch("fd4");
    CHECK(run({"frac-deriv", "--function", "sin", "--side", "right", "--alpha", "0.3", "--N", "512",
               "--out", dir.string()}).code == 0);
    CHECK(report(dir)["max_interior_error"].get<double>() <= 1.0 / 512);
  }

  TEST_CASE("unknown function") {
    CHECK(run({"frac-deriv", "--function", "cos"}).code == 2);
  }
}

TEST_SUITE("cli convergence") {
  TEST_CASE("GL power test is first order") {
    const auto dir = scratch("cv1");
    CHECK(run({"convergence", "--check", "frac-deriv", "--alpha", "0.5", "--N", "128", "--out", dir.string()}).code == 0);
    const double order = report(dir)["fitted_order"].get<double>();
    CHECK(order >= 0.7);
    CHECK(order <= 1.3);
    CHECK(slurp(dir / "table.csv").rfind("N,h,error\n", 0) == 0);
  }

  TEST_CASE("classical stencil is exact") {
    const auto dir = scratch("cv2");
    CHECK(run({"convergence", "--check", "frac-deriv", "--alpha", "1", "--N", "64", "--out", dir.string()}).code == 0);
    CHECK(report(dir)["fitted_order"] == "exact");
  }

  TEST_CASE("conservation residual has positive order") {
    const auto dir = scratch("cv3");
    CHECK(run({"convergence", "--check", "conservation", "--alpha", "0.5", "--N", "64", "--out", dir.string()}).code == 0);
    CHECK(report(dir)["fitted_order"].get<double>() > 0.0);
  }

  TEST_CASE("too few levels") {
    CHECK(run({"convergence", "--levels", "2"}).code == 2);
  }
}

TEST_SUITE("cli sweep-alpha") {
  TEST_CASE("table rows and the classical row") {
    const auto dir = scratch("sw1");
    CHECK(run({"sweep-alpha", "--alphas", "0.25,0.5,0.75,1.0", "--N", "128", "--out", dir.string()}).code == 0);
    const auto j = report(dir);
    REQUIRE(j["rows"].size() == 4);
    const auto& half = j["rows"][1];
    CHECK(half["H_endpoint_spread"].get<double>() > half["charge_residual"].get<double>());
    const auto& one = j["rows"][3];
    CHECK(one["H_endpoint_spread"].get<double>() <= 1.0 / 128);

    const auto cc = scratch("sw1cc");
    CHECK(run({"check-conservation", "--alpha", "1", "--N", "128", "--out", cc.string()}).code == 0);
    CHECK(one["charge_residual"] == report(cc)["charge_residual"]);
    CHECK(one["charge_spread"] == report(cc)["charge_spread"]);
  }

  TEST_CASE("empty list") {
    CHECK(run({"sweep-alpha", "--out", scratch("sw2").string()}).code == 2);
    CHECK(run({"sweep-alpha", "--alphas", "0.5,2", "--out", scratch("sw3").string()}).code == 2);
  }
}

TEST_SUITE("cli determinism") {
  TEST_CASE("byte-identical artifacts") {
    const std::vector<std::vector<std::string>> commands{
        {"solve", "--alpha", "0.5", "--N", "128", "--seed", "7"},
        {"check-conservation", "--alpha", "0.5", "--N", "128"},
        {"frac-deriv", "--function", "sin", "--alpha", "0.5"},
        {"convergence", "--check", "frac-deriv", "--N", "64"},
        {"sweep-alpha", "--alphas", "0.25,0.5,0.75,1", "--N", "64"},
    };
    int i = 0;
    for (auto cmd : commands) {
      const auto d1 = scratch("det" + std::to_string(i) + "a");
      const auto d2 = scratch("det" + std::to_string(i) + "b");
      ++i;
      auto c1 = cmd, c2 = cmd;
      c1.insert(c1.end(), {"--out", d1.string()});
      c2.insert(c2.end(), {"--out", d2.string()});
      REQUIRE(run(c1).code == 0);
      REQUIRE(run(c2).code == 0);
      for (const auto& f : fs::directory_iterator(d1)) {
        CAPTURE(f.path().string());
        CHECK(slurp(f.path()) == slurp(d2 / f.path().filename()));
      }
    }
  }
}

TEST_SUITE("cli list") {
  TEST_CASE("help exits 0") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("sweep-alpha") != std::string::npos);
  }


  TEST_CASE("names every problem") {
    const auto r = run({"list"});
    CHECK(r.code == 0);
    for (const char* n : {"autonomous_lq", "cv_kinetic", "classical_energy", "noninvariant_t"}) {
      CHECK(r.out.find(n) != std::string::npos);
    }
  }
}

TEST_CASE("zz remove scratch directory") {
  fs::remove_all(fs::temp_directory_path() / ("fracnoether_cli_" + std::to_string(getpid())));
}
