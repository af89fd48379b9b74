#include <json.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "passage/analytic.hpp"
#include "passage/cli.hpp"
#include "passage/npass.hpp"

using namespace passage;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args, const char* seed_env = nullptr) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err, seed_env);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) v.push_back(line);
  return v;
}

std::vector<double> row(const std::string& line) {
  std::vector<double> v;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) v.push_back(std::stod(cell));
  return v;
}

}  // namespace

TEST_CASE("csv headers") {
  CHECK(lines(run({"density", "--grid", "0.5:2:4:lin"}).out).front() == "t,value");
  CHECK(lines(run({"cdf", "--grid", "0.5:2:4:lin"}).out).front() == "t,value");
  CHECK(lines(run({"psi", "--grid", "0.1:0.5:3:lin"}).out).front() == "t,value");
  CHECK(lines(run({"lt", "--lambda-grid", "1:2:2:lin"}).out).front() == "lambda,value");
  CHECK(lines(run({"defect", "--b-sweep", "-1:0:2"}).out).front() == "b,defect,gamma_bound");
  CHECK(lines(run({"mean", "--model", "cubic"}).out).front() == "quantity,value");
  CHECK(lines(run({"mc", "--paths", "200", "--t-max", "5"}).out).front() == "statistic,value");
}

TEST_CASE("values round-trip at 17 significant digits") {
  const Run r = run({"density", "--grid", "0.25:4:7:log"});
  REQUIRE(r.code == kExitOk);
  const auto body = lines(r.out);
  REQUIRE(body.size() == 8);
  const LinearBoundaryProblem p{1.0, 0.0, 0.0};
  for (std::size_t i = 1; i < body.size(); ++i) {
    const auto v = row(body[i]);
    REQUIRE(v.size() == 2);
    CHECK(v[1] == fpt_density(p, v[0]));
  }
  const auto lt = lines(run({"lt", "--lambda-grid", "0.5:0.5001:2:lin"}).out);
  CHECK(row(lt[1])[1] == std::exp(-1.0));
  const auto psi = lines(run({"psi", "--grid", "0.5:0.6:2:lin", "--t", "1"}).out);
  CHECK(row(psi[1])[1] == doctest::Approx(2 / std::numbers::pi).epsilon(1e-15));
}

TEST_CASE("json layout") {
  const Run r = run({"density", "--quantity", "tau2", "--grid", "0.5:1:2:lin", "--format", "json"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  for (const char* key : {"model", "params", "grid", "values", "defect_mass", "meta"}) CHECK(j.contains(key));
  CHECK(j["model"] == "bm");
  CHECK(j["meta"].contains("version"));
  CHECK(j["meta"].contains("seed"));
  CHECK(j["grid"].size() == 2);
  CHECK(j["values"].size() == 2);
  CHECK(j["values"][1].get<double>() ==
        doctest::Approx(tau2_density({1.0, 0.0, 0.0}, 1.0)).epsilon(1e-12));
}

TEST_CASE("exit codes and stream separation") {
  SUBCASE("parameter errors") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"density", "--grid", "0:1:10:log"},
             {"density", "--grid", "1:2:10:cubic"},
             {"density", "--model", "ou", "--grid", "1:2:10:log"},
             {"density", "--model", "heston"},
             {"lt", "--a", "1e-200"},
             {"defect", "--b-sweep", "-1:0"},
             {"frobnicate"}}) {
      const Run r = run(args);
      CHECK(r.code == kExitParameter);
      CHECK(r.out.empty());
      CHECK_FALSE(r.err.empty());
    }
  }
  SUBCASE("numerical failure") {
    const Run r = run({"defect", "--b", "-1e300"});
    CHECK(r.code == kExitNumerical);
    CHECK(r.out.empty());
    CHECK(r.err.find("error") != std::string::npos);
  }
  SUBCASE("mc diagnostics stay off stdout") {
    const Run r = run({"mc", "--paths", "500", "--t-max", "2"});
    CHECK(r.code == kExitOk);
    CHECK(r.err.find("censored") != std::string::npos);
    for (const auto& line : lines(r.out)) CHECK(line.find("mc:") == std::string::npos);
  }
}

TEST_CASE("seed precedence: flag over environment over default") {
  const std::vector<std::string> base{"mc", "--paths", "500", "--t-max", "20"};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
  };
  const std::string by_flag = run(with({"--seed", "5"})).out;
  const std::string by_env = run(base, "5").out;
  const std::string flag_wins = run(with({"--seed", "5"}), "9").out;
  const std::string by_default = run(base).out;
  CHECK(by_flag == by_env);
  CHECK(flag_wins == by_flag);
  CHECK(by_default != by_flag);
  CHECK(run(base, "not-a-seed").code == kExitParameter);
  const auto j = nlohmann::json::parse(run({"mean", "--model", "cubic", "--format", "json"}, "77").out);
  CHECK(j["meta"]["seed"] == 77);
}

TEST_CASE("identical requests give identical bytes") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"density", "--quantity", "tau2", "--grid", "0.01:20:40:log"},
           {"mc", "--paths", "2000", "--seed", "3", "--bridge"},
           {"mc", "--model", "ou", "--mu", "1", "--sigma", "1", "--paths", "2000", "--seed", "3", "--samples"}}) {
    const Run a = run(args);
    const Run b = run(args);
    REQUIRE(a.code == kExitOk);
    CHECK(a.out == b.out);
  }
  auto workers = [](const char* w) {
    return run({"mc", "--model", "cubic", "--paths", "3000", "--seed", "8", "--workers", w}).out;
  };
  CHECK(workers("1") == workers("4"));
}

TEST_CASE("second-passage density request") {
  const Run r = run({"density", "--model", "bm", "--quantity", "tau2", "--a", "1", "--x", "0", "--b", "0",
                     "--grid", "0.01:20:400:log"});
  REQUIRE(r.code == kExitOk);
  const auto body = lines(r.out);
  REQUIRE(body.size() == 401);
  double peak = 0.0, at = 0.0;
  for (std::size_t i = 1; i < body.size(); ++i) {
    const auto v = row(body[i]);
    CHECK(v[1] >= 0.0);
    if (v[1] > peak) peak = v[1], at = v[0];
  }
  // The tau2 density sits later and lower than the tau1 density, whose mode is at 1/3.
  CHECK(at > 1.0 / 3.0);
  CHECK(peak < fpt_density({1.0, 0.0, 0.0}, 1.0 / 3.0));
  CHECK(row(body[200])[1] == doctest::Approx(tau2_density({1.0, 0.0, 0.0}, row(body[200])[0])).epsilon(1e-9));
}

TEST_CASE("defect sweep request") {
  const Run r = run({"defect", "--model", "bm", "--a", "1", "--x", "0", "--b-sweep", "-3:0:60"});
  REQUIRE(r.code == kExitOk);
  const auto body = lines(r.out);
  REQUIRE(body.size() == 61);
  CHECK(row(body[1])[0] == -3.0);
  CHECK(row(body[60])[0] == 0.0);
  CHECK(row(body[60])[1] == 0.0);
  CHECK(row(body[60])[2] == 0.0);
  for (std::size_t i = 1; i < body.size(); ++i) {
    const auto v = row(body[i]);
    CHECK(v[1] <= v[2]);
    if (i > 1) CHECK(v[1] <= row(body[i - 1])[1]);
  }
}
