#include <doctest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(RADCRIT_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string write_tmp(const std::string& name, const std::string& text) {
  const auto p = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli lambda-star") {
  auto r = run("lambda-star -N 3 --beta 1");
  CHECK(r.code == 0);
  CHECK(std::stod(r.out) == 4.0);
  r = run("lambda-star -N 3 --beta 2");
  CHECK(std::stod(r.out) == 24.0);
}

TEST_CASE("cli certify emits a certificate") {
  const auto r = run("certify -N 3 --beta 1 --lambda 2");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("kind") == "RadialTestFunction");
  CHECK(j.at("lambda_star").get<double>() == 4.0);
  CHECK(j.at("h_min").get<double>() >= 0.0);
}

TEST_CASE("cli usage and domain errors") {
  CHECK(run("").code == 2);
  CHECK(run("certify -N 2 --beta 1 --lambda 1").code == 2);
  CHECK(run("certify -N 3 --lambda 1").code == 2);
  CHECK(run("solve --config /nonexistent.json").code == 2);
  const auto bad = write_tmp("radcrit_cli_bad.json", "{\"dimension\": ");
  CHECK(run("solve --config " + bad).code == 2);
}

TEST_CASE("cli solve") {
  const auto cfg = write_tmp("radcrit_cli_solve.json",
                             R"({"dimension": 3, "main_exponent": 3, "lambda": 0})");
  const auto r = run("solve --config " + cfg + " --tol 1e-10");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("d_star").get<double>() > 0.0);
  CHECK(j.at("boundary_slope").get<double>() < 0.0);

  const auto out = (std::filesystem::temp_directory_path() / "radcrit_cli_profile.csv").string();
  REQUIRE(run("solve --config " + cfg + " --format csv --out " + out).code == 0);
  CHECK(slurp(out).rfind("r,u,u_prime\n", 0) == 0);
  std::filesystem::remove(out);
}

TEST_CASE("cli c30 csv") {
  const auto r = run("c30 -N 3 --gamma 1 --q 6 --ladder 0.1,0.03,0.01 --format csv");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("epsilon,J\n", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 4);
}

TEST_CASE("cli scan writes identical csv for different job counts") {
  const auto cfg = write_tmp("radcrit_cli_scan.json", R"({
    "dimensions": [3], "beta": 1.0,
    "lambda": {"min": 0, "max": 100, "count": 3},
    "tolerances": {"points_per_decade": 16}, "cross_check": false})");
  const auto a = (std::filesystem::temp_directory_path() / "radcrit_cli_a.csv").string();
  const auto b = (std::filesystem::temp_directory_path() / "radcrit_cli_b.csv").string();
  REQUIRE(run("scan --quiet --config " + cfg + " --out " + a + " --jobs 1").code == 0);
  REQUIRE(run("scan --quiet --config " + cfg + " --out " + b + " --jobs 2").code == 0);
  const auto text = slurp(a);
  CHECK(text == slurp(b));
  CHECK(text.rfind("N,beta,lambda,classification,", 0) == 0);
  CHECK(text.find(",NonexistenceCertified,") != std::string::npos);
  CHECK(text.find(",Existence,") != std::string::npos);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}
