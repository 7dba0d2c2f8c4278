#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "combqfi/collision.hpp"

using namespace combqfi;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("combqfi_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CLI_BINARY_PATH) + " " + args +
                          " > " + (work_dir() / "stdout.txt").string() +
                          " 2> " + (work_dir() / "stderr.txt").string();
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

}  // namespace

TEST_CASE("sweep produces one row per grid point in grid order") {
  const fs::path csv = work_dir() / "sweep.csv";
  std::ostringstream cfg;
  cfg << R"({"schema_version":1,"experiment":"sweep","interaction":"swap",)"
      << R"("scenarios":["nm-control","nm-free","m-control","m-free"],)"
      << R"("N":[2],"t_tot":[0.5,2.55,4.6,6.65,8.7,10.75,12.8,14.85,16.9,18.95,21],)"
      << R"("omega":0.3141592653589793,"g":1.0,)"
      << R"("solver":{"gap_tol":1e-7,"feas_tol":1e-7},)"
      << R"("output":")" << csv.string() << R"("})";
  write_file(work_dir() / "sweep.json", cfg.str());
  REQUIRE(run_cli("sweep " + (work_dir() / "sweep.json").string()) == 0);

  const auto lines = csv_lines(csv);
  REQUIRE(lines.size() == 45);  // header + 11 * 4
  CHECK(lines[0] == "experiment,scenario,interaction,N,t_tot,omega,g,qfi,gap,wall_ms");
  const std::vector<std::string> scen_order = {"nm-control", "nm-free",
                                               "m-control", "m-free"};
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i]);
    REQUIRE(f.size() == 10);
    CHECK(f[0] == "sweep");
    CHECK(f[1] == scen_order[(i - 1) / 11]);
    CHECK(f[2] == "swap");
    CHECK(f[3] == "2");
    CHECK(std::strtod(f[7].c_str(), nullptr) >= -1e-9);  // qfi
    CHECK(f[9] == "0");                                  // timings off
  }
}

TEST_CASE("identical config reruns are byte identical") {
  const fs::path csv = work_dir() / "det.csv";
  std::ostringstream cfg;
  cfg << R"({"schema_version":1,"experiment":"qfi","interaction":"bitflip",)"
      << R"("scenarios":["nm-control","m-free"],"N":[1],"t_tot":[1.0,3.0],)"
      << R"("seed":7,"output":")" << csv.string() << R"("})";
  write_file(work_dir() / "det.json", cfg.str());
  REQUIRE(run_cli("qfi " + (work_dir() / "det.json").string()) == 0);
  const std::string first = slurp(csv);
  REQUIRE(run_cli("qfi " + (work_dir() / "det.json").string()) == 0);
  CHECK(first == slurp(csv));
  CHECK(csv_lines(csv).size() == 5);
}

TEST_CASE("variational and channel-ncopy subcommands run") {
  const fs::path vcsv = work_dir() / "var.csv";
  std::ostringstream vcfg;
  vcfg << R"({"schema_version":1,"experiment":"variational","interaction":"swap",)"
       << R"("scenarios":["nm-control"],"N":[1],"t_tot":[2.0],"seed":1,)"
       << R"("restarts":4,"max_opt_iters":60,"output":")" << vcsv.string() << R"("})";
  write_file(work_dir() / "var.json", vcfg.str());
  REQUIRE(run_cli("variational " + (work_dir() / "var.json").string()) == 0);
  auto lines = csv_lines(vcsv);
  REQUIRE(lines.size() == 2);
  CHECK(std::strtod(split(lines[1])[7].c_str(), nullptr) > 0);

  const fs::path ccsv = work_dir() / "ncopy.csv";
  std::ostringstream ccfg;
  ccfg << R"({"schema_version":1,"experiment":"channel-ncopy","interaction":"swap",)"
       << R"("scenarios":["nm-control"],"N":[1,2],"t_tot":[1.0],)"
       << R"("output":")" << ccsv.string() << R"("})";
  write_file(work_dir() / "ncopy.json", ccfg.str());
  REQUIRE(run_cli("channel-ncopy " + (work_dir() / "ncopy.json").string()) == 0);
  lines = csv_lines(ccsv);
  REQUIRE(lines.size() == 3);
  const double j1 = std::strtod(split(lines[1])[7].c_str(), nullptr);
  const double j2 = std::strtod(split(lines[2])[7].c_str(), nullptr);
  CHECK(j1 > 0);
  CHECK(j2 >= 2 * j1 - 1e-6);
}

TEST_CASE("validate subcommand distinguishes valid and invalid combs") {
  CollisionParams p;
  p.N = 2;
  p.t_tot = 3.0;
  auto [comb, ens] = build_comb_family(p).evaluate(0.4);

  const fs::path good = work_dir() / "good.comb";
  {
    std::ofstream out(good);
    write_comb(out, comb);
  }
  CHECK(run_cli("validate " + good.string()) == 0);
  CHECK(slurp(work_dir() / "stdout.txt").find("VALID") != std::string::npos);

  Comb bad = comb;
  bad.op.m *= 2.0;  // breaks normalization, keeps PSD
  const fs::path badf = work_dir() / "bad.comb";
  {
    std::ofstream out(badf);
    write_comb(out, bad);
  }
  CHECK(run_cli("validate " + badf.string()) == 1);

  write_file(work_dir() / "garbage.comb", "not a comb\n");
  CHECK(run_cli("validate " + (work_dir() / "garbage.comb").string()) == 2);
}

TEST_CASE("bad configs exit with code 2 and a diagnostic") {
  write_file(work_dir() / "notjson.json", "{nope");
  CHECK(run_cli("sweep " + (work_dir() / "notjson.json").string()) == 2);
  CHECK(slurp(work_dir() / "stderr.txt").find("config error") != std::string::npos);

  write_file(work_dir() / "badenum.json",
             R"({"schema_version":1,"experiment":"sweep","scenarios":["warp"],)"
             R"("N":[1],"t_tot":[1.0]})");
  CHECK(run_cli("sweep " + (work_dir() / "badenum.json").string()) == 2);
  CHECK(slurp(work_dir() / "stderr.txt").find("warp") != std::string::npos);

  write_file(work_dir() / "emptygrid.json",
             R"({"schema_version":1,"experiment":"sweep","N":[1],"t_tot":[]})");
  CHECK(run_cli("sweep " + (work_dir() / "emptygrid.json").string()) == 2);

  write_file(work_dir() / "wrongkind.json",
             R"({"schema_version":1,"experiment":"sweep","N":[1],"t_tot":[1.0]})");
  CHECK(run_cli("probe " + (work_dir() / "wrongkind.json").string()) == 2);

  write_file(work_dir() / "badversion.json",
             R"({"schema_version":2,"experiment":"sweep","N":[1],"t_tot":[1.0]})");
  CHECK(run_cli("sweep " + (work_dir() / "badversion.json").string()) == 2);

  CHECK(run_cli("sweep " + (work_dir() / "missing.json").string()) == 2);
}

TEST_CASE("probe subcommand reports the attained value") {
  const fs::path csv = work_dir() / "probe.csv";
  std::ostringstream cfg;
  cfg << R"({"schema_version":1,"experiment":"probe","interaction":"swap",)"
      << R"("scenarios":["nm-control"],"N":[1],"t_tot":[2.0],)"
      << R"("output":")" << csv.string() << R"("})";
  write_file(work_dir() / "probe.json", cfg.str());
  REQUIRE(run_cli("probe " + (work_dir() / "probe.json").string()) == 0);
  const auto lines = csv_lines(csv);
  REQUIRE(lines.size() == 2);
  CHECK(std::strtod(split(lines[1])[7].c_str(), nullptr) > 0);
}
