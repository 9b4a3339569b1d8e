#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef SVFLOW_CLI_PATH
#error "SVFLOW_CLI_PATH must be defined"
#endif

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SVFLOW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// strips the trailing (wall-clock) column of a CSV line
std::string drop_seconds(const std::string& line) {
  return line.substr(0, line.find_last_of(','));
}

}  // namespace

TEST_CASE("kovasznay run writes a history that converges") {
  REQUIRE(run_cli("--problem kovasznay --p 4 --lambda 1e3 --method scip "
                  "--history-out /tmp/svflow_h1.csv") == 0);
  const auto lines = read_lines("/tmp/svflow_h1.csv");
  REQUIRE(!lines.empty());
  CHECK(lines[0] == "iter,div_norm,rel_H1_err,rel_L2_press_err,seconds");
  CHECK(lines.size() <= 9);  // header + at most 8 iterations
  std::istringstream last(lines.back());
  std::string field;
  std::getline(last, field, ',');
  std::getline(last, field, ',');
  CHECK(std::stod(field) <= 1e-9);
}

TEST_CASE("identical configs give identical histories up to timing") {
  REQUIRE(run_cli("--problem kovasznay --p 5 --history-out /tmp/svflow_a.csv") == 0);
  REQUIRE(run_cli("--problem kovasznay --p 5 --history-out /tmp/svflow_b.csv") == 0);
  const auto a = read_lines("/tmp/svflow_a.csv");
  const auto b = read_lines("/tmp/svflow_b.csv");
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(drop_seconds(a[i]) == drop_seconds(b[i]));
}

TEST_CASE("moffatt history has no error columns") {
  REQUIRE(run_cli("--problem moffatt --p 4 --history-out /tmp/svflow_m.csv") == 0);
  const auto lines = read_lines("/tmp/svflow_m.csv");
  REQUIRE(!lines.empty());
  CHECK(lines[0] == "iter,div_norm,seconds");
}

TEST_CASE("moffatt at p = 10 reaches the benchmark divergence level") {
  REQUIRE(run_cli("--problem moffatt --p 10 --lambda 1e3 --method scip "
                  "--history-out /tmp/svflow_m10.csv") == 0);
  const auto lines = read_lines("/tmp/svflow_m10.csv");
  REQUIRE(lines.size() >= 2);
  std::istringstream last(lines.back());
  std::string field;
  std::getline(last, field, ',');
  std::getline(last, field, ',');
  CHECK(std::stod(field) <= 1e-8);
}

TEST_CASE("config errors exit with code 2") {
  CHECK(run_cli("--problem nosuch") == 2);
  CHECK(run_cli("--p 3") == 2);
  CHECK(run_cli("--problem custom") == 2);       // needs a mesh
  CHECK(run_cli("--sweep-p 4") == 2);            // missing lambda list
  CHECK(run_cli("--mesh /tmp/no_such_mesh.txt") == 2);
}

TEST_CASE("method both verifies equivalence") {
  CHECK(run_cli("--problem kovasznay --nx 2 --ny 2 --p 4 --method both") == 0);
}

TEST_CASE("field sampling is restricted to the mesh") {
  REQUIRE(run_cli("--problem moffatt --p 4 --field-out /tmp/svflow_f.txt --grid 12x20") == 0);
  const auto lines = read_lines("/tmp/svflow_f.txt");
  REQUIRE(lines.size() > 1);
  CHECK(lines[0] == "# x y u1 u2 p");
  int inside = 0;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::istringstream ls(lines[i]);
    double x, y, u1, u2, p;
    REQUIRE((ls >> x >> y >> u1 >> u2 >> p));
    ++inside;
  }
  // the wedge occupies well under half of its bounding box
  CHECK(inside > 0);
  CHECK(inside < 12 * 20 / 2);
}

TEST_CASE("json config with flag override") {
  {
    std::ofstream cfg("/tmp/svflow_cfg.json");
    cfg << R"({"problem": "kovasznay", "p": 4, "nx": 2, "ny": 2, "diagnostics": true,)"
        << R"( "diag-out": "/tmp/svflow_diag.kv"})";
  }
  REQUIRE(run_cli("--config /tmp/svflow_cfg.json --p 5") == 0);
  const auto kv = read_lines("/tmp/svflow_diag.kv");
  bool found = false;
  for (const auto& line : kv) found = found || line == "p=5";  // flag wins over file
  CHECK(found);
}

TEST_CASE("sweep summary") {
  REQUIRE(run_cli("--problem kovasznay --nx 2 --ny 2 --sweep-p 4,5 "
                  "--sweep-lambda 1e2,1e3 --sweep-out /tmp/svflow_sweep.csv") == 0);
  const auto lines = read_lines("/tmp/svflow_sweep.csv");
  REQUIRE(lines.size() == 5);  // header + 4 combinations
  CHECK(lines[0] ==
        "p,lambda,iters,final_div,rel_H1_err,rel_L2_press_err,decay_ratio,seconds,warning");
}

TEST_CASE("custom problem on a mesh file with diagnostics") {
  {
    std::ofstream mesh("/tmp/svflow_tri.txt");
    mesh << "# single element\nvertices 3\n0 0\n1 0\n0 1\n"
         << "triangles 1\n0 1 2\n"
         << "boundary 3\n0 1 D\n1 2 D\n2 0 D\n";
  }
  REQUIRE(run_cli("--problem custom --mesh /tmp/svflow_tri.txt --p 4 --diagnostics "
                  "--diag-out /tmp/svflow_tri.kv") == 0);
  const auto kv = read_lines("/tmp/svflow_tri.kv");
  bool tri_ok = false, rank_ok = false;
  for (const auto& line : kv) {
    tri_ok = tri_ok || line == "n_triangles=1";
    rank_ok = rank_ok || line == "div_rank=6";
  }
  CHECK(tri_ok);
  CHECK(rank_ok);
}
