#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "support/oracles.hpp"
#include "wassinf/inference.hpp"
#include "wassinf/io.hpp"

namespace fs = std::filesystem;
using wassinf::io::Json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Sandbox {
 public:
  Sandbox() {
    dir_ = fs::temp_directory_path() / ("wassinf_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter_++));
    fs::create_directories(dir_);
  }
  ~Sandbox() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  fs::path write(const std::string& name, const std::string& content) const {
    const fs::path path = dir_ / name;
    std::ofstream(path, std::ios::binary) << content;
    return path;
  }
  fs::path path(const std::string& name) const { return dir_ / name; }

  Run run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" WASSINF_CLI_PATH "' " + args +
                            " > '" + out.string() + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

 private:
  static inline int counter_ = 0;
  fs::path dir_;
};

std::vector<double> read_values(const std::string& csv) {
  std::istringstream in(csv);
  const auto rows = wassinf::io::read_rows(in);
  std::vector<double> values;
  for (std::size_t i = 1; i < rows.size(); ++i) values.push_back(std::stod(rows[i][1]));
  return values;
}

}  // namespace

TEST_CASE("dist") {
  Sandbox box;
  box.write("cost.csv", "id,a,b\na,0,5\nb,5,0\n");
  box.write("a.csv", "id,mass\na,1\n");
  box.write("b.csv", "id,mass\nb,1\n");
  box.write("half.csv", "a,0.5\nb,0.5\n");

  Run r = box.run("dist --cost cost.csv --r half.csv --s half.csv");
  REQUIRE(r.code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["w_pp"] == 0);
  CHECK(j["w_p"] == 0);

  r = box.run("dist -p 1 --cost cost.csv --r a.csv --s b.csv --plan plan.csv");
  REQUIRE(r.code == 0);
  j = Json::parse(r.out);
  CHECK(j["w_pp"] == 5);
  CHECK(j["w_p"] == 5);
  CHECK(j["n_points"] == 2);
  CHECK(slurp(box.path("plan.csv")) == "from_id,to_id,mass\na,b,1\n");

  box.write("line.csv", "id,x\nx0,0\nx1,1\nx2,2\n");
  box.write("r3.csv", "x0,0.5\nx1,0.5\n");
  box.write("s3.csv", "x1,0.5\nx2,0.5\n");
  r = box.run("dist -p 1 --points line.csv --r r3.csv --s s3.csv");
  REQUIRE(r.code == 0);
  const double oracle = wassinf::testing::enumerate_vertices_min(
      Eigen::Vector3d(0.5, 0.5, 0.0), Eigen::Vector3d(0.0, 0.5, 0.5),
      wassinf::build_cost(wassinf::GroundSpace::line(std::vector<double>{0, 1, 2}), 1.0).entries());
  CHECK(Json::parse(r.out)["w_pp"].get<double>() == doctest::Approx(oracle));
}

TEST_CASE("error exit codes") {
  Sandbox box;
  box.write("cost.csv", "id,a,b\na,0,5\nb,5,0\n");
  box.write("a.csv", "a,1\n");
  box.write("bad.csv", "a,one\n");
  box.write("alien.csv", "z,1\n");

  Run r = box.run("dist --cost cost.csv --r a.csv --s bad.csv");
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

  r = box.run("dist --cost cost.csv --r a.csv --s alien.csv");
  CHECK(r.code == 3);
  CHECK(r.out.empty());

  r = box.run("dist --cost cost.csv --r a.csv");
  CHECK(r.code == 2);
  r = box.run("frobnicate");
  CHECK(r.code == 2);
  r = box.run("limit --regime one-sample-alt --cost cost.csv --r a.csv -M 10");
  CHECK(r.code == 2);
  r = box.run("limit --regime sideways --cost cost.csv --r a.csv -M 10");
  CHECK(r.code == 2);
  r = box.run("--help");
  CHECK(r.code == 0);
}

TEST_CASE("limit output is deterministic") {
  Sandbox box;
  box.write("pts.csv", "id,x,y\na,0,0\nb,1,0\nc,0,2\nd,1,1\n");
  box.write("r.csv", "a,0.1\nb,0.2\nc,0.3\nd,0.4\n");
  box.write("s.csv", "a,0.4\nb,0.3\nc,0.2\nd,0.1\n");
  for (const std::string regime :
       {"one-sample-null", "one-sample-alt", "two-sample-null", "two-sample-alt"}) {
    const std::string base = "limit --regime " + regime +
                             " --points pts.csv --r r.csv --s s.csv -M 300 --seed 9 --lambda 0.3";
    REQUIRE(box.run(base + " --workers 1 -o one.csv").code == 0);
    REQUIRE(box.run(base + " --workers 1 -o again.csv").code == 0);
    REQUIRE(box.run(base + " --workers 4 -o four.csv").code == 0);
    CHECK(slurp(box.path("one.csv")) == slurp(box.path("again.csv")));
    CHECK(slurp(box.path("one.csv")) == slurp(box.path("four.csv")));
    CHECK(slurp(box.path("one.csv.json")) == slurp(box.path("four.csv.json")));
    const Json meta = Json::parse(slurp(box.path("one.csv.json")));
    CHECK(meta["regime"] == regime);
    CHECK(meta["M"] == 300);
    CHECK(meta["seed"] == 9);
    CHECK(read_values(slurp(box.path("one.csv"))).size() == 300);
  }
}

TEST_CASE("limit on a one-point space") {
  Sandbox box;
  box.write("cost.csv", "id,only\nonly,0\n");
  box.write("r.csv", "only,1\n");
  const Run r = box.run("limit --regime one-sample-null --cost cost.csv --r r.csv -M 20");
  REQUIRE(r.code == 0);
  for (double v : read_values(r.out)) CHECK(v == 0.0);
}

TEST_CASE("tree cost and tree-limit agree") {
  Sandbox box;
  box.write("tree.csv",
            "child,parent,weight\nroot,root,0\na,root,1\nb,root,0.5\nc,a,2\nd,a,0.7\ne,b,1.2\n");
  box.write("r.csv", "root,0.1\na,0.2\nb,0.15\nc,0.25\nd,0.2\ne,0.1\n");
  const Run general =
      box.run("limit -p 1 --regime one-sample-null --tree tree.csv --r r.csv -M 20000 --seed 1");
  const Run closed = box.run("tree-limit -p 1 --tree tree.csv --r r.csv -M 20000 --seed 2");
  REQUIRE(general.code == 0);
  REQUIRE(closed.code == 0);
  CHECK(wassinf::ks_distance(read_values(general.out), read_values(closed.out)) <= 0.02);

  box.write("line.csv", "id,x\nu,0\nv,0.5\nw,2\n");
  box.write("rl.csv", "u,0.3\nv,0.3\nw,0.4\n");
  const Run line = box.run("tree-limit --line line.csv --r rl.csv -M 100");
  REQUIRE(line.code == 0);
  CHECK(read_values(line.out).size() == 100);
}

TEST_CASE("test, ci and bootstrap") {
  Sandbox box;
  box.write("cost.csv", "id,a,b,c\na,0,1,4\nb,1,0,1\nc,4,1,0\n");
  box.write("x.csv", "id,count\na,30\nb,50\nc,20\n");
  box.write("raw.csv", "a\nb\nb\nc\na\n");

  Run r = box.run("test --cost cost.csv --x x.csv --y x.csv -M 200");
  REQUIRE(r.code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["p_value"] == 1);
  CHECK(j["statistic"] == 0);
  CHECK(j["method"] == "limit");

  r = box.run("test --cost cost.csv --x x.csv --y raw.csv --method permutation -B 99");
  REQUIRE(r.code == 0);
  j = Json::parse(r.out);
  CHECK(j["M"] == 99);
  CHECK(j["n"] == 100);
  CHECK(j["m"] == 5);

  r = box.run("ci --cost cost.csv --x x.csv --y raw.csv -M 500 --level 0.9");
  REQUIRE(r.code == 0);
  j = Json::parse(r.out);
  CHECK(j["lower"].get<double>() <= j["estimate"].get<double>());
  CHECK(j["estimate"].get<double>() <= j["upper"].get<double>());
  CHECK(j["level"] == 0.9);

  r = box.run("bootstrap --cost cost.csv --x x.csv --y raw.csv --scheme naive -B 50 -o boot.csv");
  REQUIRE(r.code == 0);
  j = Json::parse(slurp(box.path("boot.csv.json")));
  CHECK(j["inconsistent"] == true);
  CHECK(j["scheme"] == "naive");
  CHECK(slurp(box.path("boot.csv")).rfind("rep,value\n", 0) == 0);

  r = box.run("bootstrap --cost cost.csv --x x.csv --y x.csv --scheme m-of-n -k 10 -B 20 -o m.csv");
  REQUIRE(r.code == 0);
  j = Json::parse(slurp(box.path("m.csv.json")));
  CHECK(j["k"] == 10);
  CHECK(j["inconsistent"] == false);

  r = box.run("bootstrap --cost cost.csv --x x.csv --y raw.csv --scheme m-of-n -k 50 -B 20");
  CHECK(r.code == 2);
  CHECK(r.out.empty());
}

TEST_CASE("convergence") {
  Sandbox box;
  Run r = box.run("convergence --grid-size 1 --n 10,1000 --measures 2 -M 100");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  const auto rows = wassinf::io::read_rows(in);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"L", "alpha", "p", "n", "ks"});
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][4] == "0");
  const Run a = box.run("convergence --grid-size 2 --n 10,50 --measures 2 -M 300 --workers 1");
  const Run b = box.run("convergence --grid-size 2 --n 10,50 --measures 2 -M 300 --workers 3");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}
