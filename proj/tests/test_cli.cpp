#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qxot/cli.hpp"
#include <json.hpp>

namespace fs = std::filesystem;
using qxot::cli::run_cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qxot_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

const std::string kDemo = std::string(QXOT_SOURCE_DIR) + "/tools/circuits/demo.qct";

}  // namespace

TEST_CASE("xot") {
  auto r = cli({"xot", "--variant", "p1", "--x", "10", "--y", "11", "--seed", "7"});
  CHECK(r.code == 0);
  CHECK(r.out.find("output 1\n") == 0);
  r = cli({"xot", "--variant", "p2b", "--x", "00", "--y", "11", "--seed", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("output 0\n") == 0);
  CHECK(cli({"xot", "--x", "1a", "--y", "11"}).code == 2);
  CHECK(cli({"xot", "--x", "101", "--y", "11"}).code == 2);
  CHECK(cli({"xot", "--variant", "p9", "--x", "10", "--y", "11"}).code == 2);
  CHECK(cli({"xot", "--x", "10"}).code == 2);
}

TEST_CASE("linear") {
  const auto plain = cli({"linear", "--x", "1101", "--y", "1011", "--seed", "3"});
  CHECK(plain.code == 0);
  CHECK(plain.out.find("output 0\n") == 0);
  const auto he = cli({"linear", "--he", "--prime-bits", "16", "--x", "1101", "--y", "1011", "--seed", "3"});
  CHECK(he.code == 0);
  CHECK(he.out.find("output 0\n") == 0);
  CHECK(cli({"linear", "--variant", "p2b", "--he", "--x", "1101", "--y", "1011"}).code == 2);
  CHECK(cli({"linear", "--x", "110", "--y", "1011"}).code == 2);
  CHECK(cli({"linear", "--x", "111", "--y", "101"}).code == 2);
}

TEST_CASE("attack") {
  auto r = cli({"attack", "--cheat-alice", "--target", "xor", "--variant", "p1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("avg success 1.000000000") != std::string::npos);
  r = cli({"attack", "--cheat-alice", "--target", "y2", "--honest"});
  CHECK(r.out.find("avg success 0.500000000") != std::string::npos);
  CHECK(cli({"attack", "--cheat-alice", "--variant", "p2"}).code == 2);
  CHECK(cli({"attack"}).code == 2);
  r = cli({"attack", "--bob", "--n", "2", "--strategy", "Z_basis"});
  CHECK(r.code == 0);
  CHECK(r.out == "Z_basis 0.892856584\n");
  CHECK(cli({"attack", "--bob", "--n", "4"}).code == 3);
}

TEST_CASE("leakage") {
  const fs::path dir = scratch("leakage");
  const auto r = cli({"leakage", "--n", "2", "--prior", "uniform", "--out", dir.string()});
  CHECK(r.code == 0);
  for (const char* s : {"Z_basis", "Bell_guess", "holevo"}) {
    const auto at = r.out.find(std::string(",") + s + ",");
    REQUIRE(at != std::string::npos);
    const double v = std::stod(r.out.substr(at + std::string(s).size() + 2));
    CHECK(v <= 1.0);
  }
  CHECK(slurp(dir / "leakage.csv").rfind("scenario,n,prior,strategy,bits\n", 0) == 0);
  CHECK(fs::exists(dir / "leakage.json"));
  CHECK(cli({"leakage", "--n", "4"}).code == 3);
  CHECK(cli({"leakage", "--view", "alice", "--n", "3"}).code == 3);
  CHECK(cli({"leakage", "--view", "carol"}).code == 2);
  const auto alice = cli({"leakage", "--view", "alice", "--n", "1", "--honest"});
  CHECK(alice.code == 0);
  CHECK(alice.out.find("alice_view,1,") != std::string::npos);
}

TEST_CASE("qc") {
  const auto r = cli({"qc", "--circuit", kDemo, "--seed", "5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("fidelity 1.000000000") != std::string::npos);
  const auto many = cli({"qc", "--circuit", kDemo, "--seed", "5", "--runs", "4", "--jobs", "2", "--batch"});
  CHECK(many.code == 0);
  CHECK(many.out.find("fidelity 1.000000000") != std::string::npos);
  CHECK(cli({"qc", "--circuit", kDemo, "--input", "0+"}).code == 0);
  CHECK(cli({"qc", "--circuit", kDemo, "--input", "0"}).code == 2);
  CHECK(cli({"qc", "--circuit", "/nonexistent.qct"}).code == 2);
  CHECK(cli({"qc"}).code == 2);
}

TEST_CASE("reports are byte-identical across runs") {
  const std::vector<std::vector<std::string>> commands{
      {"xot", "--variant", "p2", "--x", "11", "--y", "01", "--seed", "9"},
      {"linear", "--he", "--prime-bits", "24", "--x", "101101", "--y", "011011", "--seed", "4"},
      {"attack", "--cheat-alice", "--target", "y1", "--seed", "2"},
      {"leakage", "--n", "2", "--prior", "equal_pairs"},
      {"qc", "--circuit", kDemo, "--seed", "11"},
  };
  int i = 0;
  for (auto args : commands) {
    const fs::path a = scratch("det_a" + std::to_string(i)), b = scratch("det_b" + std::to_string(i));
    ++i;
    auto with = [&](const fs::path& d) {
      auto v = args;
      v.insert(v.end(), {"--out", d.string()});
      return v;
    };
    REQUIRE(cli(with(a)).code == 0);
    REQUIRE(cli(with(b)).code == 0);
    for (const auto& f : fs::directory_iterator(a)) CHECK(slurp(f.path()) == slurp(b / f.path().filename()));
  }
}

TEST_CASE("seed sources and config precedence") {
  const fs::path dir = scratch("config");
  const fs::path cfg = dir / "run.toml";
  std::ofstream(cfg) << "[xot]\nx = \"11\"\ny = \"10\"\nseed = 5\nvariant = \"p2\"\n";

  auto r = cli({"--config", cfg.string(), "xot", "--out", (dir / "a").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("output 1\n") == 0);
  CHECK(slurp(dir / "a" / "xot.json").find("\"seed\": 5") != std::string::npos);

  r = cli({"--config", cfg.string(), "xot", "--seed", "6", "--out", (dir / "b").string()});
  CHECK(r.code == 0);
  CHECK(slurp(dir / "b" / "xot.json").find("\"seed\": 6") != std::string::npos);

  ::setenv("QXOT_SEED", "12", 1);
  r = cli({"xot", "--x", "10", "--y", "10", "--out", (dir / "c").string()});
  CHECK(slurp(dir / "c" / "xot.json").find("\"seed\": 12") != std::string::npos);
  r = cli({"xot", "--x", "10", "--y", "10", "--seed", "3", "--out", (dir / "d").string()});
  CHECK(slurp(dir / "d" / "xot.json").find("\"seed\": 3") != std::string::npos);
  ::unsetenv("QXOT_SEED");
}

TEST_CASE("usage errors") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"teleport"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"xot", "--x", "10", "--y", "10", "--tolerance", "norm=-1"}).code == 2);
  CHECK(cli({"xot", "--x", "10", "--y", "10", "--tolerance", "nonsense=1"}).code == 2);
  CHECK(cli({"xot", "--x", "10", "--y", "10", "--tolerance", "subspace_leak=1e-9"}).code == 0);
}

TEST_CASE("record schema") {
  const fs::path dir = scratch("schema");
  REQUIRE(cli({"xot", "--x", "11", "--y", "01", "--seed", "2", "--out", dir.string()}).code == 0);
  const auto xot = nlohmann::json::parse(slurp(dir / "xot.json"));
  for (const char* k : {"variant", "seed", "alice", "bob", "messages", "output"}) CHECK(xot.contains(k));
  CHECK(xot["alice"]["x"] == nlohmann::json::array({1, 1}));
  CHECK(xot["messages"][0]["dir"] == "A->B");

  REQUIRE(cli({"linear", "--he", "--prime-bits", "16", "--x", "1101", "--y", "1011", "--seed", "3", "--out",
               dir.string()})
              .code == 0);
  const std::string text = slurp(dir / "linear.json");
  const auto lin = nlohmann::json::parse(text);
  for (const char* k : {"n", "parity_certificate", "R0", "S2", "he_used", "he"}) CHECK(lin.contains(k));
  CHECK(lin["he"]["modulus"].is_string());
  // keys come out sorted
  CHECK(text.find("\"R0\"") < text.find("\"S2\""));
  CHECK(text.find("\"alice\"") < text.find("\"bob\""));
}
