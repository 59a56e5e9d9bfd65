// Drives the ebmix binary through the shell.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const std::string kCli = EBMIX_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("ebmix_cli_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

const std::string kQuick = " --iterations 200 --burnin 50 --quiet ";

}  // namespace

TEST_CASE("usage errors exit with 2, help with 0") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("simulate --reps") == 2);
  CHECK(run("simulate --example 99 --quiet") == 2);
  CHECK(run("simulate --estimators Bogus --quiet") == 2);
  CHECK(run("simulate --formats pdf --quiet") == 2);
  CHECK(run("--help") == 0);
  CHECK(run("simulate --help") == 0);
}

TEST_CASE("missing input: exit 2 and nothing written") {
  TempDir t("missing");
  CHECK(run("fit -i " + (t / "absent.csv") + " -o " + (t / "out") + " --save-config " +
            (t / "c.cfg") + kQuick) == 2);
  CHECK(run("baseball -i " + (t / "absent.csv") + " -o " + (t / "bb") + kQuick) == 2);
  CHECK(run("prostate -i " + (t / "absent.csv") + " -o " + (t / "pr") + kQuick) == 2);
  CHECK(fs::is_empty(t.path));
}

TEST_CASE("same seed gives byte-identical JSON; config is echoed everywhere") {
  TempDir t("determinism");
  const std::string common = "simulate --example 9 --q 20 --reps 3 --formats csv,json,svg" + kQuick;
  REQUIRE(run(common + "-o " + (t / "a")) == 0);
  REQUIRE(run(common + "-o " + (t / "a") + "_again") == 0);
  // outputs differ only in the echoed output path
  const auto without_output = [](const std::string& s) {
    std::istringstream in(s);
    std::string line, out;
    while (std::getline(in, line))
      if (line.find("\"output\"") == std::string::npos) out += line + "\n";
    return out;
  };
  const std::string a = slurp(t / "a.json");
  CHECK(without_output(a) == without_output(slurp(t / "a_again.json")));
  CHECK(a.find("\"config\"") != std::string::npos);
  CHECK(slurp(t / "a.csv").rfind("# command = simulate", 0) == 0);
  CHECK(slurp(t / "a_mu.svg").find("<desc>") != std::string::npos);
  CHECK(fs::exists(t / "a_sigma2.svg"));
}

TEST_CASE("saved config reproduces the run, CLI flags override it") {
  TempDir t("config");
  REQUIRE(run("simulate --example 2 --q 20 --reps 2 --formats json --save-config " + (t / "run.cfg") +
              " -o " + (t / "first") + kQuick) == 0);
  const std::string first = slurp(t / "first.json");
  // re-running the saved config rewrites the same output with the same bytes
  REQUIRE(run("simulate --config " + (t / "run.cfg") + " --quiet") == 0);
  CHECK(slurp(t / "first.json") == first);
  REQUIRE(run("simulate --config " + (t / "run.cfg") + " --reps 3 -o " + (t / "second") + " --quiet") == 0);
  const std::string second = slurp(t / "second.json");
  CHECK(second.find("\"n_reps\": 3") != std::string::npos);
  CHECK(first.find("\"n_reps\": 2") != std::string::npos);
}

TEST_CASE("fit writes estimates, summary and density") {
  TempDir t("fit");
  {
    std::ofstream kv(t / "kv.csv");
    kv << "value,variance\n";
    for (int j = 0; j < 40; ++j) kv << (j % 2 ? 3.0 : -1.0) + 0.01 * j << ",0.5\n";
  }
  REQUIRE(run("fit --known-variance --density --grid-points 10 -i " + (t / "kv.csv") + " -o " +
              (t / "kv") + kQuick) == 0);
  CHECK(fs::exists(t / "kv.json"));
  CHECK(fs::exists(t / "kv.csv"));
  const std::string dens = slurp(t / "kv_density.csv");
  CHECK(dens.find("mu,sigma2,density") != std::string::npos);
  {
    std::ofstream bad(t / "bad.csv");
    bad << "1,2\n3\n";
  }
  CHECK(run("fit -i " + (t / "bad.csv") + " -o " + (t / "bad") + kQuick) == 2);
  CHECK_FALSE(fs::exists(t / "bad.json"));
}
