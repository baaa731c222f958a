#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>

#include "benchforge/dataset.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

struct Output {
  int code = -1;
  std::string text;  // stdout and stderr
};

Output cli(const std::string& args) {
  const std::string cmd = std::string("\"") + BENCHFORGE_CLI + "\" " + args + " 2>&1";
  Output out;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.text.append(buf, n);
  const int status = pclose(p);
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

bool contains(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

fs::path small_dataset(const fs::path& dir) {
  auto ds = fixtures::random_dataset(benchforge::TaskType::STS, 6, 5, "cli-sts");
  return benchforge::write_dataset(ds, dir / "data");
}

}  // namespace

TEST_CASE("cli: help documents exit codes") {
  const auto r = cli("--help");
  CHECK(r.code == 0);
  CHECK(contains(r.text, "Exit codes"));
  CHECK(contains(r.text, "estimate-cost"));
}

TEST_CASE("cli: usage errors exit with 2") {
  CHECK(cli("--no-such-flag").code == 2);
  CHECK(cli("estimate-cost --tokens 10").code == 2);
}

TEST_CASE("cli: cost estimate for the reported token count") {
  const auto r = cli("estimate-cost --tokens 4620730232 --rate 3800 --gpus 4 --watts 700");
  CHECK(r.code == 0);
  CHECK(contains(r.text, "2431963"));
  CHECK(contains(r.text, "28.1"));
}

TEST_CASE("cli: benchtable reproduces the printed averages") {
  const fs::path fx = BENCHFORGE_FIXTURES;
  const auto r = cli("benchtable " + quoted(fx / "row_m-e5-large-instruct.json") + " " +
                     quoted(fx / "row_gte-Qwen2-7B-instruct.json"));
  CHECK(r.code == 0);
  CHECK(contains(r.text, "67.99"));
  CHECK(contains(r.text, "65.84"));
  CHECK(contains(r.text, "m-e5-large-instruct*"));
}

TEST_CASE("cli: dry run prints the plan without creating the run directory") {
  const auto dir = fixtures::scratch_dir("cli-dry");
  const auto manifest = small_dataset(dir);
  const auto r = cli("run " + quoted(manifest) + " --mock --dry-run --run-dir " + quoted(dir / "run"));
  CHECK(r.code == 0);
  CHECK(contains(r.text, "\"units\": 12"));
  CHECK_FALSE(fs::exists(dir / "run"));
}

TEST_CASE("cli: a second run resumes and leaves the outputs unchanged") {
  const auto dir = fixtures::scratch_dir("cli-run");
  const auto manifest = small_dataset(dir);
  const auto args = "run " + quoted(manifest) + " --mock --run-dir " + quoted(dir / "run");
  const auto first = cli(args);
  REQUIRE(first.code == 0);
  const auto before = fixtures::read_tree(dir / "run");
  const auto second = cli(args);
  CHECK(second.code == 0);
  CHECK(contains(second.text, "resumed: 0 pending units"));
  CHECK(fixtures::read_tree(dir / "run") == before);

  const auto report = cli("report " + quoted(dir / "run"));
  CHECK(report.code == 0);
  CHECK(contains(report.text, "cli-sts"));

  // A changed threshold against the same run directory is refused.
  CHECK(cli(args + " --sem-threshold 0.9").code == 1);
  CHECK(cli(args + " --sem-threshold 1.5").code == 2);
}

TEST_CASE("cli: interrupted runs exit 4 and finish on re-run") {
  const auto dir = fixtures::scratch_dir("cli-stop");
  const auto manifest = small_dataset(dir);
  const auto args = "run " + quoted(manifest) + " --mock --run-dir " + quoted(dir / "run");
  CHECK(cli(args + " --stop-after-events 5").code == 4);
  const auto r = cli(args);
  CHECK(r.code == 0);
  CHECK(contains(r.text, "resumed"));
}
