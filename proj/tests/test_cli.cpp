#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <filesystem>

#include "bwpred/cli.hpp"

using namespace bwpred;
namespace fs = std::filesystem;

namespace {

struct TmpDir {
  fs::path path;
  TmpDir() {
    path = fs::temp_directory_path() /
           ("bwpred_cli_" +
            std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TmpDir() { fs::remove_all(path); }
  std::string sub(const char* name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("missing required flags exit with the validation code") {
  REQUIRE(run_cli({"train", "--model", "lstm"}) == 1);
  REQUIRE(run_cli({"simulate"}) == 1);
  REQUIRE(run_cli({"definitely-not-a-command"}) == 1);
  REQUIRE(run_cli({"simulate", "--no-such-flag", "--out", "x"}) == 1);
  REQUIRE(run_cli({}) == 1);
}

TEST_CASE("help exits cleanly") { REQUIRE(run_cli({"--help"}) == 0); }

TEST_CASE("bad inputs map to the validation exit code") {
  TmpDir tmp;
  REQUIRE(run_cli({"simulate", "--profile", "no-such-profile", "--hours", "0.05", "--out",
                   tmp.sub("out")}) == 1);
  REQUIRE(run_cli({"featurize", "--data", tmp.sub("missing"), "--out", tmp.sub("ds")}) == 1);
  // offset range is 1..40
  REQUIRE(run_cli({"featurize", "--data", tmp.sub("missing"), "--out", tmp.sub("ds"),
                   "--offset", "50"}) == 1);
}

TEST_CASE("the full pipeline runs end to end at toy scale") {
  TmpDir tmp;
  std::string telem = tmp.sub("telemetry");
  std::string ds = tmp.sub("datasets");
  std::string models = tmp.sub("models");
  std::string traces = tmp.sub("traces");

  // 108 s of congested traffic on three interfaces
  REQUIRE(run_cli({"simulate", "--profile", "congested", "--hours", "0.03", "--seed", "7",
                   "--interfaces", "r1.l09,r2.l10,r1.l01", "--out", telem}) == 0);
  REQUIRE(fs::exists(fs::path(telem) / "manifest.json"));
  REQUIRE(fs::exists(fs::path(telem) / "r1.l09" / "system.csv"));

  REQUIRE(run_cli({"featurize", "--data", telem, "--out", ds, "--offset", "5"}) == 0);
  REQUIRE(fs::exists(fs::path(ds) / "r1.l09.csv"));
  REQUIRE(fs::exists(fs::path(ds) / "r1.l09.meta.json"));
  REQUIRE(fs::exists(fs::path(ds) / "manifest.json"));

  REQUIRE(run_cli({"train", "--model", "mlp", "--data", ds, "--epochs", "2", "--batch", "16",
                   "--seed", "3", "--out", models}) == 0);
  std::string ckpt = (fs::path(models) / "model_mlp.ckpt").string();
  REQUIRE(fs::exists(ckpt));

  REQUIRE(run_cli({"predict", "--checkpoint", ckpt, "--data",
                   (fs::path(ds) / "r1.l09.csv").string(), "--svg", "--out", traces}) == 0);
  REQUIRE(fs::exists(fs::path(traces) / "r1.l09.trace.csv"));
  REQUIRE(fs::exists(fs::path(traces) / "r1.l09.trace.svg"));

  REQUIRE(run_cli({"plot-trace", "--trace", (fs::path(traces) / "r1.l09.trace.csv").string(),
                   "--out", tmp.sub("replot.svg")}) == 0);
  REQUIRE(fs::exists(tmp.sub("replot.svg")));

  // evaluation over the three toy interfaces
  REQUIRE(run_cli({"evaluate", "--model", "mlp", "--data", ds, "--epochs", "1", "--batch", "16",
                   "--seed", "2", "--out", tmp.sub("report")}) == 0);
  REQUIRE(fs::exists(fs::path(tmp.sub("report")) / "report.csv"));

  // closed loop with the tiny checkpoint
  REQUIRE(run_cli({"control", "--policy", "block", "--checkpoint", ckpt, "--profile",
                   "congested", "--hours", "0.02", "--seed", "5", "--interfaces",
                   "r1.l09,r2.l10", "--out", tmp.sub("ctl")}) == 0);
  REQUIRE(fs::exists(fs::path(tmp.sub("ctl")) / "actions.csv"));
  REQUIRE(fs::exists(fs::path(tmp.sub("ctl")) / "report.csv"));
  REQUIRE(fs::exists(fs::path(tmp.sub("ctl")) / "baseline_report.csv"));
}

TEST_CASE("control with an active policy requires a checkpoint") {
  TmpDir tmp;
  REQUIRE(run_cli({"control", "--policy", "block", "--hours", "0.02", "--out",
                   tmp.sub("ctl")}) == 1);
}

TEST_CASE("identical seeds reproduce byte-identical artifacts through the CLI") {
  TmpDir tmp;
  auto simulate_to = [&](const char* dir) {
    REQUIRE(run_cli({"simulate", "--profile", "congested", "--hours", "0.02", "--seed", "11",
                     "--interfaces", "r1.l09", "--out", tmp.sub(dir)}) == 0);
  };
  simulate_to("a");
  simulate_to("b");
  REQUIRE(read_file((fs::path(tmp.sub("a")) / "r1.l09" / "system.csv").string()) ==
          read_file((fs::path(tmp.sub("b")) / "r1.l09" / "system.csv").string()));
}
