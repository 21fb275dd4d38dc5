#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#ifdef __unix__
#include <sys/wait.h>
#endif

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// The build exports the tool location; fall back to the sibling of this test
// binary for direct invocations.
std::string cli_binary() {
  if (const char* env = std::getenv("CGL_BIN")) return env;
  std::error_code ec;
  const auto self = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) return (self.parent_path() / "cgl").string();
  return "cgl";
}

struct CmdResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

CmdResult run_cli(const std::string& args) {
  static int counter = 0;
  const auto out_path = fs::temp_directory_path() /
                        ("cgl_cli_out_" + std::to_string(counter) + ".txt");
  const auto err_path = fs::temp_directory_path() /
                        ("cgl_cli_err_" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = cli_binary() + " " + args + " >" + out_path.string() +
                          " 2>" + err_path.string();
  const int raw = std::system(cmd.c_str());
  CmdResult r;
#ifdef __unix__
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
#else
  r.code = raw;
#endif
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  fs::remove(out_path);
  fs::remove(err_path);
  return r;
}

// Fresh scratch directory holding the five-node fixture.
fs::path fixture_dir() {
  const auto dir = fs::temp_directory_path() / "cgl_cli_fixture";
  fs::remove_all(dir);
  fs::create_directories(dir);
  spit(dir / "concepts.jsonl",
       R"({"id": "c1", "text": "machine learning"})"
       "\n"
       R"({"id": "c2", "text": "statistical learning"})"
       "\n"
       R"({"id": "c3", "text": "learning theory"})"
       "\n"
       R"({"id": "c4", "text": "volcano"})"
       "\n"
       R"({"id": "c5", "text": "sonata"})"
       "\n");
  spit(dir / "pairs.jsonl",
       R"({"a": "c1", "b": "c2", "label": 1})"
       "\n"
       R"({"a": "c2", "b": "c3", "label": 1})"
       "\n"
       R"({"a": "c4", "b": "c5", "label": 0})"
       "\n");
  return dir;
}

// Larger corpus so train/dev/test splits all stay populated.
fs::path train_fixture_dir() {
  const auto dir = fs::temp_directory_path() / "cgl_cli_train_fixture";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string concepts;
  const char* vocab[2] = {"gear spring cog ratchet", "tide reef coral kelp"};
  for (int side = 0; side < 2; ++side) {
    for (int i = 0; i < 5; ++i) {
      concepts += R"({"id": "s)" + std::to_string(side) + "n" + std::to_string(i) +
                  R"(", "text": ")" + vocab[side] + " item" + std::to_string(i) +
                  "\"}\n";
    }
  }
  spit(dir / "concepts.jsonl", concepts);
  std::string pairs;
  for (int side = 0; side < 2; ++side) {
    for (int i = 0; i + 1 < 5; ++i) {
      pairs += R"({"a": "s)" + std::to_string(side) + "n" + std::to_string(i) +
               R"(", "b": "s)" + std::to_string(side) + "n" + std::to_string(i + 1) +
               R"(", "label": 1})" + "\n";
    }
  }
  for (int i = 0; i < 5; ++i) {
    pairs += R"({"a": "s0n)" + std::to_string(i) + R"(", "b": "s1n)" +
             std::to_string(i) + R"(", "label": 0})" + "\n";
  }
  spit(dir / "pairs.jsonl", pairs);
  return dir;
}

}  // namespace

TEST_CASE("help and usage errors use the usual exit codes") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("stats --help").code == 0);
  CHECK(run_cli("no-such-command").code == 2);
  CHECK(run_cli("stats").code == 2);  // missing required options
}

TEST_CASE("graph statistics on the five concept example") {
  const auto dir = fixture_dir();
  const auto r = run_cli("stats --concepts " + (dir / "concepts.jsonl").string() +
                         " --pairs " + (dir / "pairs.jsonl").string());
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j.at("node") == 5);
  CHECK(j.at("edge") == 2);
  CHECK(j.at("components") == 3);
  CHECK(j.at("largest_component") == 3);
  CHECK(j.at("largest_component_closure_pairs") == 3);
  CHECK(j.at("conflicts") == 0);
  const auto hist = j.at("size_histogram");
  REQUIRE(hist.size() == 2);
  CHECK(hist[0][0] == 1);
  CHECK(hist[0][1] == 2);
  CHECK(hist[1][0] == 3);
  CHECK(hist[1][1] == 1);
  fs::remove_all(dir);
}

TEST_CASE("domain failures exit 1 with a structured error") {
  const auto dir = fixture_dir();
  const auto r = run_cli("stats --concepts " + (dir / "concepts.jsonl").string() +
                         " --pairs " + (dir / "missing.jsonl").string());
  CHECK(r.code == 1);
  const auto j = json::parse(r.err);
  CHECK(j.at("error") == "IoError");
  CHECK(j.at("message").is_string());

  const auto bad = run_cli("augment --concepts " + (dir / "concepts.jsonl").string() +
                           " --pairs " + (dir / "pairs.jsonl").string() + " --out " +
                           (dir / "aug").string() + " --target-ratio abc");
  CHECK(bad.code == 1);
  CHECK(json::parse(bad.err).at("error") == "InvalidConfig");
  fs::remove_all(dir);
}

TEST_CASE("identical augmentation runs write identical bytes") {
  const auto dir = train_fixture_dir();
  const std::string base = "augment --concepts " + (dir / "concepts.jsonl").string() +
                           " --pairs " + (dir / "pairs.jsonl").string() +
                           " --k 2 --target-ratio 2 --seed 9";
  REQUIRE(run_cli(base + " --out " + (dir / "a1").string()).code == 0);
  REQUIRE(run_cli(base + " --out " + (dir / "a2").string()).code == 0);
  for (const char* name : {"augmented_pairs.jsonl", "augment_report.json",
                           "manifest.json"}) {
    CHECK(slurp(dir / "a1" / name) == slurp(dir / "a2" / name));
    CHECK_FALSE(slurp(dir / "a1" / name).empty());
  }
  fs::remove_all(dir);
}

TEST_CASE("config file values load and flags override them") {
  const auto dir = train_fixture_dir();
  spit(dir / "run.cfg", "aug.k = 5\naug.ratio = 3\n");
  const auto r = run_cli("augment --concepts " + (dir / "concepts.jsonl").string() +
                         " --pairs " + (dir / "pairs.jsonl").string() + " --out " +
                         (dir / "aug").string() + " --config " +
                         (dir / "run.cfg").string() + " --k 2");
  REQUIRE(r.code == 0);
  const auto manifest = json::parse(slurp(dir / "aug" / "manifest.json"));
  CHECK(manifest.at("config").at("aug.k") == "2");      // flag wins
  CHECK(manifest.at("config").at("aug.ratio") == "3");  // config survives
  const auto report = json::parse(slurp(dir / "aug" / "augment_report.json"));
  CHECK(report.at("target_ratio") == 3.0);
  fs::remove_all(dir);
}

TEST_CASE("unbounded hop distance spells itself inf") {
  const auto dir = train_fixture_dir();
  const auto r = run_cli("augment --concepts " + (dir / "concepts.jsonl").string() +
                         " --pairs " + (dir / "pairs.jsonl").string() + " --out " +
                         (dir / "aug").string() + " --k inf --target-ratio 2");
  REQUIRE(r.code == 0);
  const auto manifest = json::parse(slurp(dir / "aug" / "manifest.json"));
  CHECK(manifest.at("config").at("aug.k") == "inf");
  fs::remove_all(dir);
}

TEST_CASE("train then eval closes the loop") {
  const auto dir = train_fixture_dir();
  const auto train = run_cli(
      "train --concepts " + (dir / "concepts.jsonl").string() + " --pairs " +
      (dir / "pairs.jsonl").string() + " --out " + (dir / "run").string() +
      " --epochs 2 --d-in 8 --d-out 4 --batch 4 --queue 4 --seed 3");
  REQUIRE(train.code == 0);
  const auto summary = json::parse(train.out);
  CHECK(summary.at("epochs") == 2);
  CHECK(fs::exists(dir / "run" / "checkpoint.json"));
  CHECK(fs::exists(dir / "run" / "train_log.jsonl"));
  CHECK(fs::exists(dir / "run" / "manifest.json"));
  REQUIRE(fs::exists(dir / "run" / "test_scores.jsonl"));

  const auto eval = run_cli("eval --scores " + (dir / "run" / "test_scores.jsonl").string() +
                            " --out " + (dir / "eval").string());
  REQUIRE(eval.code == 0);
  const auto report = json::parse(slurp(dir / "eval" / "report.json"));
  CHECK(report.at("accuracy").is_number());
  CHECK(report.at("accuracy").get<double>() >= 0.0);
  CHECK(report.at("accuracy").get<double>() <= 1.0);
  CHECK(report.contains("confusion"));
  fs::remove_all(dir);
}

TEST_CASE("run comparison from summary statistics") {
  const auto r = run_cli(
      "ttest --a-mean 10 --a-std 1 --a-n 10 --b-mean 11 --b-std 1 --b-n 10");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(std::abs(j.at("t").get<double>() - std::sqrt(5.0)) < 1e-12);
  CHECK(std::abs(j.at("df").get<double>() - 18.0) < 1e-12);
  CHECK(std::abs(j.at("p").get<double>() - 0.019124807258056927) < 1e-12);
}
