#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

#include "fusionkit/matrix.hpp"
#include "fusionkit/datasets.hpp"
#include "fusionkit/surrogate.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using testsupport::read_file;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result run(const std::string& args) {
  const std::string cmd = std::string("'") + FUSIONKIT_CLI + "' " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::string tiny_train_args(const fs::path& data, const fs::path& out) {
  return "train --dataset " + q(data) + " --out " + q(out) +
         " --classifiers.1.train.epochs 15 --classifiers.1.train.hidden_units=8 --classifiers.2.train.epochs 40";
}

void write_scores(const fs::path& path, const fusionkit::Matrix& m, const std::vector<std::size_t>& labels) {
  fusionkit::save_scores_csv(m, testsupport::class_names(static_cast<std::size_t>(m.cols())), labels, path);
}

}  // namespace

TEST_CASE("help and version exit 0") {
  CHECK(run("--help").code == 0);
  const Result v = run("--version");
  CHECK(v.code == 0);
  CHECK(v.output.find("fusionkit") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run("").code == 1);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("fuse --alpha").code == 1);
  CHECK(run("fuse --column-mode sideways").code == 1);
  CHECK(run("train --entropy.beta 3").code == 1);
  CHECK(run("train --entropy.alpha 1").code == 1);
  CHECK(run("bench --classifiers 1 --rows 10").code == 1);
}

TEST_CASE("a missing dataset exits 2 and names the path") {
  testsupport::TempDir dir("cli-missing");
  const Result r = run("train --dataset " + q(dir / "absent") + " --out " + q(dir / "run"));
  CHECK(r.code == 2);
  CHECK(r.output.find("absent") != std::string::npos);
}

TEST_CASE("uncalibrated scores exit 2, degenerate weights exit 3") {
  testsupport::TempDir dir("cli-invalid");
  testsupport::write_file(dir / "bad.csv", "label,c0,c1\n0,0.9,0.3\n");
  fusionkit::Matrix m(2, 2);
  m << 0.6, 0.4, 0.3, 0.7;
  write_scores(dir / "ok.csv", m, {0, 1});
  const Result bad = run("fuse --scores " + q(dir / "bad.csv") + " " + q(dir / "ok.csv") + " --out " + q(dir / "o"));
  CHECK(bad.code == 2);
  CHECK(bad.output.find("bad.csv") != std::string::npos);

  write_scores(dir / "s1.csv", fusionkit::Matrix::Identity(2, 2), {0, 1});
  write_scores(dir / "s2.csv", fusionkit::Matrix::Identity(2, 2), {0, 1});
  const std::string pair = "fuse --scores " + q(dir / "s1.csv") + " " + q(dir / "s2.csv") + " --out " + q(dir / "o");
  CHECK(run(pair).code == 3);
  const Result fallback = run(pair + " --fallback-uniform");
  CHECK(fallback.code == 0);
  CHECK(fallback.output.find("s1=0.5 s2=0.5") != std::string::npos);
}

TEST_CASE("fuse on identical files prints equal weights") {
  testsupport::TempDir dir("cli-identical");
  fusionkit::Matrix m(3, 3);
  m << 0.7, 0.2, 0.1, 0.1, 0.8, 0.1, 0.3, 0.3, 0.4;
  write_scores(dir / "a.csv", m, {0, 1, 2});
  write_scores(dir / "b.csv", m, {0, 1, 2});
  const Result r = run("fuse --scores " + q(dir / "a.csv") + " " + q(dir / "b.csv") + " --methods 'entropy;sum' --out " + q(dir / "o"));
  REQUIRE(r.code == 0);
  CHECK(r.output.find("a=0.5 b=0.5") != std::string::npos);
  CHECK(fs::exists(dir / "o/fused/entropy.csv"));
  CHECK(fs::exists(dir / "o/fused/sum.csv"));
  const std::string manifest = read_file(dir / "o/fuse_manifest.json");
  CHECK(manifest.find("\"alpha\": 2.0") != std::string::npos);
  CHECK(manifest.find("\"tau\": 0.1") != std::string::npos);
}

TEST_CASE("train, fuse and evaluate are byte-for-byte reproducible") {
  testsupport::TempDir dir("cli-determinism");
  fusionkit::UciHarSurrogateOptions o;
  o.train_count = 90;
  o.test_count = 40;
  fusionkit::write_ucihar_surrogate(dir / "data", o);
  for (const char* run_name : {"r1", "r2"}) {
    const fs::path out = dir / run_name;
    REQUIRE(run(tiny_train_args(dir / "data", out)).code == 0);
    REQUIRE(run("fuse --run " + q(out)).code == 0);
    const Result e = run("evaluate --run " + q(out));
    REQUIRE(e.code == 0);
    CHECK(e.output.find("Entropy Weighted Fusion (rcn-standin + svm-standin)") != std::string::npos);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "r1")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), dir / "r1");
    std::string a = read_file(entry.path());
    std::string b = read_file(dir / "r2" / rel);
    // manifests echo their own output directory
    for (std::string* s : {&a, &b}) {
      for (const std::string from : {(dir / "r1").string(), (dir / "r2").string()}) {
        for (std::size_t pos = s->find(from); pos != std::string::npos; pos = s->find(from)) s->replace(pos, from.size(), "RUN");
      }
    }
    CAPTURE(rel);
    CHECK(a == b);
    ++compared;
  }
  CHECK(compared >= 10);
}

TEST_CASE("make-surrogate writes readable files") {
  testsupport::TempDir dir("cli-surrogate");
  CHECK(run("make-surrogate wisdm-raw --out " + q(dir / "raw.txt")).code == 0);
  CHECK(fs::file_size(dir / "raw.txt") > 1000);
  CHECK(run("make-surrogate mnist --out " + q(dir / "x")).code == 1);
}
