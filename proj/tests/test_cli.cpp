#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "helpers.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run canon_cli(const std::string& args) {
  std::string cmd = std::string(CANON_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string corpus_arg(const char* name) { return canon::test::corpus(name); }

fs::path scratch_dir(const char* name) {
  fs::path d = fs::temp_directory_path() / ("canon_cli_" + std::string(name));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("solve prints the identity") {
  Run r = canon_cli("solve " + corpus_arg("id.canon"));
  CHECK(r.status == 0);
  CHECK(r.out == "fun A a => a\n");
}

TEST_CASE("an uninhabited goal times out with no output") {
  Run r = canon_cli("solve " + corpus_arg("false.canon") + " --timeout 1");
  CHECK(r.status == 2);
  CHECK(r.out.empty());
}

TEST_CASE("several solutions, one per block") {
  Run r = canon_cli("solve " + corpus_arg("ite.canon") + " --count 5 --check");
  CHECK(r.status == 0);
  CHECK(r.out.find("fun A c h t e => Decidable.rec c (fun t_1 => A) (fun h_1 => e) (fun h_1 => t) h\n") !=
        std::string::npos);
  CHECK(r.out.find("\n\n") != std::string::npos);
}

TEST_CASE("errors exit with 1") {
  CHECK(canon_cli("solve /nonexistent/file.canon").status == 1);
  fs::path d = scratch_dir("bad");
  std::ofstream(d / "bad.canon") << "goal : (";
  CHECK(canon_cli("solve " + (d / "bad.canon").string()).status == 1);
}

TEST_CASE("deterministic runs are byte-identical") {
  std::string args = "solve " + corpus_arg("decide_eq_true.canon") + " --count 5 --deterministic";
  Run a = canon_cli(args), b = canon_cli(args);
  CHECK(a.status == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("bench on an empty directory") {
  fs::path d = scratch_dir("empty");
  Run r = canon_cli("bench " + d.string());
  CHECK(r.status == 0);
  CHECK(r.out ==
        "problem,outcome,solutions,seconds,proof_length,refinements,refinements_per_sec,iterations,"
        "rejected,message\n");
}

TEST_CASE("bench records a malformed file and carries on") {
  fs::path d = scratch_dir("mixed");
  fs::copy_file(corpus_arg("id.canon"), d / "a_id.canon");
  std::ofstream(d / "b_bad.canon") << "goal : Missing";
  fs::copy_file(corpus_arg("compose.canon"), d / "c_compose.canon");
  Run r = canon_cli("bench " + d.string() + " --check");
  CHECK(r.status == 0);
  CHECK(r.out.find("\na_id,solved,1,") != std::string::npos);
  CHECK(r.out.find("\nb_bad,error,0,") != std::string::npos);
  CHECK(r.out.find("\nc_compose,solved,1,") != std::string::npos);
}
