// canon: solve problem files and benchmark a corpus.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "canon/frontend.hpp"
#include "canon/oracle.hpp"
#include "canon/search.hpp"

namespace fs = std::filesystem;
using namespace canon;

namespace {

struct Flags {
  double timeout = 15;
  uint64_t count = 1;
  bool synth = false;
  unsigned workers = 1;
  bool stats = false;
  bool check = false;
  bool deterministic = false;
  bool noprefilter = false;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Command-line flags first, then the file's pragmas on top of them.
SearchConfig config_for(const Problem& p, const Flags& f, bool pragmas_win) {
  SearchConfig cfg;
  cfg.timeout = f.timeout;
  cfg.count = f.count == 0 ? kUnlimited : f.count;
  cfg.mode = f.synth ? Mode::Synthesis : Mode::Default;
  cfg.workers = std::max(1u, f.workers);
  cfg.deterministic = f.deterministic;
  cfg.prefilter = !f.noprefilter;
  if (pragmas_win) {
    const SearchOverrides& o = p.overrides;
    if (o.timeout) cfg.timeout = *o.timeout;
    if (o.count) cfg.count = *o.count == 0 ? kUnlimited : *o.count;
    if (o.synthesis) cfg.mode = *o.synthesis ? Mode::Synthesis : Mode::Default;
    if (o.prefilter) cfg.prefilter = *o.prefilter;
  }
  return cfg;
}

// Number of oracle rejections, each reported on stderr.
size_t check_all(const Problem& p, const SolveResult& r, const std::string& label) {
  size_t bad = 0;
  for (auto& s : r.solutions) {
    oracle::Report rep;
    try {
      rep = oracle::check(p.env, s.root, p.goal);
    } catch (const oracle::FuelExhausted& e) {
      std::cerr << label << ": check skipped: " << e.what() << "\n";
      continue;
    }
    if (rep.accepted) continue;
    ++bad;
    std::cerr << label << ": check rejected: " << rep.reason << " at [";
    for (size_t i = 0; i < rep.path.size(); ++i) std::cerr << (i ? "," : "") << rep.path[i];
    std::cerr << "]\n  " << print_term(p.env, s.root) << "\n";
  }
  return bad;
}

int cmd_solve(const std::string& path, const Flags& f, const std::set<std::string>& given) {
  Problem p = load_problem(read_file(path));
  SearchConfig cfg = config_for(p, f, false);
  // Pragmas fill in whatever the command line left at its default.
  const SearchOverrides& o = p.overrides;
  if (o.timeout && !given.count("timeout")) cfg.timeout = *o.timeout;
  if (o.count && !given.count("count")) cfg.count = *o.count == 0 ? kUnlimited : *o.count;
  if (o.synthesis && !given.count("synth")) cfg.mode = *o.synthesis ? Mode::Synthesis : Mode::Default;
  if (o.prefilter && !given.count("noprefilter")) cfg.prefilter = *o.prefilter;

  SolveResult r = solve(p.env, p.goal, cfg);
  for (size_t i = 0; i < r.solutions.size(); ++i) {
    if (i) std::cout << "\n";
    std::cout << print_term(p.env, r.solutions[i].root) << "\n";
  }
  std::cout.flush();
  if (f.stats) {
    std::cerr << r.stats.to_kv() << "solutions " << r.solutions.size() << "\n"
              << "timed_out " << r.timed_out << "\n"
              << "exhausted " << r.exhausted << "\n";
    if (!r.solutions.empty()) std::cerr << "proof_length " << proof_length(r.solutions[0].root) << "\n";
  }
  if (f.check && check_all(p, r, path) > 0) return 1;
  if (!r.solutions.empty()) return 0;
  return 2;
}

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

int cmd_bench(const std::string& dir, const Flags& f, const std::string& out_path) {
  std::vector<fs::path> files;
  for (auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".canon") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::ofstream file_out;
  if (!out_path.empty()) {
    file_out.open(out_path);
    if (!file_out) throw std::runtime_error("cannot write " + out_path);
  }
  std::ostream& rows = out_path.empty() ? std::cout : file_out;
  rows << "problem,outcome,solutions,seconds,proof_length,refinements,refinements_per_sec,"
          "iterations,rejected,message\n";

  size_t solved = 0, slow = 0, rejected_total = 0, length_sum = 0;
  double total = 0;
  for (auto& path : files) {
    std::string id = path.stem().string();
    std::string outcome, message;
    size_t nsol = 0, length = 0, rejected = 0;
    double secs = 0;
    RunStats stats;
    auto t0 = std::chrono::steady_clock::now();
    try {
      Problem p = load_problem(read_file(path));
      SolveResult r = solve(p.env, p.goal, config_for(p, f, true));
      stats = r.stats;
      nsol = r.solutions.size();
      if (nsol > 0) {
        outcome = "solved";
        length = proof_length(r.solutions[0].root);
      } else {
        outcome = r.timed_out ? "timeout" : "exhausted";
      }
      if (f.check) rejected = check_all(p, r, id);
    } catch (const std::exception& e) {
      outcome = "error";
      message = e.what();
    }
    secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    total += secs;
    if (outcome == "solved") {
      ++solved;
      length_sum += length;
      if (secs > 1) ++slow;
    }
    rejected_total += rejected;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", secs);
    rows << csv_field(id) << ',' << outcome << ',' << nsol << ',' << buf << ','
         << (outcome == "solved" ? std::to_string(length) : "") << ',' << stats.refinements << ','
         << static_cast<uint64_t>(stats.refinements_per_sec()) << ',' << stats.iterations.size()
         << ',' << rejected << ',' << csv_field(message) << "\n";
    rows.flush();
  }

  std::cerr << "solved " << solved << "/" << files.size() << "\n"
            << "total_seconds " << total << "\n"
            << "over_1s " << slow << "\n"
            << "mean_proof_length " << (solved ? double(length_sum) / solved : 0) << "\n";
  if (f.check) std::cerr << "rejected " << rejected_total << "\n";
  return rejected_total > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Type inhabitation by refinement search"};
  app.require_subcommand(1);

  Flags f;
  if (const char* w = std::getenv("CANON_WORKERS")) f.workers = static_cast<unsigned>(std::atoi(w));
  auto common = [&](CLI::App* c) {
    c->add_option("--timeout", f.timeout, "Seconds per problem")->capture_default_str();
    c->add_option("--count", f.count, "Solutions to find, 0 for all")->capture_default_str();
    c->add_flag("--synth", f.synth, "Synthesis mode");
    c->add_option("--workers", f.workers, "Worker threads (default from CANON_WORKERS)");
    c->add_flag("--check", f.check, "Check every output with the reference checker");
    c->add_flag("--deterministic", f.deterministic,
                "Single worker, timeout read as a refinement budget");
    c->add_flag("--noprefilter", f.noprefilter, "Disable the candidate pre-filter");
  };

  std::string path;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one problem file");
  solve_cmd->add_option("file", path, "Problem file")->required();
  solve_cmd->add_flag("--stats", f.stats, "Print run statistics to stderr");
  common(solve_cmd);

  std::string dir, out_path;
  auto* bench_cmd = app.add_subcommand("bench", "Run every .canon file in a directory");
  bench_cmd->add_option("dir", dir, "Corpus directory")->required();
  bench_cmd->add_option("--out", out_path, "Write the result rows here instead of stdout");
  common(bench_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) {
      std::set<std::string> given;
      for (const char* name : {"timeout", "count", "synth", "noprefilter"})
        if (solve_cmd->count(std::string("--") + name) > 0) given.insert(name);
      return cmd_solve(path, f, given);
    }
    return cmd_bench(dir, f, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
