#include "canon/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <pthread.h>
#include <set>
#include <unordered_set>

namespace canon {

BinStats& BinStats::operator+=(const BinStats& o) {
  attempted += o.attempted;
  subtree += o.subtree;
  completions += o.completions;
  dead_ends += o.dead_ends;
  gained_rigid += o.gained_rigid;
  seen += o.seen;
  return *this;
}

const BinStats* StatsTable::find(const BinKey& k) const {
  auto it = bins_.find(k);
  return it == bins_.end() ? nullptr : &it->second;
}

void StatsTable::merge(const StatsTable& o) {
  for (auto& [k, v] : o.bins_) bins_[k] += v;
}

// ---------------------------------------------------------------------------
// Entropy

const EntropyModel::Derived& EntropyModel::derived(const Typ* origin) const {
  auto it = cache_.find(origin);
  if (it != cache_.end()) return it->second;
  const BinStats* flex = stats_.find({false, origin});
  const BinStats* rigid = stats_.find({true, origin});
  uint64_t nf = flex ? flex->seen : 0;
  uint64_t nr = rigid ? rigid->seen : 0;
  double p = params_.cold_p;
  if (nf + nr >= params_.warm_seen) p = static_cast<double>(nr) / static_cast<double>(nf + nr);
  double avg = params_.cold_avg;
  Derived d;
  if (flex && nf >= params_.warm_seen) {
    avg = static_cast<double>(flex->subtree) / static_cast<double>(std::max<uint64_t>(flex->completions, 1));
    d.dead_end = static_cast<double>(flex->dead_ends) / static_cast<double>(nf);
  }
  double est = std::clamp(p + (1 - p) * avg, 1.0, params_.cap);
  d.log_est = std::log(est);
  return cache_.emplace(origin, d).first->second;
}

double EntropyModel::log_unrefined(const BinKey& k) const {
  return k.rigid ? 0.0 : derived(k.origin).log_est;
}

double EntropyModel::unrefined(const BinKey& k) const { return std::exp(log_unrefined(k)); }

double EntropyModel::penalty(const BinKey& k) const {
  const BinStats* s = stats_.find(k);
  if (!s || s->seen < params_.warm_seen) return 1;
  double r = static_cast<double>(s->seen + 1) / static_cast<double>(s->completions + 1);
  return std::clamp(r, 1.0, params_.penalty_max);
}

double EntropyModel::dead_end_ratio(const Typ* origin) const { return derived(origin).dead_end; }

// ---------------------------------------------------------------------------
// Ordering

namespace {

BinKey key_of(const State& st, MetaId m) {
  return {st.equations().has_rigid(m), st.meta(m).type_node()};
}

bool later(const State& st, MetaId a, MetaId b) {
  const auto& pa = st.meta(a).path;
  const auto& pb = st.meta(b).path;
  return std::lexicographical_compare(pb.begin(), pb.end(), pa.begin(), pa.end());
}

}  // namespace

MetaId pick_metavariable(const State& st, const EntropyModel& model) {
  const auto& open = st.open();
  if (open.empty()) throw std::logic_error("pick_metavariable on a complete state");
  const EquationStore& eqs = st.equations();

  std::optional<MetaId> rigid;
  EqId oldest = 0;
  for (MetaId o : open) {
    if (!eqs.has_rigid(o)) continue;
    EqId id = *eqs.rigid_equation_of(o);
    if (!rigid || id < oldest) {
      rigid = o;
      oldest = id;
    }
  }
  if (rigid) return *rigid;

  const EntropyParams& P = model.params();
  std::optional<MetaId> dead;
  double worst = P.dead_end_threshold;
  for (MetaId o : open) {
    double r = model.dead_end_ratio(st.meta(o).type_node());
    if (r > worst) {
      worst = r;
      dead = o;
    }
  }
  if (dead) return *dead;

  MetaId last = open.front();
  for (MetaId o : open)
    if (later(st, o, last)) last = o;
  double base = model.log_unrefined(key_of(st, last)) + std::log(P.override_ratio);
  MetaId best = last;
  double best_e = base;
  for (MetaId o : open) {
    if (o == last) continue;
    double e = model.log_unrefined(key_of(st, o));
    if (e >= best_e && (best == last || e > best_e || later(st, o, best))) {
      best = o;
      best_e = e;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Solutions

namespace {

void key_into(const Term* t, std::string& out) {
  out += t->head.is_global() ? 'g' : 'l';
  out += std::to_string(t->head.index);
  if (t->args.empty()) return;
  out += '(';
  for (size_t i = 0; i < t->args.size(); ++i) {
    if (i) out += ',';
    key_into(t->args[i], out);
  }
  out += ')';
}

}  // namespace

std::string solution_key(const Term* t) {
  std::string s;
  key_into(t, s);
  return s;
}

// ---------------------------------------------------------------------------
// Iterations

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kEps = 1e-9;
constexpr double kMinStep = 0.05;
constexpr int kMaxProbes = 8;

// Entropy of a refined metavariable. Forced refinements still cost a little,
// so that every path eventually crosses the threshold.
constexpr double kMinFactor = 1.1;
double refined_log_factor(size_t valid) {
  return std::log(std::max(kMinFactor, static_cast<double>(valid)));
}

struct Control {
  Clock::time_point deadline;
  std::atomic<bool> cancel{false};
  std::atomic<bool> timed_out{false};
  uint64_t needed = 1;
  // Score of the needed-th best solution any worker holds; nothing scoring
  // above it can make the cut.
  std::atomic<double> bound{std::numeric_limits<double>::infinity()};
  const std::unordered_set<std::string>* known = nullptr;
  uint64_t node_cap = kUnlimited;  // probes stop here
  uint64_t budget = kUnlimited;    // refinements, in place of the clock when deterministic
  uint64_t spent = 0;              // refinements before the current run
  bool probe = false;
};

struct Interrupted {};

// Search recursion is as deep as the threshold allows, so it runs on threads
// with a large (lazily committed) stack.
class DeepThread {
 public:
  static constexpr size_t kStackBytes = size_t{512} << 20;

  explicit DeepThread(std::function<void()> fn) : fn_(std::move(fn)) {
    pthread_attr_t attr;
    pthread_attr_init(&attr);
    pthread_attr_setstacksize(&attr, kStackBytes);
    started_ = pthread_create(&tid_, &attr, &DeepThread::trampoline, this) == 0;
    pthread_attr_destroy(&attr);
    if (!started_) trampoline(this);
  }
  DeepThread(const DeepThread&) = delete;
  DeepThread& operator=(const DeepThread&) = delete;

  void join() {
    if (started_) pthread_join(tid_, nullptr);
    started_ = false;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  static void* trampoline(void* self) {
    auto* t = static_cast<DeepThread*>(self);
    try {
      t->fn_();
    } catch (...) {
      t->error_ = std::current_exception();
    }
    return nullptr;
  }

  std::function<void()> fn_;
  pthread_t tid_{};
  bool started_ = false;
  std::exception_ptr error_;
};

void run_deep(std::function<void()> fn) {
  DeepThread t(std::move(fn));
  t.join();
}

// Histogram over log-space values at fixed resolution.
class Histogram {
 public:
  static constexpr double kWidth = 0.01;
  static int64_t bucket(double v) { return static_cast<int64_t>(std::floor(v / kWidth)); }
  static double center(int64_t b) { return (static_cast<double>(b) + 0.5) * kWidth; }

  void add(double v, uint64_t weight, uint64_t n = 1) {
    auto& c = cells_[bucket(v)];
    c.first += weight;
    c.second += n;
  }
  void merge(const Histogram& o) {
    for (auto& [b, c] : o.cells_) {
      auto& d = cells_[b];
      d.first += c.first;
      d.second += c.second;
    }
  }
  bool empty() const { return cells_.empty(); }
  const std::map<int64_t, std::pair<uint64_t, uint64_t>>& cells() const { return cells_; }


 private:
  std::map<int64_t, std::pair<uint64_t, uint64_t>> cells_;  // bucket -> (weight, count)
};

// Subtree size as a function of remaining budget: the observed bucket means,
// made monotone, extended past the largest observed budget log-linearly with
// the fitted slope.
class SizeModel {
 public:
  SizeModel() = default;
  explicit SizeModel(const Histogram& h) {
    double run = 1;
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [b, c] : h.cells()) {
      double d = Histogram::center(b);
      double m = static_cast<double>(c.first) / static_cast<double>(c.second);
      run = std::max(run, m);
      points_.emplace_back(d, run);
      double w = static_cast<double>(c.second), y = std::log(m);
      sw += w; sx += w * d; sy += w * y; sxx += w * d * d; sxy += w * d * y;
    }
    double var = sxx * sw - sx * sx;
    if (points_.size() >= 2 && var > 1e-12) slope_ = std::clamp((sxy * sw - sx * sy) / var, 0.05, 1.0);
  }

  double operator()(double d) const {
    if (points_.empty()) return std::exp(std::clamp(d, 0.0, 700.0));
    auto it = std::upper_bound(points_.begin(), points_.end(), d,
                               [](double v, const std::pair<double, double>& p) { return v < p.first; });
    if (it == points_.begin()) return 1;
    if (it == points_.end()) {
      auto& [d0, m0] = points_.back();
      return m0 * std::exp(std::min(slope_ * (d - d0), 700.0));
    }
    return std::prev(it)->second;
  }

 private:
  std::vector<std::pair<double, double>> points_;
  double slope_ = 1;
};

struct Step {
  MetaId meta;
  uint32_t candidate;
  BinKey key;
  double lf;
  double lp;
};

// A solution's score is the highest entropy on its path, so a bound on it
// prunes like the threshold does.
struct Found {
  std::string key;
  OwnedTerm term;
  double score;
};

bool better(const Found& a, const Found& b) {
  return a.score != b.score ? a.score < b.score : a.key < b.key;
}

struct Outcome {
  StatsTable stats;
  Histogram budget;    // remaining budget -> subtree node count
  uint64_t pruned = 0;
  double min_pruned = std::numeric_limits<double>::infinity();
  Histogram frontier;  // entropies of pruned nodes
  Histogram reach;  // highest entropy on the path to each visited node
  std::vector<Found> found;
  uint64_t nodes = 0, recursive = 0, internal = 0, branch_sum = 0;
  uint64_t refinements = 0, violations = 0;
  bool interrupted = false;
};

class Worker {
 public:
  Worker(const Environment& env, const Typ* goal, const SearchConfig& cfg,
         const StatsTable& snapshot, double theta, Control& ctl)
      : st_(env, goal, cfg.mode), model_(snapshot, cfg.entropy), cfg_(cfg), theta_(theta), ctl_(ctl) {
    sync();
  }

  double log_entropy() const {
    double e = log_refined_.back();
    for (auto& [p, lp] : penalties_)
      if (open_below_[p] > 0) e += lp;
    for (MetaId o : st_.open()) e += model_.log_unrefined(key_of(st_, o));
    return e;
  }

  uint64_t dfs(double log_e, double reach) {
    if (out.nodes >= ctl_.node_cap) throw Interrupted{};
    ++out.nodes;
    out.reach.add(reach, 1);
    if (st_.complete()) {
      record_solution(reach);
      out.budget.add(theta_ - log_e, 1);
      return 1;
    }
    uint64_t before = st_.refinements;
    MetaId m;
    BinKey key;
    std::vector<Candidate> cands;
    std::vector<uint32_t> valid;
    BinStats& bs = expand_node(m, key, cands, valid);
    uint64_t size = 1;
    if (!valid.empty()) {
      double lf = refined_log_factor(valid.size());
      double lp = std::log(model_.penalty(key));
      for (uint32_t i : valid) {
        apply(m, cands[i], key, lf, lp);
        double child = log_entropy();
        if (child > theta_ + kEps) {
          prune(child);
        } else if (child <= bound()) {
          ++out.recursive;
          size += dfs(child, std::max(reach, child));
        }
        unapply();
      }
    }
    bs.subtree += st_.refinements - before;
    out.budget.add(theta_ - log_e, size);
    return size;
  }

  void replay(const std::vector<Step>& path) {
    record_ = false;
    for (const Step& s : path) {
      std::vector<Candidate> cands = st_.candidates(s.meta, cfg_.prefilter);
      apply(s.meta, cands.at(s.candidate), s.key, s.lf, s.lp);
    }
    record_ = true;
    replay_refinements_ = st_.refinements;
  }

  // Parallel split: expands nodes whose predicted size exceeds the grain and
  // turns the rest into jobs. Subtree sizes of expanded nodes are filled in
  // after the jobs join.
  struct Job {
    std::vector<Step> path;
    double log_e;
    double reach;
  };
  struct ChildRef {
    enum class Kind { Job, Node, Leaf } kind;
    size_t index;
  };
  struct Expanded {
    BinKey key;
    double budget;
    uint64_t own_refinements;
    std::vector<ChildRef> children;
  };
  struct Item {
    bool job;
    size_t index;  // job index or index into out.found
  };

  ChildRef split(double log_e, double reach, const std::function<double(double)>& predict, double grain,
                 std::vector<Step>& path, std::vector<Job>& jobs, std::vector<Expanded>& recs,
                 std::vector<Item>& items) {
    if (st_.complete()) {
      ++out.nodes;
      out.reach.add(reach, 1);
      size_t before = out.found.size();
      record_solution(reach);
      if (out.found.size() > before) items.push_back({false, before});
      out.budget.add(theta_ - log_e, 1);
      return {ChildRef::Kind::Leaf, 0};
    }
    if (path.size() >= 64 || predict(theta_ - log_e) <= grain) {
      jobs.push_back({path, log_e, reach});
      items.push_back({true, jobs.size() - 1});
      return {ChildRef::Kind::Job, jobs.size() - 1};
    }
    ++out.nodes;
    out.reach.add(reach, 1);
    uint64_t before = st_.refinements;
    MetaId m;
    BinKey key;
    std::vector<Candidate> cands;
    std::vector<uint32_t> valid;
    expand_node(m, key, cands, valid);
    size_t self = recs.size();
    recs.push_back({key, theta_ - log_e, 0, {}});
    uint64_t inner = 0;
    if (!valid.empty()) {
      double lf = refined_log_factor(valid.size());
      double lp = std::log(model_.penalty(key));
      for (uint32_t i : valid) {
        apply(m, cands[i], key, lf, lp);
        double child = log_entropy();
        if (child > theta_ + kEps) {
          prune(child);
        } else if (child <= bound()) {
          ++out.recursive;
          path.push_back({m, i, key, lf, lp});
          uint64_t r0 = st_.refinements;
          ChildRef c = split(child, std::max(reach, child), predict, grain, path, jobs, recs, items);
          inner += st_.refinements - r0;
          path.pop_back();
          recs[self].children.push_back(c);
        }
        unapply();
      }
    }
    recs[self].own_refinements = st_.refinements - before - inner;
    return {ChildRef::Kind::Node, self};
  }

  Outcome out;
  uint64_t replay_refinements_ = 0;
  const State& state() const { return st_; }

  void finish() {
    out.refinements = st_.refinements;
    out.violations = st_.violations;
  }

 private:
  BinStats& expand_node(MetaId& m, BinKey& key, std::vector<Candidate>& cands,
                        std::vector<uint32_t>& valid) {
    tick();
    m = pick_metavariable(st_, model_);
    key = key_of(st_, m);
    cands = st_.candidates(m, cfg_.prefilter);
    for (uint32_t i = 0; i < cands.size(); ++i) {
      tick();
      if (st_.refine(m, cands[i]).ok) {
        valid.push_back(i);
        st_.backtrack(m);
      }
    }
    BinStats& bs = out.stats.at(key);
    ++bs.seen;
    bs.attempted += cands.size();
    if (key.rigid) ++bs.gained_rigid;
    if (valid.empty()) ++bs.dead_ends;
    ++out.internal;
    out.branch_sum += valid.size();
    return bs;
  }

  struct Applied {
    MetaId meta;
    int32_t delta;
    bool penalized;
  };

  void sync() {
    open_below_.resize(st_.meta_count(), 0);
    keys_.resize(st_.meta_count());
  }

  void prune(double e) {
    ++out.pruned;
    out.min_pruned = std::min(out.min_pruned, e);
    out.frontier.add(e, 1);
  }

  void apply(MetaId m, const Candidate& c, const BinKey& key, double lf, double lp) {
    RefineResult r = st_.refine(m, c);
    if (!r.ok) throw std::logic_error("a previously valid refinement violated");
    sync();
    keys_[m] = key;
    auto n = static_cast<int32_t>(r.num_children);
    open_below_[m] = n;
    for (int32_t j = 0; j < n; ++j) open_below_[r.first_child + j] = 0;
    if (n == 0 && record_) ++out.stats.at(key).completions;
    int32_t delta = n - 1;
    if (delta != 0) {
      for (MetaId a = st_.meta(m).parent; a != kNoMeta; a = st_.meta(a).parent) {
        open_below_[a] += delta;
        if (open_below_[a] == 0 && record_) ++out.stats.at(keys_[a]).completions;
      }
    }
    log_refined_.push_back(log_refined_.back() + lf);
    bool pen = lp > 0 && n > 0;
    if (pen) penalties_.emplace_back(m, lp);
    applied_.push_back({m, delta, pen});
  }

  void unapply() {
    Applied a = applied_.back();
    applied_.pop_back();
    if (a.delta != 0)
      for (MetaId x = st_.meta(a.meta).parent; x != kNoMeta; x = st_.meta(x).parent)
        open_below_[x] -= a.delta;
    log_refined_.pop_back();
    if (a.penalized) penalties_.pop_back();
    st_.backtrack(a.meta);
  }

  void tick() {
    if (st_.refinements < next_check_) return;
    next_check_ = st_.refinements + 1024;
    if (ctl_.cancel.load(std::memory_order_relaxed)) throw Interrupted{};
    if (ctl_.spent + st_.refinements >= ctl_.budget || Clock::now() >= ctl_.deadline) {
      ctl_.timed_out = true;
      ctl_.cancel = true;
      throw Interrupted{};
    }
  }

  double bound() const {
    return std::min(local_bound_, ctl_.bound.load(std::memory_order_relaxed));
  }

  void record_solution(double score) {
    if (ctl_.probe) return;
    OwnedTerm t = st_.extract_term();
    std::string k = solution_key(t.root);
    if (ctl_.known->count(k) || local_keys_.count(k)) return;
    local_keys_.insert(k);
    out.found.push_back({std::move(k), std::move(t), score});
    best_.insert(score);
    if (best_.size() > ctl_.needed) best_.erase(std::prev(best_.end()));
    if (best_.size() < ctl_.needed) return;
    local_bound_ = *best_.rbegin();
    double cur = ctl_.bound.load();
    while (local_bound_ < cur && !ctl_.bound.compare_exchange_weak(cur, local_bound_)) {
    }
  }

  State st_;
  EntropyModel model_;
  const SearchConfig& cfg_;
  double theta_;
  Control& ctl_;
  std::vector<int32_t> open_below_;
  std::vector<BinKey> keys_;
  std::vector<double> log_refined_{0.0};
  std::vector<std::pair<MetaId, double>> penalties_;
  std::vector<Applied> applied_;
  std::unordered_set<std::string> local_keys_;
  std::multiset<double> best_;
  double local_bound_ = std::numeric_limits<double>::infinity();
  uint64_t next_check_ = 0;
  bool record_ = true;
};

void absorb(Outcome& into, Outcome&& o) {
  into.stats.merge(o.stats);
  into.budget.merge(o.budget);
  into.pruned += o.pruned;
  into.min_pruned = std::min(into.min_pruned, o.min_pruned);
  into.frontier.merge(o.frontier);
  into.reach.merge(o.reach);

  into.nodes += o.nodes;
  into.recursive += o.recursive;
  into.internal += o.internal;
  into.branch_sum += o.branch_sum;
  into.refinements += o.refinements;
  into.violations += o.violations;
  into.interrupted = into.interrupted || o.interrupted;
}

Outcome run_sequential(const Environment& env, const Typ* goal, const SearchConfig& cfg,
                       const StatsTable& snapshot, double theta, Control& ctl) {
  Worker w(env, goal, cfg, snapshot, theta, ctl);
  try {
    double e = w.log_entropy();
    w.dfs(e, e);
  } catch (const Interrupted&) {
    w.out.interrupted = true;
  }
  w.finish();
  return std::move(w.out);
}

Outcome run_parallel(const Environment& env, const Typ* goal, const SearchConfig& cfg,
                     const StatsTable& snapshot, const SizeModel& size, double theta,
                     Control& ctl) {
  Worker ex(env, goal, cfg, snapshot, theta, ctl);
  auto predict = [&](double budget) { return size(budget); };
  double root = ex.log_entropy();
  double grain = cfg.grain;
  if (grain <= 0)
    grain = std::max(64.0, predict(theta - root) / (8.0 * static_cast<double>(cfg.workers)));

  std::vector<Step> path;
  std::vector<Worker::Job> jobs;
  std::vector<Worker::Expanded> recs;
  std::vector<Worker::Item> items;
  std::optional<Worker::ChildRef> top;
  try {
    top = ex.split(root, root, predict, grain, path, jobs, recs, items);
  } catch (const Interrupted&) {
    ex.out.interrupted = true;
  }
  ex.finish();

  std::vector<Outcome> results(jobs.size());
  std::vector<uint64_t> sizes(jobs.size(), 0), job_refs(jobs.size(), 0);
  if (!ex.out.interrupted) {
    std::atomic<size_t> next{0};
    auto run = [&]() {
      for (;;) {
        size_t j = next.fetch_add(1);
        if (j >= jobs.size()) return;
        Worker w(env, goal, cfg, snapshot, theta, ctl);
        w.replay(jobs[j].path);
        try {
          sizes[j] = w.dfs(jobs[j].log_e, jobs[j].reach);
        } catch (const Interrupted&) {
          w.out.interrupted = true;
        }
        w.finish();
        job_refs[j] = w.out.refinements - w.replay_refinements_;
        results[j] = std::move(w.out);
      }
    };
    std::vector<std::unique_ptr<DeepThread>> pool;
    unsigned n = std::min<unsigned>(cfg.workers, static_cast<unsigned>(std::max<size_t>(jobs.size(), 1)));
    for (unsigned i = 0; i < n; ++i) pool.push_back(std::make_unique<DeepThread>(run));
    for (auto& t : pool) t->join();
  }

  Outcome total;
  std::vector<Found> ordered;
  for (auto& it : items) {
    if (!it.job) {
      ordered.push_back(std::move(ex.out.found[it.index]));
      continue;
    }
    for (auto& f : results[it.index].found) ordered.push_back(std::move(f));
  }
  bool complete = !ex.out.interrupted;
  for (auto& r : results) complete = complete && !r.interrupted;
  if (complete && top) {
    // Subtree totals of expanded nodes, bottom-up.
    std::function<std::pair<uint64_t, uint64_t>(const Worker::ChildRef&)> sum =
        [&](const Worker::ChildRef& c) -> std::pair<uint64_t, uint64_t> {
      switch (c.kind) {
        case Worker::ChildRef::Kind::Leaf: return {1, 0};
        case Worker::ChildRef::Kind::Job: return {sizes[c.index], job_refs[c.index]};
        case Worker::ChildRef::Kind::Node: break;
      }
      const Worker::Expanded& r = recs[c.index];
      uint64_t nodes = 1, refs = r.own_refinements;
      for (auto& ch : r.children) {
        auto [a, b] = sum(ch);
        nodes += a;
        refs += b;
      }
      ex.out.stats.at(r.key).subtree += refs;
      ex.out.budget.add(r.budget, nodes);
      return {nodes, refs};
    };
    sum(*top);
  }
  absorb(total, std::move(ex.out));
  for (auto& r : results) absorb(total, std::move(r));
  total.interrupted = !complete;
  total.found = std::move(ordered);
  return total;
}

// Smallest threshold whose reach count is at least n.
double reach_quantile(const Histogram& reach, double n, double fallback) {
  double acc = 0;
  for (auto& [b, c] : reach.cells()) {
    acc += static_cast<double>(c.second);
    if (acc >= n) return (static_cast<double>(b) + 1) * Histogram::kWidth;
  }
  return fallback;
}

// Threshold predicted to search `target` nodes, from a probe at `theta`. Past
// the probe, each doubling is assumed to cost the same threshold increase as
// the probe's last doublings, extrapolating at most two. Every admitted pruned
// node adds at least itself, which bounds the step from above. Only a count
// read off a complete probe is final; anything else is probed again.
struct NextThreshold {
  double theta;
  bool final;
};

NextThreshold next_threshold(double theta, const Outcome& probe, double target) {
  double n = static_cast<double>(probe.nodes);
  // A capped probe saw only a prefix of the tree, so its count is a lower bound.
  if (n >= target) return {std::min(theta, reach_quantile(probe.reach, target, theta)), !probe.interrupted};
  if (probe.pruned == 0) return {theta, true};
  double w = std::max({theta - reach_quantile(probe.reach, n / 2, theta),
                       (theta - reach_quantile(probe.reach, n / 4, theta)) / 2, kMinStep});
  double doublings = std::log2(target / n);
  double next = theta + w * std::min(doublings, 2.0);
  double bound = reach_quantile(probe.frontier, target - n, next);
  return {std::max(std::min(next, bound), probe.min_pruned + kEps), false};
}

}  // namespace

// ---------------------------------------------------------------------------

double RunStats::refinements_per_sec() const {
  return seconds > 0 ? static_cast<double>(refinements) / seconds : 0;
}

double RunStats::branching_factor() const {
  return internal_nodes ? static_cast<double>(branch_sum) / static_cast<double>(internal_nodes) : 0;
}

double RunStats::final_iteration_fraction() const {
  if (iterations.empty() || seconds <= 0) return 0;
  return iterations.back().seconds / seconds;
}

std::string RunStats::to_kv() const {
  std::ostringstream os;
  auto rate = [&](uint64_t v) { return seconds > 0 ? static_cast<double>(v) / seconds : 0.0; };
  os << "refinements_total " << refinements << "\n";
  os << "refinements_per_sec " << refinements_per_sec() << "\n";
  os << "nonviolating_per_sec " << rate(nonviolating) << "\n";
  os << "recursive_calls_per_sec " << rate(recursive_calls) << "\n";
  os << "branching_factor " << branching_factor() << "\n";
  os << "final_iteration_fraction " << final_iteration_fraction() << "\n";
  os << "iterations " << iterations.size() << "\n";
  double log_final = iterations.empty() ? 0.0 : iterations.back().log_threshold;
  os << "threshold_final " << std::exp(log_final) << "\n";
  os << "log_threshold_final " << log_final << "\n";
  os << "nodes_total " << nodes << "\n";
  os << "probe_nodes " << probe_nodes << "\n";
  return os.str();
}

namespace {

SolveResult solve_here(const Environment& env, const Typ* goal, const SearchConfig& cfg) {
  if (cfg.count == 0) throw std::invalid_argument("count must be at least 1");
  if (cfg.workers == 0) throw std::invalid_argument("workers must be at least 1");
  auto start = Clock::now();
  Control ctl;
  ctl.deadline = cfg.timeout > 0 && std::isfinite(cfg.timeout)
                     ? start + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(cfg.timeout))
                     : Clock::time_point::max();
  if (cfg.deterministic) {
    ctl.deadline = Clock::time_point::max();
    if (cfg.timeout > 0 && std::isfinite(cfg.timeout))
      ctl.budget = static_cast<uint64_t>(cfg.timeout * kNominalRate);
  }
  std::unordered_set<std::string> known;
  ctl.known = &known;

  SolveResult res;
  RunStats& rs = res.stats;
  StatsTable snapshot;
  Histogram budget;  // every iteration's remaining budget -> subtree size
  SizeModel size;
  double theta;
  {
    Worker probe(env, goal, cfg, snapshot, 0, ctl);
    theta = probe.log_entropy() + std::log(4.0);
  }
  auto account = [&](const Outcome& o) {
    rs.refinements += o.refinements;
    rs.nonviolating += o.refinements - o.violations;
  };

  for (;;) {
    ctl.needed = cfg.count - known.size();
    ctl.bound = std::numeric_limits<double>::infinity();
    ctl.cancel = false;
    auto t0 = Clock::now();
    Outcome o = cfg.workers > 1 && !cfg.deterministic
                    ? run_parallel(env, goal, cfg, snapshot, size, theta, ctl)
                    : run_sequential(env, goal, cfg, snapshot, theta, ctl);
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();

    std::sort(o.found.begin(), o.found.end(), better);
    for (auto& f : o.found)
      if (known.insert(f.key).second && res.solutions.size() < cfg.count)
        res.solutions.push_back(std::move(f.term));
    account(o);
    ctl.spent += o.refinements;
    rs.recursive_calls += o.recursive;
    rs.nodes += o.nodes;
    rs.internal_nodes += o.internal;
    rs.branch_sum += o.branch_sum;
    rs.iterations.push_back({theta, o.nodes, !o.interrupted, secs});
    snapshot.merge(o.stats);
    budget.merge(o.budget);
    size = SizeModel(budget);

    if (ctl.timed_out) {
      res.timed_out = true;
      break;
    }
    if (res.solutions.size() >= cfg.count) break;
    if (!o.interrupted && o.pruned == 0) {
      res.exhausted = true;
      break;
    }

    // The refreshed statistics reshape the tree, so measure it again at the
    // current threshold before choosing the next one.
    double target = 2.0 * static_cast<double>(o.nodes);
    Control pc;
    pc.deadline = ctl.deadline;
    pc.budget = ctl.budget;
    pc.known = &known;
    pc.probe = true;
    pc.node_cap = static_cast<uint64_t>(1.5 * target) + 16;
    // Complete probes below the target raise `lo`; probes at or over it lower
    // `hi`. Estimates outside the bracket, or read off a capped probe, are
    // brought down to its midpoint.
    NextThreshold next{theta, false};
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int round = 0; !next.final && round < kMaxProbes; ++round) {
      pc.spent = ctl.spent;
      double at = next.theta;
      Outcome p = run_sequential(env, goal, cfg, snapshot, at, pc);
      account(p);
      ctl.spent += p.refinements;
      rs.probe_nodes += p.nodes;
      if (pc.timed_out) break;
      if (p.interrupted || static_cast<double>(p.nodes) >= target)
        hi = std::min(hi, at);
      else
        lo = std::max(lo, at);
      next = next_threshold(at, p, target);
      if (!next.final && std::isfinite(lo) && std::isfinite(hi)) {
        double mid = (lo + hi) / 2;
        if (next.theta <= lo || next.theta >= hi || p.interrupted) next.theta = std::min(next.theta, mid);
      }
    }
    if (pc.timed_out) {
      res.timed_out = true;
      break;
    }
    theta = next.theta;
  }
  rs.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  res.final_stats = std::move(snapshot);
  return res;
}

}  // namespace

SolveResult solve(const Environment& env, const Typ* goal, const SearchConfig& cfg) {
  SolveResult r;
  run_deep([&] { r = solve_here(env, goal, cfg); });
  return r;
}

}  // namespace canon
