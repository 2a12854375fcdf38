#pragma once

// Stochastic agent-based counterpart of the mean-field model.
//
// Each round: (1) everyone plays a donation game with everyone else, acting
// on the public broadcast standings; (2) the institution reassesses each
// player from one randomly sampled donor interaction per member, and the
// broadcast flips good iff at least q of the Q members say good; (3) tax
// audits fire, detected evaders are broadcast bad for the round, bribers pay
// the institution to stay good; (4) one agent compares payoffs with a random
// other and copies their strategy with the Fermi probability.
//
// A private-assessment mode replaces the institution with per-agent opinion
// matrices updated by one random observation per observer per round; it
// exists to reproduce the reputation collapse without a broadcast.
//
// Randomness is drawn from counter-based substreams keyed by
// (seed, round, purpose), so enabling audits or bribery does not perturb the
// assessment or learning draws.  Identical configs produce identical traces.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "meanfield.hpp"
#include "norms.hpp"
#include "stability.hpp"

namespace institutio {

inline double fermi(double pi_self, double pi_other, double omega_sel) {
  return 1.0 / (1.0 + std::exp(omega_sel * (pi_self - pi_other)));
}

namespace rng {

inline uint64_t mix(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// SplitMix64 substream keyed by (seed, round, purpose).
class Stream {
 public:
  Stream(uint64_t seed, uint64_t round, uint64_t purpose)
      : state_(mix(mix(mix(seed) ^ (round + 1)) ^ (purpose + 0x51ull))) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  uint64_t state_;
};

enum class Purpose : uint64_t { Assess = 1, AuditDelta = 2, AuditBeta = 3, Learn = 4 };

}  // namespace rng

struct BehaviorFlags {
  bool pays_tax = true;
  bool evades = false;
  bool bribes_unconditional = false;
  bool bribes_conditional = false;

  bool operator==(const BehaviorFlags&) const = default;
};

struct InvaderSpec {
  Strategy strategy = Strategy::AllD;
  BehaviorFlags behavior{};
  int count = 1;
};

struct AbmConfig {
  int n_pop = 200;
  SocialNorm norm;
  InstitutionConfig inst{};
  std::optional<TaxScheme> scheme;  // derived fields must be populated
  GameParams game{};
  double omega_sel = 1.0;
  long rounds = 5000;
  long burn_in = 1000;
  uint64_t seed = 0;
  PopulationComposition initial_comp = PopulationComposition::all_disc();
  std::optional<InvaderSpec> invader;
  bool private_assessment = false;
};

struct RoundRecord {
  long round = 0;
  int n_allc = 0, n_alld = 0, n_disc = 0;
  double coop_rate = 0.0;
  double good_allc = 0.0, good_alld = 0.0, good_disc = 0.0;
  double pi_allc = 0.0, pi_alld = 0.0, pi_disc = 0.0;
  long audits_delta = 0, audits_beta = 0;  // cumulative counts
  double bribes_paid = 0.0;                // cumulative amount
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

struct AbmTrace {
  std::vector<RoundRecord> rounds;
  long burn_in = 0;
  MeanSe good_allc, good_alld, good_disc;  // batch-means estimates
};

// Autocorrelation-robust mean/SE by the method of batch means (20 batches).
inline MeanSe batch_mean_se(const std::vector<double>& series) {
  constexpr int kBatches = 20;
  const long n = static_cast<long>(series.size());
  if (n < kBatches)
    throw std::invalid_argument("batch means needs at least 20 samples, got " +
                                std::to_string(n));
  const long m = n / kBatches;
  double means[kBatches];
  for (int b = 0; b < kBatches; ++b) {
    double s = 0.0;
    for (long i = b * m; i < (b + 1) * m; ++i) s += series[i];
    means[b] = s / m;
  }
  double grand = 0.0;
  for (double v : means) grand += v;
  grand /= kBatches;
  double var = 0.0;
  for (double v : means) var += (v - grand) * (v - grand);
  var /= (kBatches - 1);
  return {grand, std::sqrt(var / kBatches)};
}

inline MeanSe estimate_series(const AbmTrace& trace, long burn_in,
                              double RoundRecord::*field) {
  if (static_cast<long>(trace.rounds.size()) <= burn_in)
    throw std::invalid_argument("trace shorter than burn-in");
  std::vector<double> xs;
  xs.reserve(trace.rounds.size() - burn_in);
  for (size_t i = burn_in; i < trace.rounds.size(); ++i)
    xs.push_back(trace.rounds[i].*field);
  return batch_mean_se(xs);
}

struct ReputationEstimates {
  MeanSe allc, alld, disc;
};

inline ReputationEstimates estimate_reputations(const AbmTrace& trace,
                                                long burn_in) {
  return {estimate_series(trace, burn_in, &RoundRecord::good_allc),
          estimate_series(trace, burn_in, &RoundRecord::good_alld),
          estimate_series(trace, burn_in, &RoundRecord::good_disc)};
}

namespace detail {

struct Agent {
  Strategy strategy = Strategy::Disc;
  BehaviorFlags flags{};
  bool invader_lineage = false;
};

inline void validate_config(const AbmConfig& cfg) {
  require(cfg.n_pop >= 2, "n_pop must be at least 2");
  require(cfg.rounds >= 1, "rounds must be positive");
  require(cfg.burn_in >= 0 && cfg.burn_in < cfg.rounds,
          "burn_in must satisfy 0 <= burn_in < rounds");
  require(cfg.omega_sel > 0.0, "selection strength must be positive");
  if (cfg.scheme) {
    require(cfg.scheme->derived.has_value(),
            "tax scheme must carry derived max_tax/salary/bribe values");
    require(!cfg.private_assessment,
            "tax and bribery require an institution; disable private "
            "assessment");
  }
  if (cfg.private_assessment)
    require(cfg.n_pop >= 3, "private assessment needs n_pop >= 3");
  if (cfg.invader) {
    const InvaderSpec& inv = *cfg.invader;
    require(inv.count >= 1 && inv.count < cfg.n_pop,
            "invader count must lie in [1, N)");
    const BehaviorFlags& f = inv.behavior;
    require(!(f.bribes_unconditional && f.bribes_conditional),
            "invader cannot bribe both unconditionally and conditionally");
    if (f.bribes_unconditional || f.bribes_conditional)
      require(f.evades, "bribing invaders are tax evaders");
    if (f.evades) {
      require(!f.pays_tax, "an evader does not pay the tax");
      require(cfg.scheme.has_value(), "evasion flags need a tax scheme");
    }
  }
}

inline std::array<int, 3> initial_counts(const PopulationComposition& comp,
                                         int n) {
  std::array<double, 3> f = {comp.f_allc, comp.f_alld, comp.f_disc};
  std::array<int, 3> c{};
  std::array<double, 3> rem{};
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = f[i] * n;
    c[i] = static_cast<int>(std::floor(exact));
    rem[i] = exact - c[i];
    assigned += c[i];
  }
  while (assigned < n) {  // largest remainder, ties by strategy order
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (rem[i] > rem[best]) best = i;
    ++c[best];
    rem[best] = -1.0;
    ++assigned;
  }
  return c;
}

}  // namespace detail

class Simulation {
 public:
  explicit Simulation(AbmConfig cfg) : cfg_(std::move(cfg)) {
    detail::validate_config(cfg_);
    const int n = cfg_.n_pop;
    agents_.resize(n);
    const auto counts = detail::initial_counts(cfg_.initial_comp, n);
    int idx = 0;
    const bool taxed = cfg_.scheme.has_value();
    for (int s = 0; s < 3; ++s) {
      const Strategy strat = kAllStrategies[s];
      for (int k = 0; k < counts[s]; ++k) {
        agents_[idx].strategy = strat;
        agents_[idx].flags.pays_tax = taxed;
        ++idx;
      }
    }
    if (cfg_.invader) {
      for (int k = 0; k < cfg_.invader->count; ++k) {
        detail::Agent& a = agents_[n - 1 - k];
        a.strategy = cfg_.invader->strategy;
        a.flags = cfg_.invader->behavior;
        a.invader_lineage = true;
      }
    }

    good_.assign(n, 1);
    next_good_.assign(n, 1);
    payoff_.assign(n, 0.0);
    if (cfg_.private_assessment) {
      opinion_.assign(static_cast<size_t>(n) * n, 1);
      row_good_.assign(n, n - 1);
      col_all_.assign(n, n - 1);
      col_disc_.assign(n, 0);
      int n_disc = 0;
      for (const auto& a : agents_)
        if (a.strategy == Strategy::Disc) ++n_disc;
      for (int j = 0; j < n; ++j)
        col_disc_[j] = n_disc - (agents_[j].strategy == Strategy::Disc ? 1 : 0);
    }
  }

  const AbmConfig& config() const { return cfg_; }
  long round() const { return round_; }

  int invader_count() const {
    int k = 0;
    for (const auto& a : agents_) k += a.invader_lineage ? 1 : 0;
    return k;
  }

  // Mean payoff gap (invader lineage minus residents) for the round just
  // played; only meaningful while both are present.
  double last_payoff_gap() const { return last_gap_; }
  const RoundRecord& last_record() const { return record_; }

  void step() {
    ++round_;
    if (cfg_.private_assessment)
      step_private();
    else
      step_institutional();
    finish_round();
  }

 private:
  void step_institutional() {
    const int n = cfg_.n_pop;
    const double b = cfg_.game.benefit, c = cfg_.game.cost;
    int n_allc = 0, n_alld = 0, n_disc = 0;
    for (const auto& a : agents_) {
      switch (a.strategy) {
        case Strategy::AllC: ++n_allc; break;
        case Strategy::AllD: ++n_alld; break;
        case Strategy::Disc: ++n_disc; break;
      }
    }
    int n_good = 0, n_good_disc = 0;
    for (int j = 0; j < n; ++j) {
      n_good += good_[j];
      if (agents_[j].strategy == Strategy::Disc) n_good_disc += good_[j];
    }

    // (1) all-pairs donation games on the current broadcast
    const double tax = cfg_.scheme
                           ? cfg_.scheme->tax_rate * cfg_.scheme->derived->max_tax
                           : 0.0;
    long coops = static_cast<long>(n_allc) * (n - 1) +
                 static_cast<long>(n_disc) * n_good - n_good_disc;
    for (int i = 0; i < n; ++i) {
      const detail::Agent& a = agents_[i];
      const bool is_allc = a.strategy == Strategy::AllC;
      const bool is_disc = a.strategy == Strategy::Disc;
      const double benefit =
          b * ((n_allc - (is_allc ? 1 : 0)) +
               (good_[i] ? n_disc - (is_disc ? 1 : 0) : 0));
      double cost = 0.0;
      if (is_allc)
        cost = c * (n - 1);
      else if (is_disc)
        cost = c * (n_good - good_[i]);
      payoff_[i] = (benefit - cost) / (n - 1);
      if (a.flags.pays_tax) payoff_[i] -= tax;
    }
    record_.coop_rate =
        static_cast<double>(coops) / (static_cast<double>(n) * (n - 1));

    // (2) institutional reassessment from this round's interactions
    rng::Stream assess(cfg_.seed, round_, static_cast<uint64_t>(rng::Purpose::Assess));
    const int Q = cfg_.inst.q_members, q = cfg_.inst.q_threshold;
    for (int i = 0; i < n; ++i) {
      int votes = 0;
      for (int m = 0; m < Q; ++m) {
        int j = static_cast<int>(assess.below(n - 1));
        if (j >= i) ++j;
        const Action act = action_of(agents_[i].strategy, good_[j] != 0);
        const Reputation rep = good_[j] ? Reputation::Good : Reputation::Bad;
        if (assess.uniform() < cfg_.norm.assign_prob(rep, act)) ++votes;
      }
      next_good_[i] = votes >= q ? 1 : 0;
    }

    // (3) audits, detection, bribes
    if (cfg_.scheme) {
      const double delta = cfg_.scheme->delta;
      const double beta = cfg_.scheme->beta;
      const double bribe_total =
          cfg_.inst.q_members * cfg_.scheme->derived->min_bribe;
      rng::Stream audit(cfg_.seed, round_,
                        static_cast<uint64_t>(rng::Purpose::AuditDelta));
      bool any_bribe = false;
      for (int i = 0; i < n; ++i) {
        const detail::Agent& a = agents_[i];
        if (a.flags.evades && audit.uniform() < delta) {
          ++audits_delta_;
          if (a.flags.bribes_conditional) {
            payoff_[i] -= bribe_total;
            bribes_paid_ += bribe_total;
            any_bribe = true;
            next_good_[i] = 1;  // pays their way back to a good broadcast
          } else if (!a.flags.bribes_unconditional) {
            next_good_[i] = 0;  // punished for the round
          }
        }
        if (a.flags.bribes_unconditional) {
          payoff_[i] -= bribe_total;
          bribes_paid_ += bribe_total;
          any_bribe = true;
          next_good_[i] = 1;
        }
      }
      if (any_bribe && beta > 0.0) {
        // members replaced on discovery behave identically; only bookkept
        rng::Stream baudit(cfg_.seed, round_,
                           static_cast<uint64_t>(rng::Purpose::AuditBeta));
        for (int m = 0; m < cfg_.inst.q_members; ++m)
          if (baudit.uniform() < beta) ++audits_beta_;
      }
    }
    std::swap(good_, next_good_);

    record_stats(n_allc, n_alld, n_disc);
  }

  void step_private() {
    const int n = cfg_.n_pop;
    const double b = cfg_.game.benefit, c = cfg_.game.cost;
    int n_allc = 0, n_alld = 0, n_disc = 0;
    for (const auto& a : agents_) {
      switch (a.strategy) {
        case Strategy::AllC: ++n_allc; break;
        case Strategy::AllD: ++n_alld; break;
        case Strategy::Disc: ++n_disc; break;
      }
    }

    long coops = static_cast<long>(n_allc) * (n - 1);
    for (int i = 0; i < n; ++i)
      if (agents_[i].strategy == Strategy::Disc) coops += row_good_[i];
    record_.coop_rate =
        static_cast<double>(coops) / (static_cast<double>(n) * (n - 1));

    for (int i = 0; i < n; ++i) {
      const detail::Agent& a = agents_[i];
      const bool is_allc = a.strategy == Strategy::AllC;
      const double benefit = b * ((n_allc - (is_allc ? 1 : 0)) + col_disc_[i]);
      double cost = 0.0;
      if (is_allc)
        cost = c * (n - 1);
      else if (a.strategy == Strategy::Disc)
        cost = c * row_good_[i];
      payoff_[i] = (benefit - cost) / (n - 1);
    }

    // each observer re-judges one randomly observed donor
    rng::Stream assess(cfg_.seed, round_, static_cast<uint64_t>(rng::Purpose::Assess));
    for (int o = 0; o < n; ++o) {
      int d = static_cast<int>(assess.below(n - 1));
      if (d >= o) ++d;
      int rcp = static_cast<int>(assess.below(n - 2));  // skip o and d
      const int lo = std::min(o, d), hi = std::max(o, d);
      if (rcp >= lo) ++rcp;
      if (rcp >= hi) ++rcp;
      const bool donor_sees_good = opinion_[idx(d, rcp)] != 0;
      const Action act = action_of(agents_[d].strategy, donor_sees_good);
      const Reputation rep =
          opinion_[idx(o, rcp)] ? Reputation::Good : Reputation::Bad;
      const bool verdict = assess.uniform() < cfg_.norm.assign_prob(rep, act);
      set_opinion(o, d, verdict);
    }

    record_stats(n_allc, n_alld, n_disc);
  }

  void record_stats(int n_allc, int n_alld, int n_disc) {
    const int n = cfg_.n_pop;
    record_.round = round_;
    record_.n_allc = n_allc;
    record_.n_alld = n_alld;
    record_.n_disc = n_disc;
    double good_sum[3] = {0, 0, 0};
    double pay_sum[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) {
      const int s = static_cast<int>(agents_[i].strategy);
      pay_sum[s] += payoff_[i];
      if (cfg_.private_assessment)
        good_sum[s] += static_cast<double>(col_all_[i]) / (n - 1);
      else
        good_sum[s] += good_[i];
    }
    const int counts[3] = {n_allc, n_alld, n_disc};
    double good_frac[3], pay_mean[3];
    for (int s = 0; s < 3; ++s) {
      good_frac[s] = counts[s] > 0 ? good_sum[s] / counts[s] : 0.0;
      pay_mean[s] = counts[s] > 0 ? pay_sum[s] / counts[s] : 0.0;
    }
    record_.good_allc = good_frac[0];
    record_.good_alld = good_frac[1];
    record_.good_disc = good_frac[2];
    record_.pi_allc = pay_mean[0];
    record_.pi_alld = pay_mean[1];
    record_.pi_disc = pay_mean[2];
    record_.audits_delta = audits_delta_;
    record_.audits_beta = audits_beta_;
    record_.bribes_paid = bribes_paid_;

    // invader/resident payoff gap for the round just played
    double inv_sum = 0.0, res_sum = 0.0;
    int inv_n = 0, res_n = 0;
    for (int i = 0; i < n; ++i) {
      if (agents_[i].invader_lineage) {
        inv_sum += payoff_[i];
        ++inv_n;
      } else {
        res_sum += payoff_[i];
        ++res_n;
      }
    }
    last_gap_ = (inv_n > 0 && res_n > 0)
                    ? inv_sum / inv_n - res_sum / res_n
                    : std::numeric_limits<double>::quiet_NaN();
  }

  void finish_round() {
    // (4) one Fermi strategy-update event
    const int n = cfg_.n_pop;
    rng::Stream learn(cfg_.seed, round_, static_cast<uint64_t>(rng::Purpose::Learn));
    const int a = static_cast<int>(learn.below(n));
    int o = static_cast<int>(learn.below(n - 1));
    if (o >= a) ++o;
    const double p = fermi(payoff_[a], payoff_[o], cfg_.omega_sel);
    if (learn.uniform() < p) copy_agent(a, o);
  }

  void copy_agent(int dst, int src) {
    if (cfg_.private_assessment &&
        (agents_[dst].strategy == Strategy::Disc) !=
            (agents_[src].strategy == Strategy::Disc)) {
      const int n = cfg_.n_pop;
      const int sign = agents_[src].strategy == Strategy::Disc ? 1 : -1;
      for (int j = 0; j < n; ++j)
        if (j != dst) col_disc_[j] += sign * opinion_[idx(dst, j)];
    }
    agents_[dst] = agents_[src];
  }

  static Action action_of(Strategy s, bool recipient_good) {
    switch (s) {
      case Strategy::AllC: return Action::Cooperate;
      case Strategy::AllD: return Action::Defect;
      default: return recipient_good ? Action::Cooperate : Action::Defect;
    }
  }

  size_t idx(int observer, int subject) const {
    return static_cast<size_t>(observer) * cfg_.n_pop + subject;
  }

  void set_opinion(int observer, int subject, bool good) {
    uint8_t& cell = opinion_[idx(observer, subject)];
    if (cell == static_cast<uint8_t>(good)) return;
    const int d = good ? 1 : -1;
    cell = good ? 1 : 0;
    row_good_[observer] += d;
    col_all_[subject] += d;
    if (agents_[observer].strategy == Strategy::Disc) col_disc_[subject] += d;
  }

  AbmConfig cfg_;
  std::vector<detail::Agent> agents_;
  std::vector<uint8_t> good_, next_good_;
  std::vector<double> payoff_;
  std::vector<uint8_t> opinion_;       // private mode, row-major observer x subject
  std::vector<int> row_good_;          // private mode helpers
  std::vector<int> col_all_, col_disc_;
  long round_ = 0;
  long audits_delta_ = 0, audits_beta_ = 0;
  double bribes_paid_ = 0.0;
  double last_gap_ = 0.0;
  RoundRecord record_{};
};

inline AbmTrace run(const AbmConfig& cfg) {
  Simulation sim(cfg);
  AbmTrace trace;
  trace.burn_in = cfg.burn_in;
  trace.rounds.reserve(cfg.rounds);
  for (long t = 0; t < cfg.rounds; ++t) {
    sim.step();
    trace.rounds.push_back(sim.last_record());
  }
  ReputationEstimates est = estimate_reputations(trace, cfg.burn_in);
  trace.good_allc = est.allc;
  trace.good_alld = est.alld;
  trace.good_disc = est.disc;
  return trace;
}

struct InvasionResult {
  int fixation_count = 0;    // invader lineage took the whole population
  int extinction_count = 0;  // invader lineage died out
  int unresolved = 0;        // round budget hit first
  double mean_payoff_gap = 0.0;  // time-averaged invader - resident payoff
};

inline int thread_budget() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("INSTITUTIO_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && cap < static_cast<long>(hw)) hw = static_cast<unsigned>(cap);
  }
  return static_cast<int>(hw);
}

// Independent replicates, each absorbing at fixation or extinction of the
// invader lineage (or at the round budget).  Replicates share nothing and
// own derived substreams; results merge by replicate index.
inline InvasionResult invasion_trial(const AbmConfig& cfg, int replicates) {
  detail::require(cfg.invader.has_value(), "invasion trial needs an invader");
  detail::require(replicates >= 1, "replicates must be positive");

  struct PerReplicate {
    int outcome = -1;  // 0 extinct, 1 fixed, 2 unresolved
    double gap = 0.0;
  };
  std::vector<PerReplicate> results(replicates);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= replicates) return;
      AbmConfig sub = cfg;
      sub.seed = rng::mix(rng::mix(cfg.seed) ^ static_cast<uint64_t>(k + 1));
      Simulation sim(sub);
      double gap_sum = 0.0;
      long gap_rounds = 0;
      int outcome = 2;
      for (long t = 0; t < sub.rounds; ++t) {
        sim.step();
        const double g = sim.last_payoff_gap();
        if (!std::isnan(g)) {
          gap_sum += g;
          ++gap_rounds;
        }
        const int k_inv = sim.invader_count();
        if (k_inv == 0) {
          outcome = 0;
          break;
        }
        if (k_inv == sub.n_pop) {
          outcome = 1;
          break;
        }
      }
      results[k].outcome = outcome;
      results[k].gap = gap_rounds > 0 ? gap_sum / gap_rounds : 0.0;
    }
  };

  const int n_threads = std::min(thread_budget(), replicates);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  InvasionResult out;
  double gap_total = 0.0;
  for (const auto& r : results) {
    if (r.outcome == 0) ++out.extinction_count;
    if (r.outcome == 1) ++out.fixation_count;
    if (r.outcome == 2) ++out.unresolved;
    gap_total += r.gap;
  }
  out.mean_payoff_gap = gap_total / replicates;
  return out;
}

// Trace CSV: one row per recorded round, floating point with 9 significant
// digits.
inline void write_trace_csv(const AbmTrace& trace, int n_pop, std::ostream& os) {
  os << "round,f_allc,f_alld,f_disc,coop_rate,good_allc,good_alld,good_disc,"
        "pi_allc,pi_alld,pi_disc,audits_delta,audits_beta,bribes_paid\n";
  char buf[512];
  for (const RoundRecord& r : trace.rounds) {
    const double n = n_pop;
    std::snprintf(buf, sizeof(buf),
                  "%ld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%ld,"
                  "%ld,%.9g\n",
                  r.round, r.n_allc / n, r.n_alld / n, r.n_disc / n, r.coop_rate,
                  r.good_allc, r.good_alld, r.good_disc, r.pi_allc, r.pi_alld,
                  r.pi_disc, r.audits_delta, r.audits_beta, r.bribes_paid);
    os << buf;
  }
}

}  // namespace institutio
