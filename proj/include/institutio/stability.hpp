#pragma once

// Payoffs and invasion thresholds for the well-mixed population.
//
// All thresholds take a solved ReputationProfile (or its f_DISC = 1 standing
// probabilities) rather than re-solving internally, so closed forms and
// numeric fixed points can be cross-checked through the same code path.
//
// Critical ratios are extended reals: +infinity is an explicit marker, and
// boundary equalities resolve to the infeasible branch.

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "meanfield.hpp"
#include "norms.hpp"

namespace institutio {

// Extended positive real: either a finite ratio or the "no finite b/c works"
// marker.  Never a sentinel double.
class CriticalRatio {
 public:
  static CriticalRatio finite(double v) { return CriticalRatio(true, v); }
  static CriticalRatio infinite() { return CriticalRatio(false, 0.0); }

  bool is_finite() const { return finite_; }
  double value() const {
    if (!finite_) throw std::logic_error("critical ratio is infinite");
    return value_;
  }
  // Ordering that treats the infinite marker as larger than any finite value.
  bool less_than(const CriticalRatio& o) const {
    if (!finite_) return false;
    if (!o.finite_) return true;
    return value_ < o.value_;
  }

 private:
  CriticalRatio(bool f, double v) : finite_(f), value_(v) {}
  bool finite_;
  double value_;
};

struct StabilityVerdict {
  CriticalRatio critical_bc = CriticalRatio::infinite();
  bool feasible = false;  // true iff critical_bc is finite
  std::string condition_note;
};

// Payoff-gap denominators within rounding noise of zero are classified as the
// boundary, which resolves to the infeasible branch.
inline constexpr double kBoundaryEps = 1e-12;

inline bool above_boundary(double den, double scale) {
  return den > kBoundaryEps * scale;
}

inline StabilityVerdict feasible_verdict(double value, std::string note) {
  return {CriticalRatio::finite(value), true, std::move(note)};
}
inline StabilityVerdict infeasible_verdict(std::string note) {
  return {CriticalRatio::infinite(), false, std::move(note)};
}

struct PayoffVector {
  double pi_allc = 0.0;
  double pi_alld = 0.0;
  double pi_disc = 0.0;
};

// Tax scheme: rate r applies to the maximum rational tax; delta is the
// per-round chance a tax evader is detected, beta the per-round chance a
// bribed institution member is caught.
struct TaxDerived {
  double max_tax = 0.0;    // payoff surplus created by the institution
  double salary = 0.0;     // N r max_tax / Q, per member per round
  double min_bribe = 0.0;  // beta * salary
};

struct TaxScheme {
  double tax_rate = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  int n_pop = 0;
  std::optional<TaxDerived> derived;

  TaxScheme() = default;
  TaxScheme(double r, double d, double b, int n)
      : tax_rate(r), delta(d), beta(b), n_pop(n) {
    detail::require(r >= 0.0 && r <= 1.0, "tax rate r must lie in [0,1]");
    detail::require(d >= 0.0 && d <= 1.0, "delta must lie in [0,1]");
    detail::require(b >= 0.0 && b <= 1.0, "beta must lie in [0,1]");
    detail::require(n >= 1, "population size N must be positive");
  }

  double n_beta() const { return static_cast<double>(n_pop) * beta; }
};

// Expected per-round payoffs; entries for absent strategies are the payoffs a
// rare invader of that type would earn.
inline PayoffVector payoffs(const ReputationProfile& profile,
                            const PopulationComposition& comp,
                            const GameParams& game) {
  const double b = game.benefit, c = game.cost;
  const double fa = comp.f_allc, fz = comp.f_disc;
  const PerStrategy& G = profile.population_good;
  PayoffVector pi;
  pi.pi_allc = b * (fa + fz * G.allc) - c;
  pi.pi_alld = b * (fa + fz * G.alld);
  pi.pi_disc = b * (fa + fz * G.disc) - c * profile.average_good;
  return pi;
}

// Minimum b/c for resident discriminators to resist a rare defector, given
// the f_DISC = 1 standing probabilities.
inline StabilityVerdict critical_bc_plain(double g_disc, double g_alld) {
  detail::require(g_disc >= 0.0 && g_disc <= 1.0, "g_disc must lie in [0,1]");
  detail::require(g_alld >= 0.0 && g_alld <= 1.0, "g_alld must lie in [0,1]");
  if (!above_boundary(g_disc - g_alld, g_disc + g_alld))
    return infeasible_verdict("G_DISC <= G_ALLD: no finite b/c stabilizes DISC");
  const double v = 1.0 + g_alld / (g_disc - g_alld);
  if (v == 1.0)
    return feasible_verdict(v, "boundary: any b > c suffices");
  return feasible_verdict(v, "G_DISC > G_ALLD");
}

// The institution's value over the baseline; this is the most a rational
// population pays per round to keep it running.
inline double max_tax(double pi_institution, double pi_baseline) {
  detail::require(pi_baseline >= 0.0, "baseline payoff must be nonnegative");
  if (pi_institution < pi_baseline)
    throw std::invalid_argument(
        "institution payoff below baseline: the institution is not worth "
        "sustaining");
  return pi_institution - pi_baseline;
}

struct SalaryBribe {
  double salary;
  double min_bribe;
};

inline SalaryBribe salary_and_bribe(const TaxScheme& scheme,
                                    const InstitutionConfig& inst,
                                    double max_tax_value) {
  detail::require(inst.q_members >= 1, "institution must have Q >= 1 members");
  const double s = static_cast<double>(scheme.n_pop) * scheme.tax_rate *
                   max_tax_value / inst.q_members;
  return {s, scheme.beta * s};
}

inline TaxScheme with_derived(TaxScheme scheme, const InstitutionConfig& inst,
                              double max_tax_value) {
  const SalaryBribe sb = salary_and_bribe(scheme, inst, max_tax_value);
  scheme.derived = TaxDerived{max_tax_value, sb.salary, sb.min_bribe};
  return scheme;
}

// --- invasion scenarios against taxpaying discriminators -------------------

enum class InvaderScenario { TaxEvader, UnconditionalBriber, ConditionalBriber };

struct ScenarioParams {
  GameParams game;
  double g_disc = 0.0;  // G_DISC at f_DISC = 1
  double g_alld = 0.0;  // G_ALLD at f_DISC = 1
  double tax_rate = 0.0;
  double delta = 0.0;
  double n_beta = 0.0;
};

inline double taxpayer_payoff(const ScenarioParams& p) {
  return (1.0 - p.tax_rate) * (p.game.benefit - p.game.cost) * p.g_disc;
}

inline double invader_payoff(InvaderScenario sc, const ScenarioParams& p) {
  const double b = p.game.benefit, c = p.game.cost;
  switch (sc) {
    case InvaderScenario::TaxEvader:
      return b * (1.0 - p.delta) * p.g_alld;
    case InvaderScenario::UnconditionalBriber:
      return b - p.n_beta * p.tax_rate * (b - c) * p.g_disc;
    case InvaderScenario::ConditionalBriber:
      return b * ((1.0 - p.delta) * p.g_alld + p.delta) -
             p.delta * p.n_beta * p.tax_rate * (b - c) * p.g_disc;
  }
  return 0.0;
}

// Pi'_DISC - Pi'_ALLD, the quantity whose sign decides invasion.
inline double payoff_gap(InvaderScenario sc, const ScenarioParams& p) {
  return taxpayer_payoff(p) - invader_payoff(sc, p);
}

struct GapPartials {
  double d_tax_rate = 0.0;
  double d_delta = 0.0;
  std::optional<double> d_n_beta;  // absent for the plain tax evader
};

inline GapPartials payoff_gap_partials(InvaderScenario sc,
                                       const ScenarioParams& p) {
  const double b = p.game.benefit, c = p.game.cost;
  const double bc = b - c;
  GapPartials out;
  switch (sc) {
    case InvaderScenario::TaxEvader:
      out.d_tax_rate = -bc * p.g_disc;
      out.d_delta = b * p.g_alld;
      break;
    case InvaderScenario::UnconditionalBriber:
      out.d_tax_rate = bc * p.g_disc * (p.n_beta - 1.0);
      out.d_delta = 0.0;
      out.d_n_beta = bc * p.g_disc * p.tax_rate;
      break;
    case InvaderScenario::ConditionalBriber:
      out.d_tax_rate = bc * p.g_disc * (p.delta * p.n_beta - 1.0);
      out.d_delta = bc * p.g_disc * p.n_beta * p.tax_rate - b * (1.0 - p.g_alld);
      out.d_n_beta = bc * p.delta * p.g_disc * p.tax_rate;
      break;
  }
  return out;
}

// Minimum b/c to resist a defector that evades the tax and is detected (and
// broadcast bad) with probability delta.
inline StabilityVerdict critical_bc_tax_evader(double g_disc, double g_alld,
                                               double r, double delta) {
  detail::require(r >= 0.0 && r <= 1.0, "tax rate r must lie in [0,1]");
  detail::require(delta >= 0.0 && delta <= 1.0, "delta must lie in [0,1]");
  const double num = (1.0 - delta) * g_alld;
  const double den = (1.0 - r) * g_disc - num;
  if (!above_boundary(den, (1.0 - r) * g_disc + num))
    return infeasible_verdict("(1-r) G_DISC <= (1-delta) G_ALLD: evaders invade "
                              "at any b/c");
  return feasible_verdict(1.0 + num / den, "(1-r) G_DISC > (1-delta) G_ALLD");
}

// Sufficient condition for taxpaying discriminators to resist tax-evading
// discriminators: audits must outpace the tax rate.
inline bool discriminator_evader_resists(double r, double delta) {
  detail::require(r >= 0.0 && r <= 1.0, "tax rate r must lie in [0,1]");
  detail::require(delta >= 0.0 && delta <= 1.0, "delta must lie in [0,1]");
  return delta > r;
}

struct BriberVerdict {
  StabilityVerdict verdict;
  // audit-speed threshold on N*beta below which no finite b/c works
  double n_beta_critical = std::numeric_limits<double>::infinity();
};

// Defecting tax evader who pays the minimum bribe every round and is always
// broadcast good.
inline BriberVerdict critical_bc_unconditional_briber(double g_disc, double r,
                                                      double n_beta) {
  detail::require(g_disc > 0.0 && g_disc <= 1.0, "g_disc must lie in (0,1]");
  detail::require(r >= 0.0 && r <= 1.0, "tax rate r must lie in [0,1]");
  detail::require(n_beta >= 0.0, "N beta must be nonnegative");
  BriberVerdict out;
  if (r > 0.0)
    out.n_beta_critical = 1.0 + (1.0 / r) * (1.0 / g_disc - 1.0);
  if (r == 0.0) {
    out.verdict = infeasible_verdict("r = 0: salary is zero, so bribery costs "
                                     "nothing");
    return out;
  }
  const double den = g_disc * (1.0 + (n_beta - 1.0) * r) - 1.0;
  if (!above_boundary(den, g_disc * (1.0 + std::abs(n_beta - 1.0) * r) + 1.0)) {
    out.verdict = infeasible_verdict("N beta <= 1 + (1/r)(1/G_DISC - 1): "
                                     "auditing too slow to deter bribery");
    return out;
  }
  out.verdict =
      feasible_verdict(1.0 + 1.0 / den, "N beta > 1 + (1/r)(1/G_DISC - 1)");
  return out;
}

// Defecting tax evader who bribes only upon being detected.
inline BriberVerdict critical_bc_conditional_briber(double g_disc, double g_alld,
                                                    double r, double delta,
                                                    double n_beta) {
  detail::require(g_disc > 0.0 && g_disc <= 1.0, "g_disc must lie in (0,1]");
  detail::require(g_alld >= 0.0 && g_alld <= 1.0, "g_alld must lie in [0,1]");
  detail::require(r >= 0.0 && r <= 1.0, "tax rate r must lie in [0,1]");
  detail::require(delta >= 0.0 && delta <= 1.0, "delta must lie in [0,1]");
  detail::require(n_beta >= 0.0, "N beta must be nonnegative");
  BriberVerdict out;
  if (delta == 0.0) {
    // never detected, never bribes; the plain tax-evader condition applies
    out.verdict = critical_bc_tax_evader(g_disc, g_alld, r, 0.0);
    out.verdict.condition_note =
        "delta = 0: briber is never detected and never pays; " +
        out.verdict.condition_note;
    return out;
  }
  const double briber_good = (1.0 - delta) * g_alld + delta;
  if (r > 0.0)
    out.n_beta_critical =
        1.0 / delta + (briber_good - g_disc) / (delta * r * g_disc);
  const double den =
      g_disc * (1.0 + r * (delta * n_beta - 1.0)) - briber_good;
  const double scale =
      g_disc * (1.0 + r * (delta * n_beta + 1.0)) + briber_good;
  if (!above_boundary(den, scale)) {
    out.verdict = infeasible_verdict("N beta <= (N beta)*: auditing too slow "
                                     "to deter conditional bribery");
    return out;
  }
  out.verdict = feasible_verdict(1.0 + briber_good / den, "N beta > (N beta)*");
  return out;
}

// --- private-assessment family results --------------------------------------

struct FamilyFixedPoint {
  double g_allc, g_alld, g_disc;  // f_DISC = 1 standing under private views
};

// Closed-form f_DISC = 1 fixed point of the (nu_c, nu_d, u_a) family.  The
// discriminator standing solves A G^2 + (B-1) G + C = 0; the branch kept is
// the one continuously connected to the perturbed (u_a > 0) solution, which
// is the smaller root (A >= 0 for every family member).
inline FamilyFixedPoint private_family_fixed_point(double nu_c, double nu_d,
                                                   double u_a) {
  detail::require(nu_c >= 0.0 && nu_c <= 1.0, "nu_c must lie in [0,1]");
  detail::require(nu_d >= 0.0 && nu_d <= 1.0, "nu_d must lie in [0,1]");
  detail::require(u_a >= 0.0 && u_a < 0.5, "u_a must lie in [0, 1/2)");
  const double w = 1.0 - 2.0 * u_a;
  const double A = (1.0 + nu_d - nu_c) * w;
  const double B = (nu_c - 2.0 * nu_d) * w;
  const double C = nu_d * w + u_a;
  const double disc_sq = std::max(0.0, (1.0 - B) * (1.0 - B) - 4.0 * A * C);
  const double g_disc = 2.0 * C / ((1.0 - B) + std::sqrt(disc_sq));
  FamilyFixedPoint fp;
  fp.g_disc = std::clamp(g_disc, 0.0, 1.0);
  fp.g_alld = std::clamp(nu_d * w * (1.0 - fp.g_disc) + u_a, 0.0, 1.0);
  fp.g_allc = std::clamp(fp.g_disc * w * (1.0 - nu_c) + nu_c * w + u_a, 0.0, 1.0);
  return fp;
}

inline StabilityVerdict critical_bc_private_family(double nu_c, double nu_d,
                                                   double u_a) {
  const FamilyFixedPoint fp = private_family_fixed_point(nu_c, nu_d, u_a);
  return critical_bc_plain(fp.g_disc, fp.g_alld);
}

struct MixedEquilibrium {
  PopulationComposition comp;  // f_ALLD = 0
  double cooperation_rate;     // f_ALLC + f_DISC * G
};

namespace detail {

inline double mixed_payoff_gap(const SocialNorm& norm, const GameParams& game,
                               double f_allc, const SolveOptions& opt) {
  const PopulationComposition comp(f_allc, 0.0, 1.0 - f_allc);
  const ReputationProfile prof = solve_private(norm, comp, opt);
  const PayoffVector pi = payoffs(prof, comp, game);
  return pi.pi_allc - pi.pi_disc;
}

}  // namespace detail

// DISC-ALLC coexistence under private assessment, if one exists for these
// game parameters.  At the Shunning and Simple Standing corners the known
// closed forms are used; elsewhere the equal-payoff condition
// Pi_ALLC = Pi_DISC is solved numerically.
inline std::optional<MixedEquilibrium> mixed_equilibrium(double nu_c, double nu_d,
                                                         double u_a,
                                                         const GameParams& game) {
  detail::require(nu_c >= 0.0 && nu_c <= 1.0, "nu_c must lie in [0,1]");
  detail::require(nu_d >= 0.0 && nu_d <= 1.0, "nu_d must lie in [0,1]");
  detail::require(u_a > 0.0 && u_a < 0.5, "u_a must lie in (0, 1/2)");
  const double b = game.benefit, c = game.cost;
  constexpr double kCorner = 1e-12;
  const bool nu_c_zero = std::abs(nu_c) < kCorner;

  // Stern Judging: all standings collapse to 1/2 and defectors dominate, so
  // no DISC-ALLC mixture is ever stable.
  if (nu_c_zero && std::abs(nu_d - 1.0) < kCorner) return std::nullopt;

  double f_allc = -1.0;
  const double w = 1.0 - 2.0 * u_a;
  if (nu_c_zero && std::abs(nu_d) < kCorner) {  // Shunning
    const double num = b * c - c * c - b * b * u_a * w;
    const double den = (b * c - (b * b + c * c) * u_a) * w;
    if (den != 0.0) f_allc = num / den;
  } else if (std::abs(nu_c - 1.0) < kCorner && std::abs(nu_d - 1.0) < kCorner) {
    // Simple Standing
    const double num = b * b * (1.0 - u_a) * w - 2.0 * b * c * (1.0 - u_a) + c * c;
    const double den = (b - c) * (b * (1.0 - u_a) - c * u_a) * w;
    if (den != 0.0) f_allc = num / den;
  } else {
    // general family point: root of the equal-payoff condition
    const SocialNorm norm = norm_from_family(nu_c, nu_d, u_a);
    const SolveOptions opt{1e-12, 200000, 0.5};
    double lo = 0.0, hi = 1.0 - 1e-9;
    double flo = detail::mixed_payoff_gap(norm, game, lo, opt);
    const double fhi = detail::mixed_payoff_gap(norm, game, hi, opt);
    if (!(flo > 0.0) || !(fhi < 0.0)) return std::nullopt;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = detail::mixed_payoff_gap(norm, game, mid, opt);
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    f_allc = 0.5 * (lo + hi);
  }

  if (!(f_allc >= 0.0 && f_allc <= 1.0)) return std::nullopt;
  const PopulationComposition comp(f_allc, 0.0, 1.0 - f_allc);
  const SocialNorm norm = norm_from_family(nu_c, nu_d, u_a);
  const ReputationProfile prof = solve_private(norm, comp, SolveOptions{1e-13, 200000, 0.5});
  return MixedEquilibrium{comp, f_allc + (1.0 - f_allc) * prof.average_good};
}

}  // namespace institutio
