#pragma once

// Group-structured populations: payoffs, thresholds, taxation and bribery
// when K groups hold internal consensus but may disagree across group lines,
// plus the biased-outgroup variant where a fraction lambda of the population
// is judged bad by fiat.
//
// Conventions: W = omega (K-1) weighs out-group against in-group interaction,
// and out-group payoffs carry the premium alpha, so a discriminator's payoff
// mixes in/out cooperation rates with weights 1 and alpha W over (1 + W).

#include <cmath>
#include <optional>

#include "meanfield.hpp"
#include "norms.hpp"
#include "stability.hpp"

namespace institutio {

// A solved all-discriminator group scenario.  `profile` holds the group-wise
// standings (no central institution); `institution_profile` holds the
// broadcast standings when a central institution (Q = q = 1) serves the same
// population, which is what invaders face once the institution exists.
struct GroupScenario {
  GroupStructure grp;
  SocialNorm norm;
  GameParams game;
  ReputationProfile profile;
  ReputationProfile institution_profile;
  std::optional<TaxScheme> scheme;
};

inline GroupScenario make_group_scenario(const SocialNorm& norm,
                                         const GameParams& game,
                                         const GroupStructure& grp,
                                         std::optional<TaxScheme> scheme = {},
                                         const SolveOptions& opt = {}) {
  GroupScenario scn;
  scn.grp = grp;
  scn.norm = norm;
  scn.game = game;
  scn.profile = solve_groupwise(norm, PopulationComposition::all_disc(), grp, opt);
  scn.institution_profile = solve_institutional(
      norm, PopulationComposition::all_disc(), InstitutionConfig{1, 1}, opt);
  scn.scheme = std::move(scheme);
  return scn;
}

struct GroupPayoffs {
  double pi_disc = 0.0;         // resident discriminators, group-wise views
  double pi_alld = 0.0;         // rare defector, group-wise views
  double pi_groupwise = 0.0;    // population payoff without an institution
  double pi_institution = 0.0;  // population payoff with a broadcast institution
  double pi_taxpayer = 0.0;     // (1-r) pi_institution + r pi_groupwise
};

inline GroupPayoffs group_payoffs(const GroupScenario& scn) {
  const double b = scn.game.benefit, c = scn.game.cost;
  const double W = scn.grp.coupling();
  const double aW = scn.grp.alpha * W;
  const double D = 1.0 + W;
  const PerStrategy& in = *scn.profile.in_good;
  const PerStrategy& out = *scn.profile.out_good;

  GroupPayoffs pi;
  pi.pi_disc = (b - c) * (in.disc + aW * out.disc) / D;
  pi.pi_alld = b * (in.alld + aW * out.alld) / D;
  pi.pi_groupwise = pi.pi_disc;
  pi.pi_institution = (b - c) * in.disc * (1.0 + aW) / D;
  const double r = scn.scheme ? scn.scheme->tax_rate : 0.0;
  pi.pi_taxpayer = (1.0 - r) * pi.pi_institution + r * pi.pi_groupwise;
  return pi;
}

// Minimum b/c for group-wise discriminators (no institution) to resist a
// rare defector.
inline StabilityVerdict critical_bc_group(const GroupScenario& scn) {
  const double aW = scn.grp.alpha * scn.grp.coupling();
  const PerStrategy& in = *scn.profile.in_good;
  const PerStrategy& out = *scn.profile.out_good;
  const double num = in.alld + aW * out.alld;
  const double den = (in.disc - in.alld) + aW * (out.disc - out.alld);
  if (!above_boundary(den, in.disc + in.alld + aW * (out.disc + out.alld)))
    return infeasible_verdict("in/out discrimination advantage vanished: no "
                              "finite b/c stabilizes DISC");
  return feasible_verdict(1.0 + num / den,
                          "g_DISC^in - g_ALLD^in + alpha W (g_DISC^out - "
                          "g_ALLD^out) > 0");
}

// Taxpaying discriminators (institution present, taxed at rate r on the
// group-wise surplus) versus a tax-evading defector detected with
// probability delta.  The defector faces everyone through the broadcast, so
// their standing is the institutional G_ALLD.
inline StabilityVerdict critical_bc_group_evader(const GroupScenario& scn,
                                                 double r, double delta) {
  detail::require(r >= 0.0 && r <= 1.0, "tax rate r must lie in [0,1]");
  detail::require(delta >= 0.0 && delta <= 1.0, "delta must lie in [0,1]");
  const double aW = scn.grp.alpha * scn.grp.coupling();
  const PerStrategy& in = *scn.profile.in_good;
  const PerStrategy& out = *scn.profile.out_good;
  const double g_alld = scn.institution_profile.population_good.alld;

  const double taxed = in.disc + aW * (in.disc + r * (out.disc - in.disc));
  const double evader = (1.0 - delta) * g_alld * (1.0 + aW);
  if (!above_boundary(taxed - evader, taxed + evader))
    return infeasible_verdict("taxed in/out cooperation below evader intake: "
                              "evaders invade at any b/c");
  return feasible_verdict(1.0 + evader / (taxed - evader),
                          "taxed cooperation exceeds (1-delta) G_ALLD (1 + "
                          "alpha W)");
}

// "Paranoid" briber-evader: always defects, always bribes.  The bribe is
// priced off the group-wise surplus, the only tax base this population
// concedes.
inline BriberVerdict critical_bc_group_briber(const GroupScenario& scn, double r,
                                              double n_beta) {
  detail::require(r >= 0.0 && r <= 1.0, "tax rate r must lie in [0,1]");
  detail::require(n_beta >= 0.0, "N beta must be nonnegative");
  const double aW = scn.grp.alpha * scn.grp.coupling();
  const PerStrategy& in = *scn.profile.in_good;
  const PerStrategy& out = *scn.profile.out_good;
  const double gap_in_out = in.disc - out.disc;

  BriberVerdict res;
  if (r > 0.0 && aW > 0.0 && gap_in_out > 0.0)
    res.n_beta_critical =
        1.0 + (1.0 / r) * ((1.0 - in.disc) / gap_in_out) * (1.0 + 1.0 / aW);
  const double den =
      (in.disc - 1.0) + aW * ((in.disc - 1.0) + r * gap_in_out * (n_beta - 1.0));
  const double scale = (1.0 - in.disc) * (1.0 + aW) +
                       aW * r * gap_in_out * std::abs(n_beta - 1.0);
  if (!above_boundary(den, scale)) {
    res.verdict = infeasible_verdict("N beta <= (N beta)*: bribes priced off "
                                     "the group-wise surplus are too cheap");
    return res;
  }
  res.verdict = feasible_verdict(1.0 + (1.0 + aW) / den, "N beta > (N beta)*");
  return res;
}

// Becoming more insular (lowering omega) raises a group's own fitness unless
// out-group interactions are lucrative enough: alpha > g_in / g_out.
inline bool insularity_raises_fitness(const GroupScenario& scn) {
  const double g_in = scn.profile.in_good->disc;
  const double g_out = scn.profile.out_good->disc;
  if (g_out <= 0.0) return true;
  return !(scn.grp.alpha > g_in / g_out);
}

// --- biased populations ------------------------------------------------------

// A fraction lambda of the population is designated always-bad; defecting
// against them is always judged good.  Private assessment, all-DISC ingroup.
struct BiasedScenario {
  double lambda = 0.5;
  double u_a = 0.1;
  GameParams game;
};

struct BiasedAnalysis {
  double g_disc = 0.0;           // ingroup standing under the biased norm
  StabilityVerdict critical_bc;  // resistance to a rare defector
  double max_tax = 0.0;          // institution surplus over the biased baseline
};

inline double biased_g_disc(double lambda, double ua) {
  detail::require(lambda > 0.0 && lambda < 1.0,
                  "lambda must lie strictly in (0,1)");
  detail::require(ua > 0.0 && ua < 0.5, "u_a must lie in (0, 1/2)");
  const double w = 1.0 - 2.0 * ua;
  return (3.0 + 4.0 * ua * (1.0 - lambda) - 2.0 * lambda -
          std::sqrt(1.0 + 4.0 * w * w * (1.0 - lambda) * lambda)) /
         (4.0 * w * (1.0 - lambda));
}

inline StabilityVerdict biased_critical_bc(double lambda, double ua) {
  detail::require(lambda > 0.0 && lambda < 1.0,
                  "lambda must lie strictly in (0,1)");
  detail::require(ua > 0.0 && ua < 0.5, "u_a must lie in (0, 1/2)");
  const double w = 1.0 - 2.0 * ua;
  const double m = w * w * lambda * (1.0 - lambda);
  return feasible_verdict(
      1.0 + (1.0 - 2.0 * m + std::sqrt(1.0 - 4.0 * m)) / (2.0 * m),
      "biased consensus always admits a finite b/c");
}

inline BiasedAnalysis biased_analysis(const BiasedScenario& scn) {
  const double l = scn.lambda, ua = scn.u_a;
  const double b = scn.game.benefit, c = scn.game.cost;

  BiasedAnalysis out;
  out.g_disc = biased_g_disc(l, ua);
  out.critical_bc = biased_critical_bc(l, ua);

  // The outgroup reciprocates by never cooperating, so the biased baseline
  // earns (1-lambda)(b-c) g_disc; an unbiased institution restores 1 - u_a.
  // For large enough u_a the ingroup standing expression leaves [0,1] and the
  // surplus goes negative, which max_tax reports as a domain error.
  const double pi_private = (1.0 - l) * (b - c) * out.g_disc;
  const double pi_institution = (b - c) * (1.0 - ua);
  out.max_tax = max_tax(pi_institution, pi_private);
  return out;
}

// lambda = 1/2 specialization of the biased critical ratio.
inline double biased_critical_bc_at_half(double ua) {
  const double w = 1.0 - 2.0 * ua;
  return 1.0 +
         (1.0 + 4.0 * ua * (1.0 - ua) + 4.0 * std::sqrt(ua * (1.0 - ua))) /
             (w * w);
}

}  // namespace institutio
