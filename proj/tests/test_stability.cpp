#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "institutio/stability.hpp"

using namespace institutio;
using Catch::Approx;

namespace {

ScenarioParams stern_judging_params(double ua, double b = 2.0, double c = 1.0) {
  ScenarioParams p;
  p.game = GameParams(b, c);
  p.g_disc = 1.0 - ua;
  p.g_alld = 2.0 * ua * (1.0 - ua);
  return p;
}

}  // namespace

TEST_CASE("payoffs reproduce the fitness formulas") {
  const SocialNorm sj = norm_from_family(0.0, 1.0, 0.1);
  const GameParams game(2.0, 1.0);

  SECTION("all-DISC with a broadcast institution") {
    const ReputationProfile p = solve_institutional(
        sj, PopulationComposition::all_disc(), InstitutionConfig(1, 1));
    const PayoffVector pi = payoffs(p, PopulationComposition::all_disc(), game);
    CHECK(pi.pi_disc == Approx(0.9).margin(1e-12));  // (b - c) G_DISC
    CHECK(pi.pi_alld == Approx(2.0 * 0.18).margin(1e-12));
  }

  SECTION("all-ALLD earns nothing; invader entries follow the formulas") {
    const ReputationProfile p = solve_institutional(
        sj, PopulationComposition::all_alld(), InstitutionConfig(1, 1));
    const PayoffVector pi = payoffs(p, PopulationComposition::all_alld(), game);
    CHECK(pi.pi_alld == 0.0);
    // rare cooperators would pay without being repaid
    CHECK(pi.pi_allc == Approx(-game.cost).margin(1e-12));
    CHECK(pi.pi_disc == Approx(-game.cost * p.average_good).margin(1e-12));
    const double mean = 0.0 * pi.pi_allc + 1.0 * pi.pi_alld + 0.0 * pi.pi_disc;
    CHECK(mean == 0.0);
  }

  SECTION("private Stern Judging hands defectors the advantage") {
    const ReputationProfile p =
        solve_private(sj, PopulationComposition::all_disc());
    const PayoffVector pi = payoffs(p, PopulationComposition::all_disc(), game);
    CHECK(pi.pi_disc == Approx(0.5).margin(1e-9));
    CHECK(pi.pi_alld == Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("plain critical ratio") {
  const StabilityVerdict v = critical_bc_plain(0.9, 0.18);
  REQUIRE(v.feasible);
  CHECK(v.critical_bc.value() == 1.25);

  const StabilityVerdict collapsed = critical_bc_plain(0.5, 0.5);
  CHECK_FALSE(collapsed.feasible);
  CHECK_FALSE(collapsed.critical_bc.is_finite());
  CHECK_THROWS_AS(collapsed.critical_bc.value(), std::logic_error);

  const StabilityVerdict boundary = critical_bc_plain(1.0, 0.0);
  REQUIRE(boundary.feasible);
  CHECK(boundary.critical_bc.value() == 1.0);
  CHECK_THAT(boundary.condition_note,
             Catch::Matchers::ContainsSubstring("boundary"));
}

TEST_CASE("plain ratio matches the closed identity across u_a") {
  for (double ua = 0.005; ua <= 0.45 + 1e-12; ua += 0.005) {
    const SocialNorm sj = norm_from_family(0.0, 1.0, ua);
    const ReputationProfile p = solve_institutional(
        sj, PopulationComposition::all_disc(), InstitutionConfig(1, 1), {1e-13, 400000, 0.5});
    const StabilityVerdict v =
        critical_bc_plain(p.population_good.disc, p.population_good.alld);
    REQUIRE(v.feasible);
    CHECK(v.critical_bc.value() ==
          Approx(1.0 + 2.0 * ua / (1.0 - 2.0 * ua)).margin(1e-12));
  }
}

TEST_CASE("maximum rational tax") {
  CHECK(max_tax(0.9, 0.0) == Approx(0.9));
  CHECK(max_tax(0.7, 0.7) == 0.0);
  CHECK_THROWS_AS(max_tax(0.5, 0.7), std::invalid_argument);
  CHECK_THROWS_AS(max_tax(0.5, -0.1), std::invalid_argument);
}

TEST_CASE("salary and bribe arithmetic") {
  TaxScheme scheme(0.5, 0.0, 0.0, 100);
  const SalaryBribe sb = salary_and_bribe(scheme, InstitutionConfig(1, 1), 0.9);
  CHECK(sb.salary == Approx(45.0));
  CHECK(sb.min_bribe == 0.0);  // no audits, any bribe accepted

  TaxScheme audited(0.5, 0.0, 0.02, 100);
  const SalaryBribe sb2 = salary_and_bribe(audited, InstitutionConfig(1, 1), 0.9);
  CHECK(sb2.min_bribe == Approx(0.9));

  const TaxScheme filled = with_derived(audited, InstitutionConfig(1, 1), 0.9);
  REQUIRE(filled.derived.has_value());
  CHECK(filled.derived->salary == Approx(45.0));
  CHECK(filled.derived->min_bribe == Approx(filled.beta * filled.derived->salary));
}

TEST_CASE("tax scheme validation") {
  CHECK_THROWS_AS(TaxScheme(1.5, 0.0, 0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(TaxScheme(0.5, -0.1, 0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(TaxScheme(0.5, 0.0, 0.0, 0), std::invalid_argument);
  CHECK(TaxScheme(0.5, 0.1, 0.02, 100).n_beta() == Approx(2.0));
}

TEST_CASE("tax-evader critical ratio") {
  const StabilityVerdict v = critical_bc_tax_evader(0.9, 0.18, 0.2, 0.5);
  REQUIRE(v.feasible);
  CHECK(v.critical_bc.value() == Approx(8.0 / 7.0).margin(1e-12));

  // r = delta = 0 collapses to the plain condition
  const StabilityVerdict plain = critical_bc_tax_evader(0.9, 0.18, 0.0, 0.0);
  CHECK(plain.critical_bc.value() == critical_bc_plain(0.9, 0.18).critical_bc.value());

  // tax too steep, no detection: evaders invade at any b/c
  const StabilityVerdict inf = critical_bc_tax_evader(0.9, 0.18, 0.85, 0.0);
  CHECK_FALSE(inf.feasible);
}

TEST_CASE("discriminator evaders are held off when audits beat the tax") {
  CHECK(discriminator_evader_resists(0.2, 0.5));
  CHECK_FALSE(discriminator_evader_resists(0.5, 0.5));  // strict inequality
  CHECK_FALSE(discriminator_evader_resists(0.9, 0.1));
}

TEST_CASE("delta > r dominates the evading-discriminator payoff") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int checked = 0;
  while (checked < 200) {
    const double c = 0.2 + unif(gen);
    const double b = c * (1.01 + 3.0 * unif(gen));
    const double ua = 0.02 + 0.45 * unif(gen);
    const double r = unif(gen), delta = unif(gen);
    if (!(delta > r)) continue;
    const double g_disc = 1.0 - ua;  // any standing works; scale cancels
    const double evader = b * (1.0 - delta) * g_disc - c * g_disc;
    const double taxpayer = (1.0 - r) * (b - c) * g_disc;
    CHECK(evader < taxpayer);
    ++checked;
  }
}

TEST_CASE("unconditional briber critical ratio") {
  const BriberVerdict v = critical_bc_unconditional_briber(0.9, 0.5, 2.0);
  CHECK(v.n_beta_critical == Approx(1.0 + 0.1 / 0.45).margin(1e-12));
  REQUIRE(v.verdict.feasible);
  CHECK(v.verdict.critical_bc.value() == Approx(27.0 / 7.0).margin(1e-12));

  // exactly at the audit threshold: still infeasible
  const BriberVerdict at = critical_bc_unconditional_briber(0.9, 0.5, v.n_beta_critical);
  CHECK_FALSE(at.verdict.feasible);

  // perfect broadcast standing
  const BriberVerdict gd1 = critical_bc_unconditional_briber(1.0, 0.3, 2.0);
  CHECK(gd1.verdict.critical_bc.value() ==
        Approx(1.0 + 1.0 / ((2.0 - 1.0) * 0.3)).margin(1e-12));

  // zero tax: bribery costs nothing
  const BriberVerdict free = critical_bc_unconditional_briber(0.9, 0.0, 50.0);
  CHECK_FALSE(free.verdict.feasible);
  CHECK_THAT(free.verdict.condition_note,
             Catch::Matchers::ContainsSubstring("r = 0"));
}

TEST_CASE("conditional briber critical ratio") {
  const BriberVerdict v = critical_bc_conditional_briber(0.9, 0.18, 0.5, 0.5, 4.0);
  CHECK(v.n_beta_critical == Approx(28.0 / 45.0).margin(1e-12));
  REQUIRE(v.verdict.feasible);
  CHECK(v.verdict.critical_bc.value() == Approx(1.0 + 0.59 / 0.76).margin(1e-12));

  // always-detected conditional briber is an unconditional briber with G' = 1
  const BriberVerdict cond = critical_bc_conditional_briber(0.9, 0.18, 0.4, 1.0, 3.0);
  const BriberVerdict uncond = critical_bc_unconditional_briber(0.9, 0.4, 3.0);
  CHECK(cond.verdict.critical_bc.value() ==
        Approx(uncond.verdict.critical_bc.value()).margin(1e-12));

  // never-detected conditional briber faces the plain evader condition
  const BriberVerdict never = critical_bc_conditional_briber(0.9, 0.18, 0.3, 0.0, 3.0);
  const StabilityVerdict evader = critical_bc_tax_evader(0.9, 0.18, 0.3, 0.0);
  CHECK(never.verdict.critical_bc.value() ==
        Approx(evader.critical_bc.value()).margin(1e-12));
  CHECK_THAT(never.verdict.condition_note,
             Catch::Matchers::ContainsSubstring("delta = 0"));

  // boundary N beta excluded
  const BriberVerdict at =
      critical_bc_conditional_briber(0.9, 0.18, 0.5, 0.5, 28.0 / 45.0);
  CHECK_FALSE(at.verdict.feasible);
}

TEST_CASE("payoff-gap partials, spot values") {
  ScenarioParams p = stern_judging_params(0.1);
  p.tax_rate = 0.3;
  p.delta = 0.5;
  p.n_beta = 2.0;

  const GapPartials te = payoff_gap_partials(InvaderScenario::TaxEvader, p);
  CHECK(te.d_tax_rate == Approx(-0.9).margin(1e-12));
  CHECK(te.d_delta == Approx(2.0 * p.g_alld).margin(1e-12));
  CHECK_FALSE(te.d_n_beta.has_value());

  const GapPartials ub = payoff_gap_partials(InvaderScenario::UnconditionalBriber, p);
  CHECK(ub.d_delta == 0.0);
  CHECK(ub.d_tax_rate == Approx(0.9 * (2.0 - 1.0)).margin(1e-12));

  p.n_beta = 2.0;
  p.delta = 0.5;  // delta * n_beta = 1: the tax rate drops out
  const GapPartials cb = payoff_gap_partials(InvaderScenario::ConditionalBriber, p);
  CHECK(cb.d_tax_rate == Approx(0.0).margin(1e-12));
}

TEST_CASE("partials match central finite differences of the direct gap") {
  std::mt19937_64 gen(47);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double h = 1e-6;
  for (InvaderScenario sc : {InvaderScenario::TaxEvader,
                             InvaderScenario::UnconditionalBriber,
                             InvaderScenario::ConditionalBriber}) {
    for (int trial = 0; trial < 100; ++trial) {
      ScenarioParams p;
      const double c = 0.5 + unif(gen);
      p.game = GameParams(c * (1.1 + 3.0 * unif(gen)), c);
      p.g_disc = 0.3 + 0.69 * unif(gen);
      p.g_alld = 0.01 + 0.9 * unif(gen) * p.g_disc;
      p.tax_rate = 0.05 + 0.85 * unif(gen);
      p.delta = 0.05 + 0.9 * unif(gen);
      p.n_beta = 0.2 + 5.0 * unif(gen);
      const GapPartials got = payoff_gap_partials(sc, p);

      auto fd = [&](double ScenarioParams::*field) {
        ScenarioParams hi = p, lo = p;
        hi.*field += h;
        lo.*field -= h;
        return (payoff_gap(sc, hi) - payoff_gap(sc, lo)) / (2.0 * h);
      };
      auto close = [&](double a, double b) {
        return std::abs(a - b) <= 1e-6 * std::max({1.0, std::abs(a), std::abs(b)});
      };
      CHECK(close(got.d_tax_rate, fd(&ScenarioParams::tax_rate)));
      CHECK(close(got.d_delta, fd(&ScenarioParams::delta)));
      if (got.d_n_beta) CHECK(close(*got.d_n_beta, fd(&ScenarioParams::n_beta)));
    }
  }
}

TEST_CASE("payoff gap flips sign across each finite threshold") {
  std::mt19937_64 gen(53);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int done = 0;
  while (done < 60) {
    const double ua = 0.02 + 0.3 * unif(gen);
    ScenarioParams p = stern_judging_params(ua);
    p.tax_rate = 0.05 + 0.9 * unif(gen);
    p.delta = 0.05 + 0.9 * unif(gen);
    p.n_beta = 0.3 + 6.0 * unif(gen);

    struct Case {
      InvaderScenario sc;
      StabilityVerdict v;
    };
    const Case cases[3] = {
        {InvaderScenario::TaxEvader,
         critical_bc_tax_evader(p.g_disc, p.g_alld, p.tax_rate, p.delta)},
        {InvaderScenario::UnconditionalBriber,
         critical_bc_unconditional_briber(p.g_disc, p.tax_rate, p.n_beta).verdict},
        {InvaderScenario::ConditionalBriber,
         critical_bc_conditional_briber(p.g_disc, p.g_alld, p.tax_rate, p.delta,
                                        p.n_beta)
             .verdict},
    };
    for (const Case& cs : cases) {
      if (!cs.v.feasible) continue;
      const double rho = cs.v.critical_bc.value();
      ScenarioParams above = p;
      above.game = GameParams(rho * (1.0 + 1e-4), 1.0);
      ScenarioParams below = p;
      below.game = GameParams(rho * (1.0 - 1e-4), 1.0);
      if (below.game.benefit <= 1.0) continue;
      CHECK(payoff_gap(cs.sc, above) > 0.0);
      CHECK(payoff_gap(cs.sc, below) < 0.0);
      ++done;
    }
  }
}

TEST_CASE("family critical ratio agrees with the corner closed forms") {
  for (double ua = 0.01; ua < 0.5; ua += 0.01) {
    const double shun = 2.0 / (1.0 - std::sqrt(1.0 - 4.0 * ua + 8.0 * ua * ua));
    CHECK(critical_bc_private_family(0.0, 0.0, ua).critical_bc.value() ==
          Approx(shun).margin(1e-12 * shun));
    const double ss = (1.0 + std::sqrt(ua / (1.0 - ua))) / (1.0 - 2.0 * ua);
    CHECK(critical_bc_private_family(1.0, 1.0, ua).critical_bc.value() ==
          Approx(ss).margin(1e-12 * ss));
    CHECK_FALSE(critical_bc_private_family(0.0, 1.0, ua).feasible);
    // Scoring: private equals single-assessor public, standing 1/2
    const FamilyFixedPoint sc = private_family_fixed_point(1.0, 0.0, ua);
    CHECK(sc.g_disc == Approx(0.5).margin(1e-12));
  }
  CHECK(critical_bc_private_family(0.0, 0.0, 0.1).critical_bc.value() ==
        Approx(11.404).margin(1e-3));
  CHECK(critical_bc_private_family(1.0, 1.0, 0.1).critical_bc.value() ==
        Approx(5.0 / 3.0).margin(1e-12));
}

TEST_CASE("family fixed point matches the private solver") {
  std::mt19937_64 gen(61);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double nu_c = unif(gen), nu_d = unif(gen);
    const double ua = 0.05 + 0.4 * unif(gen);
    const FamilyFixedPoint fp = private_family_fixed_point(nu_c, nu_d, ua);
    const ReputationProfile p =
        solve_private(norm_from_family(nu_c, nu_d, ua),
                      PopulationComposition::all_disc(), {1e-13, 400000, 0.5});
    CHECK(p.population_good.disc == Approx(fp.g_disc).margin(1e-10));
    CHECK(p.population_good.alld == Approx(fp.g_alld).margin(1e-10));
    CHECK(p.population_good.allc == Approx(fp.g_allc).margin(1e-10));
  }
}

TEST_CASE("family ratio diverges in the zero-error limit at Shunning") {
  CHECK_FALSE(critical_bc_private_family(0.0, 0.0, 0.0).feasible);
  // approaching from above the ratio grows without bound
  double prev = 0.0;
  for (double ua : {0.05, 0.01, 0.002, 0.0005}) {
    const double v = critical_bc_private_family(0.0, 0.0, ua).critical_bc.value();
    CHECK(v > prev);
    prev = v;
  }
  CHECK(prev > 1000.0);
}

TEST_CASE("mixed equilibrium: Stern Judging never mixes") {
  CHECK_FALSE(mixed_equilibrium(0.0, 1.0, 0.1, GameParams(20.0, 1.0)).has_value());
  CHECK_FALSE(mixed_equilibrium(0.0, 1.0, 0.3, GameParams(3.0, 1.0)).has_value());
}

TEST_CASE("mixed equilibrium: Shunning closed form and equal payoffs") {
  const GameParams game(20.0, 1.0);
  const auto eq = mixed_equilibrium(0.0, 0.0, 0.1, game);
  REQUIRE(eq.has_value());
  CHECK(eq->comp.f_allc == Approx(0.808457711443).margin(1e-9));
  CHECK(eq->comp.f_alld == 0.0);

  const SocialNorm sh = norm_from_family(0.0, 0.0, 0.1);
  const ReputationProfile p = solve_private(sh, eq->comp, {1e-13, 400000, 0.5});
  const PayoffVector pi = payoffs(p, eq->comp, game);
  CHECK(pi.pi_allc == Approx(pi.pi_disc).margin(1e-8));
  // the standing average at the mixture has its own closed form
  CHECK(p.average_good == Approx((1.0 - 20.0 * 0.1) / (1.0 - 40.0 * 0.1)).margin(1e-9));
  CHECK(eq->cooperation_rate ==
        Approx(eq->comp.f_allc + eq->comp.f_disc * p.average_good).margin(1e-12));
}

TEST_CASE("mixed equilibrium: Simple Standing appears exactly at the cutoff") {
  const double ua = 0.1;
  const double cutoff = (1.0 + std::sqrt(ua / (1.0 - ua))) / (1.0 - 2.0 * ua);
  CHECK(cutoff == Approx(5.0 / 3.0).margin(1e-12));

  // closed-form numerator vanishes at the cutoff
  const double b = cutoff, c = 1.0;
  const double num =
      b * b * (1.0 - ua) * (1.0 - 2.0 * ua) - 2.0 * b * c * (1.0 - ua) + c * c;
  CHECK(num == Approx(0.0).margin(1e-12));

  const auto at = mixed_equilibrium(1.0, 1.0, ua, GameParams(cutoff, 1.0));
  if (at.has_value()) CHECK(at->comp.f_allc == Approx(0.0).margin(1e-10));

  // just above the cutoff a genuine mixture exists and balances payoffs
  const GameParams above(2.0, 1.0);
  const auto eq = mixed_equilibrium(1.0, 1.0, ua, above);
  REQUIRE(eq.has_value());
  const SocialNorm ss = norm_from_family(1.0, 1.0, ua);
  const ReputationProfile p = solve_private(ss, eq->comp, {1e-13, 400000, 0.5});
  const PayoffVector pi = payoffs(p, eq->comp, above);
  CHECK(pi.pi_allc == Approx(pi.pi_disc).margin(1e-8));
  CHECK(p.average_good ==
        Approx(1.0 - above.benefit * ua / (above.benefit - above.cost)).margin(1e-9));
}

TEST_CASE("mixed equilibrium: generic family point balances payoffs") {
  const double nu_c = 0.6, nu_d = 0.4, ua = 0.1;
  const StabilityVerdict cutoff = critical_bc_private_family(nu_c, nu_d, ua);
  REQUIRE(cutoff.feasible);
  const GameParams game(cutoff.critical_bc.value() * 1.5, 1.0);
  const auto eq = mixed_equilibrium(nu_c, nu_d, ua, game);
  REQUIRE(eq.has_value());
  const ReputationProfile p = solve_private(norm_from_family(nu_c, nu_d, ua),
                                            eq->comp, {1e-13, 400000, 0.5});
  const PayoffVector pi = payoffs(p, eq->comp, game);
  CHECK(pi.pi_allc == Approx(pi.pi_disc).margin(1e-8));
}
