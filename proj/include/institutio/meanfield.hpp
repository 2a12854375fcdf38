#pragma once

// Self-consistent reputation equations in the large-population limit.
//
// Three assessment modes are solved here:
//
//  * private:        every observer holds an independent opinion; the coupled
//                    system for (G_ALLC, G_ALLD, G_DISC) closes through the
//                    population averages G = sum_s f_s G_s and
//                    gamma = sum_s f_s G_s^2 (observer/donor agreement).
//  * institutional:  Q assessors judge against the public broadcast; a player
//                    is broadcast good iff at least q of them say good, so
//                    G_s is a binomial tail of the single-assessor g_s.
//  * group-wise:     K groups with internal consensus; in-group and out-group
//                    standings (G_s^in, G_s^out) couple through the mixed
//                    averages of a donor's possible recipients.
//
// Solver: damped fixed-point iteration x <- (1-theta) x + theta F(x) with
// theta = 0.5, falling back to bisection on the scalar aggregate G when the
// iteration fails to settle.  Roots are selected on the branch continuously
// connected to the u_a = 0.05 solution (homotopy in u_a) when u_a is small.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "norms.hpp"

namespace institutio {

// Per-strategy scalar triple, indexable by Strategy.
struct PerStrategy {
  double allc = 0.0;
  double alld = 0.0;
  double disc = 0.0;

  double& operator[](Strategy s) {
    switch (s) {
      case Strategy::AllC: return allc;
      case Strategy::AllD: return alld;
      default: return disc;
    }
  }
  double operator[](Strategy s) const {
    switch (s) {
      case Strategy::AllC: return allc;
      case Strategy::AllD: return alld;
      default: return disc;
    }
  }
};

struct PopulationComposition {
  double f_allc = 0.0;
  double f_alld = 0.0;
  double f_disc = 0.0;

  PopulationComposition() = default;
  PopulationComposition(double fa, double fy, double fz)
      : f_allc(fa), f_alld(fy), f_disc(fz) {
    detail::require(fa >= 0.0 && fa <= 1.0, "f_allc must lie in [0,1]");
    detail::require(fy >= 0.0 && fy <= 1.0, "f_alld must lie in [0,1]");
    detail::require(fz >= 0.0 && fz <= 1.0, "f_disc must lie in [0,1]");
    detail::require(std::abs(fa + fy + fz - 1.0) <= 1e-12,
                    "strategy frequencies must sum to 1");
  }

  double frequency(Strategy s) const {
    switch (s) {
      case Strategy::AllC: return f_allc;
      case Strategy::AllD: return f_alld;
      default: return f_disc;
    }
  }

  static PopulationComposition all_disc() { return {0.0, 0.0, 1.0}; }
  static PopulationComposition all_alld() { return {0.0, 1.0, 0.0}; }
  static PopulationComposition all_allc() { return {1.0, 0.0, 0.0}; }
};

struct InstitutionConfig {
  int q_members = 1;    // Q
  int q_threshold = 1;  // q, goods needed for a good broadcast

  InstitutionConfig() = default;
  InstitutionConfig(int q_mem, int q_thr) : q_members(q_mem), q_threshold(q_thr) {
    detail::require(q_mem >= 1, "q_members must be a positive integer");
    detail::require(q_thr >= 1 && q_thr <= q_mem,
                    "q_threshold must satisfy 1 <= q <= Q");
  }
};

struct GroupStructure {
  int k_groups = 1;
  double omega = 0.0;  // out-group interaction probability
  double alpha = 1.0;  // out-group payoff premium

  GroupStructure() = default;
  GroupStructure(int k, double w, double a) : k_groups(k), omega(w), alpha(a) {
    detail::require(k >= 1, "k_groups must be >= 1");
    detail::require(w >= 0.0 && w <= 1.0, "omega must lie in [0,1]");
    detail::require(a >= 1.0, "alpha must be >= 1");
  }

  // omega (K-1): the weight of out-group interactions relative to in-group.
  double coupling() const { return omega * (k_groups - 1); }
};

struct ReputationProfile {
  PerStrategy population_good;            // G_s (broadcast / population level)
  PerStrategy assessor_good;              // g_s (single assessor)
  std::optional<PerStrategy> in_good;     // G_s^in, group-wise only
  std::optional<PerStrategy> out_good;    // G_s^out, group-wise only
  double average_good = 0.0;              // G = sum_s f_s G_s
  double agreement = 0.0;                 // gamma = sum_s f_s G_s^2
  double residual = 0.0;                  // inf-norm fixed-point defect
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 100000;
  double damping = 0.5;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, ReputationProfile last, double res)
      : std::runtime_error(what + " (residual " + std::to_string(res) + ")"),
        last_iterate(std::move(last)),
        residual(res) {}

  ReputationProfile last_iterate;
  double residual;
};

// P(at least q of Q independent trials succeed), success probability g.
inline double binomial_tail(double g, int q_members, int q_threshold) {
  detail::require(g >= 0.0 && g <= 1.0, "g must lie in [0,1]");
  detail::require(q_members >= 1 && q_threshold >= 1 && q_threshold <= q_members,
                  "need 1 <= q <= Q");
  const int Q = q_members;
  std::vector<double> pow_g(Q + 1, 1.0), pow_h(Q + 1, 1.0);
  for (int k = 1; k <= Q; ++k) pow_g[k] = pow_g[k - 1] * g;
  for (int k = 1; k <= Q; ++k) pow_h[k] = pow_h[k - 1] * (1.0 - g);
  double sum = 0.0, comp = 0.0;  // Kahan accumulation
  double coeff = 1.0;            // C(Q, k), built multiplicatively
  for (int k = 1; k <= Q; ++k) {
    coeff *= static_cast<double>(Q - k + 1) / static_cast<double>(k);
    if (k < q_threshold) continue;
    const double term = coeff * pow_g[k] * pow_h[Q - k];
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return std::clamp(sum, 0.0, 1.0);
}

namespace detail {

struct PrivateCoeffs {
  double c_allc, c_alld, k_gamma, k_avg, p_bc, p_bd;
};

inline PrivateCoeffs private_coeffs(const SocialNorm& n) {
  return {n.p_gc - n.p_bc,
          n.p_gd - n.p_bd,
          n.p_gc - n.p_gd - n.p_bc + n.p_bd,
          n.p_gd + n.p_bc - 2.0 * n.p_bd,
          n.p_bc,
          n.p_bd};
}

inline PerStrategy private_map(const PrivateCoeffs& k, const PopulationComposition& f,
                               const PerStrategy& x) {
  const double G = f.f_allc * x.allc + f.f_alld * x.alld + f.f_disc * x.disc;
  const double gamma = f.f_allc * x.allc * x.allc + f.f_alld * x.alld * x.alld +
                       f.f_disc * x.disc * x.disc;
  PerStrategy y;
  y.allc = G * k.c_allc + k.p_bc;
  y.alld = G * k.c_alld + k.p_bd;
  y.disc = gamma * k.k_gamma + G * k.k_avg + k.p_bd;
  return y;
}

inline double max_defect(const PerStrategy& a, const PerStrategy& b) {
  return std::max({std::abs(a.allc - b.allc), std::abs(a.alld - b.alld),
                   std::abs(a.disc - b.disc)});
}

inline ReputationProfile profile_from(const PopulationComposition& f,
                                      const PerStrategy& g_s,
                                      const PerStrategy& G_s, double residual) {
  ReputationProfile p;
  p.assessor_good = g_s;
  p.population_good = G_s;
  p.average_good = f.f_allc * G_s.allc + f.f_alld * G_s.alld + f.f_disc * G_s.disc;
  p.agreement = f.f_allc * G_s.allc * G_s.allc + f.f_alld * G_s.alld * G_s.alld +
                f.f_disc * G_s.disc * G_s.disc;
  p.residual = residual;
  return p;
}

// Given the aggregate G, reconstruct the component reputations.  G_DISC solves
// a quadratic through gamma; we keep the branch that the damped iteration is
// attracted to (the smaller root when the leading coefficient is positive).
inline PerStrategy private_components_at(const PrivateCoeffs& k,
                                         const PopulationComposition& f, double G) {
  PerStrategy x;
  x.allc = std::clamp(G * k.c_allc + k.p_bc, 0.0, 1.0);
  x.alld = std::clamp(G * k.c_alld + k.p_bd, 0.0, 1.0);
  const double a = k.k_gamma * f.f_disc;
  const double c0 = k.k_gamma * (f.f_allc * x.allc * x.allc +
                                 f.f_alld * x.alld * x.alld) +
                    k.k_avg * G + k.p_bd;
  if (std::abs(a) < 1e-14) {
    x.disc = std::clamp(c0, 0.0, 1.0);
    return x;
  }
  // roots of a z^2 - z + c0 = 0; stable small-root form for a > 0
  const double disc_sq = 1.0 - 4.0 * a * c0;
  if (disc_sq < 0.0) {  // no real crossing; saturate at the vertex
    x.disc = std::clamp(1.0 / (2.0 * a), 0.0, 1.0);
    return x;
  }
  const double sq = std::sqrt(disc_sq);
  const double small_root = 2.0 * c0 / (1.0 + sq);
  const double other_root = (1.0 + sq) / (2.0 * a);
  double z = small_root;
  if (a > 0.0) {
    if (z < -1e-9 || z > 1.0 + 1e-9) z = other_root;
  } else {
    if (other_root >= -1e-9 && other_root <= 1.0 + 1e-9) z = other_root;
  }
  x.disc = std::clamp(z, 0.0, 1.0);
  return x;
}

inline ReputationProfile solve_private_impl(const SocialNorm& norm,
                                            const PopulationComposition& comp,
                                            const SolveOptions& opt,
                                            const PerStrategy& start) {
  const PrivateCoeffs k = private_coeffs(norm);
  PerStrategy x = start;
  double defect = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iter; ++it) {
    const PerStrategy y = private_map(k, comp, x);
    defect = max_defect(x, y);
    if (defect <= opt.tol) {
      // undamped polish: keep stepping while the defect shrinks
      x = y;
      for (int p = 0; p < 100 && defect > 0.0; ++p) {
        const PerStrategy z = private_map(k, comp, x);
        const double d = max_defect(x, z);
        if (d >= defect) break;
        defect = d;
        x = z;
      }
      return profile_from(comp, x, x, defect);
    }
    x.allc = (1.0 - opt.damping) * x.allc + opt.damping * y.allc;
    x.alld = (1.0 - opt.damping) * x.alld + opt.damping * y.alld;
    x.disc = (1.0 - opt.damping) * x.disc + opt.damping * y.disc;
  }

  // Fall back to bisection on the scalar aggregate.
  auto aggregate_defect = [&](double G) {
    const PerStrategy c = private_components_at(k, comp, G);
    return comp.f_allc * c.allc + comp.f_alld * c.alld + comp.f_disc * c.disc - G;
  };
  double lo = 0.0, hi = 1.0;
  double flo = aggregate_defect(lo);
  if (std::abs(flo) < 1e-15) {
    const PerStrategy c = private_components_at(k, comp, lo);
    return profile_from(comp, c, c, std::abs(flo));
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = aggregate_defect(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  const double G = 0.5 * (lo + hi);
  const PerStrategy c = private_components_at(k, comp, G);
  const PerStrategy y = private_map(k, comp, c);
  const double res = max_defect(c, y);
  auto p = profile_from(comp, c, c, res);
  if (res > std::max(opt.tol, 1e-12))
    throw ConvergenceError("private reputation solve did not converge", p, res);
  return p;
}

}  // namespace detail

inline ReputationProfile solve_private(const SocialNorm& norm,
                                       const PopulationComposition& comp,
                                       const SolveOptions& opt = {}) {
  detail::require(opt.tol > 0.0, "tol must be positive");
  detail::require(opt.max_iter > 0, "max_iter must be positive");
  PerStrategy start{0.5, 0.5, 0.5};
  // For small u_a, continue the u_a = 0.05 branch downward so that root
  // selection stays on the perturbed solution.
  if (norm.nu_c && norm.nu_d && norm.assessment_error < 0.05) {
    constexpr int kSteps = 8;
    for (int i = 0; i <= kSteps; ++i) {
      const double t = static_cast<double>(i) / kSteps;
      const double ua = 0.05 + t * (norm.assessment_error - 0.05);
      const SocialNorm step = norm_from_family(*norm.nu_c, *norm.nu_d, ua, true);
      const ReputationProfile p = detail::solve_private_impl(step, comp, opt, start);
      start = p.population_good;
      if (i == kSteps) return p;
    }
  }
  return detail::solve_private_impl(norm, comp, opt, start);
}

inline ReputationProfile solve_institutional(const SocialNorm& norm,
                                             const PopulationComposition& comp,
                                             const InstitutionConfig& inst,
                                             const SolveOptions& opt = {}) {
  detail::require(opt.tol > 0.0, "tol must be positive");
  detail::require(opt.max_iter > 0, "max_iter must be positive");
  const int Q = inst.q_members, q = inst.q_threshold;

  auto assessor_at = [&](double G) {
    PerStrategy g;
    g.allc = std::clamp(G * (norm.p_gc - norm.p_bc) + norm.p_bc, 0.0, 1.0);
    g.alld = std::clamp(G * (norm.p_gd - norm.p_bd) + norm.p_bd, 0.0, 1.0);
    g.disc = std::clamp(G * (norm.p_gc - norm.p_bd) + norm.p_bd, 0.0, 1.0);
    return g;
  };
  auto broadcast_at = [&](const PerStrategy& g) {
    PerStrategy G_s;
    for (Strategy s : kAllStrategies) G_s[s] = binomial_tail(g[s], Q, q);
    return G_s;
  };
  auto aggregate = [&](const PerStrategy& G_s) {
    return comp.f_allc * G_s.allc + comp.f_alld * G_s.alld + comp.f_disc * G_s.disc;
  };
  auto map = [&](double x) { return aggregate(broadcast_at(assessor_at(x))); };

  auto iterate_from = [&](double G, double& defect) {
    for (int it = 0; it < opt.max_iter; ++it) {
      const double next = map(G);
      defect = std::abs(next - G);
      if (defect <= opt.tol) {
        G = next;
        for (int p = 0; p < 100 && defect > 0.0; ++p) {
          const double z = map(G);
          const double d = std::abs(z - G);
          if (d >= defect) break;
          defect = d;
          G = z;
        }
        return std::optional<double>(G);
      }
      G = (1.0 - opt.damping) * G + opt.damping * next;
    }
    return std::optional<double>();
  };

  double defect = std::numeric_limits<double>::infinity();
  std::optional<double> fixed = iterate_from(0.5, defect);
  if (fixed) {
    // Aggregation can make the map bistable; starting at 1/2 may then park on
    // the repelling middle root.  Restart from the high-reputation side,
    // which is the branch a population with an initially good broadcast
    // relaxes to.
    const double h = 1e-7;
    const double slope = (map(*fixed + h) - map(*fixed - h)) / (2.0 * h);
    if (std::abs(slope) > 1.0 + 1e-9) fixed = iterate_from(1.0 - 1e-6, defect);
  }
  double G;
  if (fixed) {
    G = *fixed;
  } else {
    // bisection on the aggregate; a crossing exists on [0,1]
    auto defect_at = [&](double x) { return map(x) - x; };
    double lo = 0.0, hi = 1.0, flo = defect_at(lo);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = defect_at(mid);
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    G = 0.5 * (lo + hi);
    defect = std::abs(defect_at(G));
  }

  const PerStrategy g = assessor_at(G);
  const PerStrategy G_s = broadcast_at(g);
  ReputationProfile p = detail::profile_from(comp, g, G_s, defect);
  if (p.residual > std::max(opt.tol, 1e-12))
    throw ConvergenceError("institutional reputation solve did not converge", p,
                           p.residual);
  return p;
}

// Group-wise assessment.  Only equal per-group strategy frequencies are
// supported; the composition applies uniformly to every group.
inline ReputationProfile solve_groupwise(const SocialNorm& norm,
                                         const PopulationComposition& comp,
                                         const GroupStructure& grp,
                                         const SolveOptions& opt = {}) {
  detail::require(opt.tol > 0.0, "tol must be positive");
  detail::require(grp.k_groups >= 1, "k_groups must be >= 1");
  const double w = grp.omega;
  const double K = grp.k_groups;
  const double W = grp.coupling();  // omega (K-1)
  const double D = 1.0 + W;
  const double k_gamma = norm.p_gc - norm.p_gd - norm.p_bc + norm.p_bd;

  // state: in/out standing per strategy
  PerStrategy in{0.5, 0.5, 0.5}, out{0.5, 0.5, 0.5};

  auto step = [&](const PerStrategy& xin, const PerStrategy& xout,
                  PerStrategy& yin, PerStrategy& yout) {
    const double Gin = comp.f_allc * xin.allc + comp.f_alld * xin.alld +
                       comp.f_disc * xin.disc;
    const double Gout = comp.f_allc * xout.allc + comp.f_alld * xout.alld +
                        comp.f_disc * xout.disc;
    // view of a random recipient of the donor, by an in-group observer
    const double gbar = (Gin + W * Gout) / D;
    // ... and by an out-group observer
    const double m = (w * Gin + (1.0 + w * (K - 2.0)) * Gout) / D;

    yin.allc = gbar * (norm.p_gc - norm.p_bc) + norm.p_bc;
    yin.alld = gbar * (norm.p_gd - norm.p_bd) + norm.p_bd;
    yin.disc = gbar * (norm.p_gc - norm.p_bd) + norm.p_bd;
    yout.allc = m * (norm.p_gc - norm.p_bc) + norm.p_bc;
    yout.alld = m * (norm.p_gd - norm.p_bd) + norm.p_bd;

    // DISC out-group standing mixes the observer's and donor's views of the
    // recipient, recipient drawn per strategy.
    double z = norm.p_bd;
    for (Strategy s : kAllStrategies) {
      const double fs = comp.frequency(s);
      if (fs == 0.0) continue;
      const double gi = xin[s], go = xout[s];
      const double cross = ((1.0 + w) * gi * go + w * (K - 2.0) * go * go) / D;
      const double ms = (w * gi + (1.0 + w * (K - 2.0)) * go) / D;
      const double gbars = (gi + W * go) / D;
      z += fs * (cross * k_gamma + ms * (norm.p_gd - norm.p_bd) +
                 gbars * (norm.p_bc - norm.p_bd));
    }
    yout.disc = z;
  };

  double defect = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iter; ++it) {
    PerStrategy yin, yout;
    step(in, out, yin, yout);
    if (grp.k_groups == 1) yout = yin;  // no out-group exists
    defect = std::max(detail::max_defect(in, yin), detail::max_defect(out, yout));
    if (defect <= opt.tol) {
      in = yin;
      out = yout;
      for (int p = 0; p < 100 && defect > 0.0; ++p) {
        PerStrategy zin, zout;
        step(in, out, zin, zout);
        if (grp.k_groups == 1) zout = zin;
        const double d =
            std::max(detail::max_defect(in, zin), detail::max_defect(out, zout));
        if (d >= defect) break;
        defect = d;
        in = zin;
        out = zout;
      }
      break;
    }
    for (Strategy s : kAllStrategies) {
      in[s] = (1.0 - opt.damping) * in[s] + opt.damping * yin[s];
      out[s] = (1.0 - opt.damping) * out[s] + opt.damping * yout[s];
    }
  }

  PerStrategy blended;
  for (Strategy s : kAllStrategies) blended[s] = (in[s] + W * out[s]) / D;
  ReputationProfile p = detail::profile_from(comp, blended, blended, defect);
  p.in_good = in;
  p.out_good = out;
  if (p.residual > std::max(opt.tol, 1e-12))
    throw ConvergenceError("group-wise reputation solve did not converge", p,
                           p.residual);
  return p;
}

}  // namespace institutio
