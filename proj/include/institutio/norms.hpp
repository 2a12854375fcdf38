#pragma once

// Strategies, social norms, and donation-game parameters shared by all modules.
//
// A second-order social norm is the map (recipient reputation, donor action)
// -> P(donor is assigned GOOD).  The continuous family used throughout is
// parameterized by (nu_c, nu_d, u_a):
//
//   P_GC = 1 - u_a          P_GD = u_a
//   P_BC = nu_c(1-2u_a)+u_a P_BD = nu_d(1-2u_a)+u_a
//
// with the four corner norms Shunning (0,0), Stern Judging (0,1),
// Scoring (1,0), Simple Standing (1,1).

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace institutio {

enum class Strategy { AllC, AllD, Disc };

inline constexpr std::array<Strategy, 3> kAllStrategies = {
    Strategy::AllC, Strategy::AllD, Strategy::Disc};

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::AllC: return "ALLC";
    case Strategy::AllD: return "ALLD";
    case Strategy::Disc: return "DISC";
  }
  return "?";
}

enum class Reputation { Bad = 0, Good = 1 };
enum class Action { Defect = 0, Cooperate = 1 };

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

template <typename T>
std::string describe(const char* name, T value) {
  std::ostringstream oss;
  oss << name << " = " << value;
  return oss.str();
}

}  // namespace detail

// Benefit/cost of a single cooperative act, b > c > 0.
struct GameParams {
  double benefit = 2.0;
  double cost = 1.0;

  GameParams() = default;
  GameParams(double b, double c) : benefit(b), cost(c) {
    detail::require(c > 0.0, "cost must be positive: " + detail::describe("c", c));
    detail::require(b > c, "benefit must exceed cost: " + detail::describe("b", b) +
                               ", " + detail::describe("c", c));
  }

  double ratio() const { return benefit / cost; }
};

// Immutable value object; analyses never mutate a norm after construction.
struct SocialNorm {
  double p_gc = 0.0;  // P(GOOD | recipient good, donor cooperated)
  double p_gd = 0.0;  // P(GOOD | recipient good, donor defected)
  double p_bc = 0.0;  // P(GOOD | recipient bad,  donor cooperated)
  double p_bd = 0.0;  // P(GOOD | recipient bad,  donor defected)
  double assessment_error = 0.0;        // u_a
  std::optional<double> nu_c, nu_d;     // set when built from the family

  double assign_prob(Reputation recipient, Action action) const {
    if (recipient == Reputation::Good)
      return action == Action::Cooperate ? p_gc : p_gd;
    return action == Action::Cooperate ? p_bc : p_bd;
  }
};

// u_a = 0 is only meaningful for analytic limit checks; several closed forms
// are derived under 0 < u_a < 1/2, so the zero-error case must be requested
// explicitly.
inline SocialNorm norm_from_family(double nu_c, double nu_d, double u_a,
                                   bool allow_zero_error = false) {
  detail::require(nu_c >= 0.0 && nu_c <= 1.0,
                  "nu_c must lie in [0,1]: " + detail::describe("nu_c", nu_c));
  detail::require(nu_d >= 0.0 && nu_d <= 1.0,
                  "nu_d must lie in [0,1]: " + detail::describe("nu_d", nu_d));
  const double lo = allow_zero_error ? 0.0 : std::nextafter(0.0, 1.0);
  detail::require(u_a >= lo && u_a < 0.5,
                  "u_a must lie in (0, 1/2): " + detail::describe("u_a", u_a));
  SocialNorm n;
  n.p_gc = 1.0 - u_a;
  n.p_gd = u_a;
  n.p_bc = nu_c * (1.0 - 2.0 * u_a) + u_a;
  n.p_bd = nu_d * (1.0 - 2.0 * u_a) + u_a;
  n.assessment_error = u_a;
  n.nu_c = nu_c;
  n.nu_d = nu_d;
  return n;
}

enum class NormName { Shunning, SternJudging, Scoring, SimpleStanding };

inline SocialNorm named_norm(NormName name, double u_a,
                             bool allow_zero_error = false) {
  switch (name) {
    case NormName::Shunning:       return norm_from_family(0.0, 0.0, u_a, allow_zero_error);
    case NormName::SternJudging:   return norm_from_family(0.0, 1.0, u_a, allow_zero_error);
    case NormName::Scoring:        return norm_from_family(1.0, 0.0, u_a, allow_zero_error);
    case NormName::SimpleStanding: return norm_from_family(1.0, 1.0, u_a, allow_zero_error);
  }
  throw std::invalid_argument("unknown norm name");
}

inline const char* to_string(NormName name) {
  switch (name) {
    case NormName::Shunning:       return "shunning";
    case NormName::SternJudging:   return "stern-judging";
    case NormName::Scoring:        return "scoring";
    case NormName::SimpleStanding: return "simple-standing";
  }
  return "?";
}

inline std::optional<NormName> parse_norm_name(std::string_view s) {
  if (s == "shunning") return NormName::Shunning;
  if (s == "stern-judging") return NormName::SternJudging;
  if (s == "scoring") return NormName::Scoring;
  if (s == "simple-standing") return NormName::SimpleStanding;
  return std::nullopt;
}

// Deterministic given the draw: GOOD iff draw < P_{recipient,action}.
inline Reputation assign_reputation(const SocialNorm& norm, Reputation recipient,
                                    Action action, double uniform_draw) {
  return uniform_draw < norm.assign_prob(recipient, action) ? Reputation::Good
                                                            : Reputation::Bad;
}

}  // namespace institutio
