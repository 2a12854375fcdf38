// Command-line front end: threshold sweeps, figure datasets, fixed-point
// dumps, and agent-based simulation runs.
//
// Exit codes: 0 success, 1 I/O failure, 2 usage or validation error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "institutio/abm.hpp"
#include "institutio/groups.hpp"
#include "institutio/meanfield.hpp"
#include "institutio/norms.hpp"
#include "institutio/stability.hpp"

using nlohmann::json;
using namespace institutio;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_ratio(const StabilityVerdict& v) {
  return v.feasible ? fmt(v.critical_bc.value()) : "inf";
}

json json_ratio(const StabilityVerdict& v) {
  if (v.feasible) return v.critical_bc.value();
  return "inf";
}

// Grids: a single value, a comma list, or an inclusive range start:stop:count.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double lo, hi;
    long count;
    char extra;
    if (std::sscanf(text.c_str(), "%lf:%lf:%ld%c", &lo, &hi, &count, &extra) != 3 ||
        count < 1)
      throw std::invalid_argument("bad range '" + text +
                                  "': expected start:stop:count");
    for (long i = 0; i < count; ++i)
      out.push_back(count == 1 ? lo : lo + i * (hi - lo) / (count - 1));
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size())
      throw std::invalid_argument("bad number '" + item + "' in grid");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty grid '" + text + "'");
  return out;
}

struct NormChoice {
  std::string name;  // stern-judging / shunning / scoring / simple-standing
  std::optional<double> nu_c, nu_d;

  SocialNorm resolve(double ua) const {
    if (!name.empty()) {
      const auto parsed = parse_norm_name(name);
      if (!parsed)
        throw std::invalid_argument("unknown norm '" + name + "'");
      return named_norm(*parsed, ua);
    }
    if (nu_c || nu_d) {
      if (!(nu_c && nu_d))
        throw std::invalid_argument("family norms need both --nu-c and --nu-d");
      return norm_from_family(*nu_c, *nu_d, ua);
    }
    return named_norm(NormName::SternJudging, ua);  // the default norm
  }
};

void add_norm_options(CLI::App* cmd, NormChoice& norm) {
  cmd->add_option("--norm", norm.name,
                  "named norm: stern-judging, shunning, scoring, simple-standing");
  cmd->add_option("--nu-c", norm.nu_c, "family coordinate nu_C in [0,1]");
  cmd->add_option("--nu-d", norm.nu_d, "family coordinate nu_D in [0,1]");
}

int write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return std::cout ? kExitOk : kExitIo;
  }
  std::ofstream ofs(path, std::ios::binary);
  if (!ofs) {
    std::cerr << "error: cannot open '" << path << "' for writing\n";
    return kExitIo;
  }
  ofs << text;
  return ofs ? kExitOk : kExitIo;
}

// --- threshold --------------------------------------------------------------

struct ThresholdOptions {
  std::string scenario;
  NormChoice norm;
  std::string ua = "";
  std::string r = "", delta = "", n_beta = "";
  std::string omega = "", alpha = "", k_groups = "";
  std::string lambda = "";
  int q_members = 1, q_threshold = 1;
  std::string out;
  bool as_json = false;
  double tol = 1e-12;
};

void require_flag(const std::string& value, const char* flag) {
  if (value.empty())
    throw std::invalid_argument(std::string("missing required flag ") + flag);
}

int run_threshold(const ThresholdOptions& o) {
  require_flag(o.ua, "--ua");

  if (o.scenario == "biased") {
    require_flag(o.lambda, "--lambda");
    std::ostringstream csv;
    csv << "ua,lambda,critical_bc\n";
    json rows = json::array();
    for (double ua : parse_grid(o.ua))
      for (double l : parse_grid(o.lambda)) {
        const StabilityVerdict v = biased_critical_bc(l, ua);
        csv << fmt(ua) << "," << fmt(l) << "," << fmt_ratio(v) << "\n";
        if (o.as_json) {
          const double g = biased_g_disc(l, ua);
          json row{{"ua", ua},       {"lambda", l},
                   {"critical_bc", json_ratio(v)}, {"g_disc", g},
                   {"max_tax_per_bc", (1.0 - ua) - (1.0 - l) * g}};
          rows.push_back(row);
        }
      }
    if (o.as_json) {
      json doc{{"command", "threshold"}, {"scenario", "biased"}, {"rows", rows}};
      return write_text(o.out, doc.dump(2) + "\n");
    }
    return write_text(o.out, csv.str());
  }

  const bool grouped = o.scenario.rfind("group", 0) == 0;
  const SolveOptions opt{o.tol, 400000, 0.5};

  std::vector<std::string> cols;
  std::vector<std::vector<double>> grids;
  auto add_axis = [&](const char* col, const char* flag, const std::string& text) {
    require_flag(text, flag);
    cols.push_back(col);
    grids.push_back(parse_grid(text));
  };

  add_axis("ua", "--ua", o.ua);
  if (grouped) {
    add_axis("k_groups", "--k-groups", o.k_groups.empty() ? "1" : o.k_groups);
    add_axis("omega", "--omega", o.omega.empty() ? "0" : o.omega);
    add_axis("alpha", "--alpha", o.alpha.empty() ? "1" : o.alpha);
  }
  const bool wants_r = o.scenario != "plain" && o.scenario != "group";
  const bool wants_delta = o.scenario == "tax-evader" ||
                           o.scenario == "conditional-briber" ||
                           o.scenario == "group-evader";
  const bool wants_nbeta = o.scenario == "unconditional-briber" ||
                           o.scenario == "conditional-briber" ||
                           o.scenario == "group-briber";
  if (wants_r) add_axis("r", "--r", o.r);
  if (wants_delta) add_axis("delta", "--delta", o.delta);
  if (wants_nbeta) add_axis("n_beta", "--n-beta", o.n_beta);

  const bool has_nbeta_critical = wants_nbeta;
  std::ostringstream csv;
  for (const std::string& c : cols) csv << c << ",";
  csv << "critical_bc";
  if (has_nbeta_critical) csv << ",n_beta_critical";
  csv << "\n";
  json rows = json::array();

  std::vector<size_t> idx(grids.size(), 0);
  const InstitutionConfig inst(o.q_members, o.q_threshold);

  // cache the solved standings per (ua [, group axes]) to avoid re-solving
  double cached_ua = -1.0;
  ReputationProfile prof;
  GroupScenario scn;
  double cached_k = -1, cached_w = -1, cached_a = -1;

  bool done = false;
  while (!done) {
    std::vector<double> point(grids.size());
    for (size_t i = 0; i < grids.size(); ++i) point[i] = grids[i][idx[i]];
    size_t pi = 0;
    const double ua = point[pi++];

    StabilityVerdict verdict;
    std::optional<double> nbc;
    if (grouped) {
      const int K = static_cast<int>(point[pi++]);
      const double w = point[pi++];
      const double a = point[pi++];
      if (ua != cached_ua || K != cached_k || w != cached_w || a != cached_a) {
        scn = make_group_scenario(o.norm.resolve(ua), GameParams(2.0, 1.0),
                                  GroupStructure(K, w, a), std::nullopt, opt);
        cached_ua = ua, cached_k = K, cached_w = w, cached_a = a;
      }
      if (o.scenario == "group") {
        verdict = critical_bc_group(scn);
      } else if (o.scenario == "group-evader") {
        const double r = point[pi++], d = point[pi++];
        verdict = critical_bc_group_evader(scn, r, d);
      } else if (o.scenario == "group-briber") {
        const double r = point[pi++], nb = point[pi++];
        const BriberVerdict bv = critical_bc_group_briber(scn, r, nb);
        verdict = bv.verdict;
        nbc = bv.n_beta_critical;
      } else {
        throw std::invalid_argument("unknown scenario '" + o.scenario + "'");
      }
    } else {
      if (ua != cached_ua) {
        prof = solve_institutional(o.norm.resolve(ua),
                                   PopulationComposition::all_disc(), inst, opt);
        cached_ua = ua;
      }
      const double gd = prof.population_good.disc;
      const double gy = prof.population_good.alld;
      if (o.scenario == "plain") {
        verdict = critical_bc_plain(gd, gy);
      } else if (o.scenario == "tax-evader") {
        const double r = point[pi++], d = point[pi++];
        verdict = critical_bc_tax_evader(gd, gy, r, d);
      } else if (o.scenario == "unconditional-briber") {
        const double r = point[pi++], nb = point[pi++];
        const BriberVerdict bv = critical_bc_unconditional_briber(gd, r, nb);
        verdict = bv.verdict;
        nbc = bv.n_beta_critical;
      } else if (o.scenario == "conditional-briber") {
        const double r = point[pi++], d = point[pi++], nb = point[pi++];
        const BriberVerdict bv = critical_bc_conditional_briber(gd, gy, r, d, nb);
        verdict = bv.verdict;
        nbc = bv.n_beta_critical;
      } else {
        throw std::invalid_argument("unknown scenario '" + o.scenario + "'");
      }
    }

    for (double v : point) csv << fmt(v) << ",";
    csv << fmt_ratio(verdict);
    if (has_nbeta_critical)
      csv << "," << (std::isfinite(*nbc) ? fmt(*nbc) : "inf");
    csv << "\n";
    if (o.as_json) {
      json row;
      for (size_t i = 0; i < cols.size(); ++i) row[cols[i]] = point[i];
      row["critical_bc"] = json_ratio(verdict);
      row["feasible"] = verdict.feasible;
      row["condition"] = verdict.condition_note;
      if (has_nbeta_critical)
        row["n_beta_critical"] =
            std::isfinite(*nbc) ? json(*nbc) : json("inf");
      rows.push_back(row);
    }

    // advance the cartesian index, last axis fastest
    done = true;
    for (size_t i = grids.size(); i-- > 0;) {
      if (++idx[i] < grids[i].size()) {
        done = false;
        break;
      }
      idx[i] = 0;
    }
  }

  if (o.as_json) {
    json doc;
    doc["command"] = "threshold";
    doc["scenario"] = o.scenario;
    doc["rows"] = rows;
    return write_text(o.out, doc.dump(2) + "\n");
  }
  return write_text(o.out, csv.str());
}

// --- figure -----------------------------------------------------------------

struct FigureOptions {
  std::string target;
  std::string op;  // custom target only
  NormChoice norm;
  std::string ua = "0.1";
  std::string r = "", delta = "", n_beta = "";
  std::string omega = "", alpha = "";
  int k_groups = 11;
  int q_members = 1, q_threshold = 1;
  std::string out;
  bool as_json = false;
  double tol = 1e-12;
};

std::string boundary_path(const std::string& out) {
  const size_t dot = out.rfind('.');
  if (dot == std::string::npos || out.find('/', dot) != std::string::npos)
    return out + "_boundary";
  return out.substr(0, dot) + "_boundary" + out.substr(dot);
}

int run_figure(FigureOptions o) {
  const SolveOptions opt{o.tol, 400000, 0.5};
  const double ua = parse_grid(o.ua).front();
  json doc;
  doc["command"] = "figure";
  doc["target"] = o.target;
  doc["ua"] = ua;

  auto profile_at = [&](double u) {
    return solve_institutional(o.norm.resolve(u), PopulationComposition::all_disc(),
                               InstitutionConfig(o.q_members, o.q_threshold), opt);
  };

  if (o.target == "fig1") {
    const std::vector<double> rs = parse_grid(o.r.empty() ? "0:1:101" : o.r);
    const std::vector<double> deltas =
        parse_grid(o.delta.empty() ? "0.2,0.5,0.8" : o.delta);
    const ReputationProfile p = profile_at(ua);
    std::ostringstream csv;
    csv << "# tax-evader resistance threshold; u_a = " << fmt(ua) << "\n";
    csv << "r";
    for (double d : deltas) csv << ",bc_delta" << fmt(d);
    csv << "\n";
    json rows = json::array();
    for (double r : rs) {
      csv << fmt(r);
      json row;
      row["r"] = r;
      for (double d : deltas) {
        const StabilityVerdict v = critical_bc_tax_evader(
            p.population_good.disc, p.population_good.alld, r, d);
        csv << "," << fmt_ratio(v);
        row["bc_delta" + fmt(d)] = json_ratio(v);
      }
      csv << "\n";
      rows.push_back(row);
    }
    // feasibility boundary: the largest tax rate that still admits a finite
    // threshold, as a function of the detection rate
    std::ostringstream bcsv;
    bcsv << "# feasibility boundary (1 - r) = (1 - delta) G_ALLD / G_DISC; u_a = "
         << fmt(ua) << "\n";
    bcsv << "delta,r_boundary\n";
    json brows = json::array();
    for (double d : parse_grid("0:1:101")) {
      const double rb = 1.0 - (1.0 - d) * p.population_good.alld /
                                  p.population_good.disc;
      bcsv << fmt(d) << "," << fmt(rb) << "\n";
      brows.push_back({{"delta", d}, {"r_boundary", rb}});
    }
    if (o.as_json) {
      doc["rows"] = rows;
      doc["boundary"] = brows;
      return write_text(o.out, doc.dump(2) + "\n");
    }
    const int rc = write_text(o.out, csv.str());
    if (rc != kExitOk) return rc;
    return o.out.empty() ? kExitOk : write_text(boundary_path(o.out), bcsv.str());
  }

  if (o.target == "fig2") {
    const std::vector<double> rs = parse_grid(o.r.empty() ? "0:1:101" : o.r);
    const std::vector<double> nbs =
        parse_grid(o.n_beta.empty() ? "1.5,2,4,8" : o.n_beta);
    const ReputationProfile p = profile_at(ua);
    std::ostringstream csv;
    csv << "# unconditional-briber resistance threshold; u_a = " << fmt(ua)
        << "\n";
    csv << "r";
    for (double nb : nbs) csv << ",bc_nbeta" << fmt(nb);
    csv << "\n";
    json rows = json::array();
    for (double r : rs) {
      csv << fmt(r);
      json row;
      row["r"] = r;
      for (double nb : nbs) {
        const BriberVerdict v =
            critical_bc_unconditional_briber(p.population_good.disc, r, nb);
        csv << "," << fmt_ratio(v.verdict);
        row["bc_nbeta" + fmt(nb)] = json_ratio(v.verdict);
      }
      csv << "\n";
      rows.push_back(row);
    }
    std::ostringstream bcsv;
    bcsv << "# audit-speed threshold (N beta)_c = 1 + (1/r)(1/G_DISC - 1); u_a = "
         << fmt(ua) << "\n";
    bcsv << "r,n_beta_critical\n";
    json brows = json::array();
    for (double r : rs) {
      const BriberVerdict v =
          critical_bc_unconditional_briber(p.population_good.disc, r, 1.0);
      const std::string s =
          std::isfinite(v.n_beta_critical) ? fmt(v.n_beta_critical) : "inf";
      bcsv << fmt(r) << "," << s << "\n";
      brows.push_back({{"r", r},
                       {"n_beta_critical", std::isfinite(v.n_beta_critical)
                                               ? json(v.n_beta_critical)
                                               : json("inf")}});
    }
    if (o.as_json) {
      doc["rows"] = rows;
      doc["boundary"] = brows;
      return write_text(o.out, doc.dump(2) + "\n");
    }
    const int rc = write_text(o.out, csv.str());
    if (rc != kExitOk) return rc;
    return o.out.empty() ? kExitOk : write_text(boundary_path(o.out), bcsv.str());
  }

  if (o.target == "fig3") {
    const std::vector<double> rs = parse_grid(o.r.empty() ? "0:1:101" : o.r);
    const std::vector<double> deltas =
        parse_grid(o.delta.empty() ? "0.2,0.5,0.8" : o.delta);
    const std::vector<double> nbs = parse_grid(o.n_beta.empty() ? "1,2,6" : o.n_beta);
    const ReputationProfile p = profile_at(ua);
    std::ostringstream csv;
    csv << "# conditional-briber resistance threshold; u_a = " << fmt(ua) << "\n";
    csv << "r";
    for (double d : deltas)
      for (double nb : nbs) csv << ",bc_delta" << fmt(d) << "_nbeta" << fmt(nb);
    csv << "\n";
    json rows = json::array();
    for (double r : rs) {
      csv << fmt(r);
      json row;
      row["r"] = r;
      for (double d : deltas)
        for (double nb : nbs) {
          const BriberVerdict v = critical_bc_conditional_briber(
              p.population_good.disc, p.population_good.alld, r, d, nb);
          csv << "," << fmt_ratio(v.verdict);
          row["bc_delta" + fmt(d) + "_nbeta" + fmt(nb)] = json_ratio(v.verdict);
        }
      csv << "\n";
      rows.push_back(row);
    }
    if (o.as_json) {
      doc["rows"] = rows;
      return write_text(o.out, doc.dump(2) + "\n");
    }
    return write_text(o.out, csv.str());
  }

  if (o.target == "fig4") {
    const std::vector<double> omegas = parse_grid(o.omega.empty() ? "0:1:101" : o.omega);
    const std::vector<double> alphas = parse_grid(o.alpha.empty() ? "1,2,4" : o.alpha);
    const GameParams game(2.0, 1.0);
    std::ostringstream csv;
    csv << "# maximum rational tax, in units of b - c, against the group-wise "
           "and full-defection baselines; u_a = "
        << fmt(ua) << ", K = " << o.k_groups << "\n";
    csv << "omega_k1";
    for (double a : alphas)
      csv << ",tax_groupwise_alpha" << fmt(a) << ",tax_alld_alpha" << fmt(a);
    csv << "\n";
    json rows = json::array();
    for (double w : omegas) {
      const double W = w * (o.k_groups - 1);
      csv << fmt(W);
      json row;
      row["omega_k1"] = W;
      for (double a : alphas) {
        const GroupScenario scn =
            make_group_scenario(o.norm.resolve(ua), game,
                                GroupStructure(o.k_groups, w, a), std::nullopt, opt);
        const GroupPayoffs pi = group_payoffs(scn);
        const double scale = game.benefit - game.cost;
        const double t_gw = max_tax(pi.pi_institution, pi.pi_groupwise) / scale;
        const double t_alld = max_tax(pi.pi_institution, 0.0) / scale;
        csv << "," << fmt(t_gw) << "," << fmt(t_alld);
        row["tax_groupwise_alpha" + fmt(a)] = t_gw;
        row["tax_alld_alpha" + fmt(a)] = t_alld;
      }
      csv << "\n";
      rows.push_back(row);
    }
    if (o.as_json) {
      doc["rows"] = rows;
      doc["k_groups"] = o.k_groups;
      return write_text(o.out, doc.dump(2) + "\n");
    }
    return write_text(o.out, csv.str());
  }

  if (o.target == "si-fixed-points") {
    const std::vector<double> uas = parse_grid(o.ua == "0.1" ? "0.025:0.475:19" : o.ua);
    std::ostringstream csv;
    csv << "# private-assessment all-DISC standings and critical ratios\n";
    csv << "norm,nu_c,nu_d,ua,g_allc,g_alld,g_disc,critical_bc\n";
    json rows = json::array();
    const std::pair<const char*, std::pair<double, double>> norms[] = {
        {"shunning", {0.0, 0.0}},
        {"stern-judging", {0.0, 1.0}},
        {"scoring", {1.0, 0.0}},
        {"simple-standing", {1.0, 1.0}},
    };
    for (const auto& [name, nu] : norms)
      for (double u : uas) {
        const ReputationProfile p = solve_private(
            norm_from_family(nu.first, nu.second, u),
            PopulationComposition::all_disc(), opt);
        const StabilityVerdict v =
            critical_bc_private_family(nu.first, nu.second, u);
        csv << name << "," << fmt(nu.first) << "," << fmt(nu.second) << ","
            << fmt(u) << "," << fmt(p.population_good.allc) << ","
            << fmt(p.population_good.alld) << "," << fmt(p.population_good.disc)
            << "," << fmt_ratio(v) << "\n";
        rows.push_back({{"norm", name},
                        {"nu_c", nu.first},
                        {"nu_d", nu.second},
                        {"ua", u},
                        {"g_allc", p.population_good.allc},
                        {"g_alld", p.population_good.alld},
                        {"g_disc", p.population_good.disc},
                        {"critical_bc", json_ratio(v)}});
      }
    if (o.as_json) {
      doc["rows"] = rows;
      return write_text(o.out, doc.dump(2) + "\n");
    }
    return write_text(o.out, csv.str());
  }

  if (o.target == "custom") {
    if (o.op.empty())
      throw std::invalid_argument("custom target requires --op <scenario>");
    ThresholdOptions t;
    t.scenario = o.op;
    t.norm = o.norm;
    t.ua = o.ua;
    t.r = o.r;
    t.delta = o.delta;
    t.n_beta = o.n_beta;
    t.omega = o.omega;
    t.alpha = o.alpha;
    t.k_groups = std::to_string(o.k_groups);
    t.q_members = o.q_members;
    t.q_threshold = o.q_threshold;
    t.out = o.out;
    t.as_json = o.as_json;
    t.tol = o.tol;
    return run_threshold(t);
  }

  throw std::invalid_argument("unknown figure target '" + o.target + "'");
}

// --- fixed-point ------------------------------------------------------------

struct FixedPointOptions {
  std::string mode = "institutional";
  NormChoice norm;
  double ua = 0.1;
  std::string comp = "0,0,1";
  int q_members = 1, q_threshold = 1;
  int k_groups = 1;
  double omega = 0.0, alpha = 1.0;
  double tol = 1e-12;
  long max_iter = 400000;
  std::string out;
  bool as_json = false;
};

PopulationComposition parse_comp(const std::string& text) {
  const std::vector<double> f = parse_grid(text);
  if (f.size() != 3)
    throw std::invalid_argument("--comp needs three frequencies f_allc,f_alld,f_disc");
  return {f[0], f[1], f[2]};
}

int run_fixed_point(const FixedPointOptions& o) {
  const SocialNorm norm = o.norm.resolve(o.ua);
  const PopulationComposition comp = parse_comp(o.comp);
  const SolveOptions opt{o.tol, static_cast<int>(o.max_iter), 0.5};

  ReputationProfile p;
  if (o.mode == "private")
    p = solve_private(norm, comp, opt);
  else if (o.mode == "institutional")
    p = solve_institutional(norm, comp, InstitutionConfig(o.q_members, o.q_threshold), opt);
  else if (o.mode == "group-wise")
    p = solve_groupwise(norm, comp, GroupStructure(o.k_groups, o.omega, o.alpha), opt);
  else
    throw std::invalid_argument("unknown mode '" + o.mode +
                                "': use private, institutional or group-wise");

  if (o.as_json) {
    json doc;
    doc["command"] = "fixed-point";
    doc["mode"] = o.mode;
    doc["average_good"] = p.average_good;
    doc["agreement"] = p.agreement;
    doc["residual"] = p.residual;
    for (Strategy s : kAllStrategies) {
      json row;
      row["assessor_good"] = p.assessor_good[s];
      row["population_good"] = p.population_good[s];
      if (p.in_good) {
        row["in_good"] = (*p.in_good)[s];
        row["out_good"] = (*p.out_good)[s];
      }
      doc["strategies"][to_string(s)] = row;
    }
    return write_text(o.out, doc.dump(2) + "\n");
  }

  std::ostringstream csv;
  csv << "# G = " << fmt(p.average_good) << ", gamma = " << fmt(p.agreement)
      << ", residual = " << fmt(p.residual) << "\n";
  csv << "strategy,assessor_good,population_good";
  if (p.in_good) csv << ",in_good,out_good";
  csv << "\n";
  for (Strategy s : kAllStrategies) {
    csv << to_string(s) << "," << fmt(p.assessor_good[s]) << ","
        << fmt(p.population_good[s]);
    if (p.in_good)
      csv << "," << fmt((*p.in_good)[s]) << "," << fmt((*p.out_good)[s]);
    csv << "\n";
  }
  return write_text(o.out, csv.str());
}

// --- abm ----------------------------------------------------------------------

struct AbmOptions {
  NormChoice norm;
  double ua = 0.1;
  int n = 200;
  int q_members = 1, q_threshold = 1;
  long rounds = 5000, burn_in = 1000;
  std::string comp = "0,0,1";
  double b = 2.0, c = 1.0;
  double omega_sel = 1.0;
  std::optional<uint64_t> seed;
  std::optional<double> r, delta, n_beta;
  bool private_assessment = false;
  std::string invader;  // allc / alld / disc
  int invader_count = 1;
  bool invader_evades = false;
  std::string invader_bribes;  // unconditional / conditional
  int replicates = 0;
  std::string out;
  bool as_json = false;
};

std::string summary_stat(const char* key, const MeanSe& m) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s=%.9f±%.9g", key, m.mean, m.se);
  return buf;
}

int run_abm(const AbmOptions& o) {
  if (!o.seed)
    throw std::invalid_argument("--seed is required for reproducible runs");

  AbmConfig cfg;
  cfg.n_pop = o.n;
  cfg.norm = o.norm.resolve(o.ua);
  cfg.inst = InstitutionConfig(o.q_members, o.q_threshold);
  cfg.game = GameParams(o.b, o.c);
  cfg.omega_sel = o.omega_sel;
  cfg.rounds = o.rounds;
  cfg.burn_in = o.burn_in;
  cfg.seed = *o.seed;
  cfg.initial_comp = parse_comp(o.comp);
  cfg.private_assessment = o.private_assessment;

  if (o.r || o.delta || o.n_beta) {
    if (!(o.r && o.delta && o.n_beta))
      throw std::invalid_argument(
          "tax runs need all of --r, --delta and --n-beta (no defaults)");
    const ReputationProfile mf = solve_institutional(
        cfg.norm, PopulationComposition::all_disc(), cfg.inst, {1e-13, 400000, 0.5});
    const double tax =
        max_tax((cfg.game.benefit - cfg.game.cost) * mf.population_good.disc, 0.0);
    TaxScheme scheme(*o.r, *o.delta, *o.n_beta / cfg.n_pop, cfg.n_pop);
    cfg.scheme = with_derived(scheme, cfg.inst, tax);
  }

  if (!o.invader.empty()) {
    InvaderSpec inv;
    if (o.invader == "allc")
      inv.strategy = Strategy::AllC;
    else if (o.invader == "alld")
      inv.strategy = Strategy::AllD;
    else if (o.invader == "disc")
      inv.strategy = Strategy::Disc;
    else
      throw std::invalid_argument("unknown invader strategy '" + o.invader + "'");
    inv.count = o.invader_count;
    inv.behavior.pays_tax = cfg.scheme.has_value() && !o.invader_evades;
    inv.behavior.evades = o.invader_evades;
    if (o.invader_bribes == "unconditional")
      inv.behavior.bribes_unconditional = true;
    else if (o.invader_bribes == "conditional")
      inv.behavior.bribes_conditional = true;
    else if (!o.invader_bribes.empty())
      throw std::invalid_argument("unknown bribe mode '" + o.invader_bribes + "'");
    cfg.invader = inv;
  }

  if (o.replicates > 0) {
    const InvasionResult res = invasion_trial(cfg, o.replicates);
    if (o.as_json) {
      json doc;
      doc["command"] = "abm";
      doc["replicates"] = o.replicates;
      doc["fixations"] = res.fixation_count;
      doc["extinctions"] = res.extinction_count;
      doc["unresolved"] = res.unresolved;
      doc["mean_payoff_gap"] = res.mean_payoff_gap;
      return write_text(o.out, doc.dump(2) + "\n");
    }
    std::ostringstream line;
    line << "fixations=" << res.fixation_count
         << " extinctions=" << res.extinction_count
         << " unresolved=" << res.unresolved
         << " mean_payoff_gap=" << fmt(res.mean_payoff_gap) << "\n";
    return write_text(o.out, line.str());
  }

  const AbmTrace trace = run(cfg);
  const MeanSe coop = estimate_series(trace, cfg.burn_in, &RoundRecord::coop_rate);

  if (o.as_json) {
    json doc;
    doc["command"] = "abm";
    doc["seed"] = *o.seed;
    doc["summary"] = {
        {"coop_rate", {{"mean", coop.mean}, {"se", coop.se}}},
        {"good_allc", {{"mean", trace.good_allc.mean}, {"se", trace.good_allc.se}}},
        {"good_alld", {{"mean", trace.good_alld.mean}, {"se", trace.good_alld.se}}},
        {"good_disc", {{"mean", trace.good_disc.mean}, {"se", trace.good_disc.se}}},
    };
    json rows = json::array();
    for (const RoundRecord& r : trace.rounds) {
      const double n = cfg.n_pop;
      rows.push_back({r.round, r.n_allc / n, r.n_alld / n, r.n_disc / n,
                      r.coop_rate, r.good_allc, r.good_alld, r.good_disc,
                      r.pi_allc, r.pi_alld, r.pi_disc, r.audits_delta,
                      r.audits_beta, r.bribes_paid});
    }
    doc["trace_columns"] = {"round", "f_allc", "f_alld", "f_disc", "coop_rate",
                            "good_allc", "good_alld", "good_disc", "pi_allc",
                            "pi_alld", "pi_disc", "audits_delta", "audits_beta",
                            "bribes_paid"};
    doc["trace"] = rows;
    return write_text(o.out, doc.dump(2) + "\n");
  }

  if (!o.out.empty()) {
    std::ostringstream csv;
    write_trace_csv(trace, cfg.n_pop, csv);
    const int rc = write_text(o.out, csv.str());
    if (rc != kExitOk) return rc;
  }
  std::cout << summary_stat("coop_rate", coop) << " "
            << summary_stat("good_allc", trace.good_allc) << " "
            << summary_stat("good_alld", trace.good_alld) << " "
            << summary_stat("good_disc", trace.good_disc) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reputation institutions: thresholds, taxes, bribes, and an "
               "agent-based simulator"};
  app.require_subcommand(1);

  ThresholdOptions th;
  CLI::App* th_cmd = app.add_subcommand(
      "threshold", "critical benefit-cost ratios for invasion scenarios");
  th_cmd->add_option("--scenario", th.scenario,
                     "plain, tax-evader, unconditional-briber, "
                     "conditional-briber, group, group-evader, group-briber, "
                     "biased")
      ->required();
  add_norm_options(th_cmd, th.norm);
  th_cmd->add_option("--ua", th.ua, "assessment error grid");
  th_cmd->add_option("--r", th.r, "tax rate grid");
  th_cmd->add_option("--delta", th.delta, "evader detection grid");
  th_cmd->add_option("--n-beta", th.n_beta, "N*beta audit-speed grid");
  th_cmd->add_option("--omega", th.omega, "out-group interaction grid");
  th_cmd->add_option("--lambda", th.lambda, "outgroup fraction grid (biased)");
  th_cmd->add_option("--alpha", th.alpha, "out-group premium grid");
  th_cmd->add_option("--k-groups", th.k_groups, "group count grid");
  th_cmd->add_option("--q-members", th.q_members, "institution size Q");
  th_cmd->add_option("--q-threshold", th.q_threshold, "strictness threshold q");
  th_cmd->add_option("--out", th.out, "output path (default stdout)");
  th_cmd->add_flag("--json", th.as_json, "emit one JSON object");
  th_cmd->add_option("--tol", th.tol, "fixed-point tolerance");

  FigureOptions fig;
  CLI::App* fig_cmd =
      app.add_subcommand("figure", "dataset generation for the standard plots");
  fig_cmd->add_option("--target", fig.target,
                      "fig1, fig2, fig3, fig4, si-fixed-points, custom")
      ->required();
  fig_cmd->add_option("--op", fig.op, "scenario name for --target custom");
  add_norm_options(fig_cmd, fig.norm);
  fig_cmd->add_option("--ua", fig.ua, "assessment error (default 0.1)");
  fig_cmd->add_option("--r", fig.r, "tax rate grid override");
  fig_cmd->add_option("--delta", fig.delta, "detection grid override");
  fig_cmd->add_option("--n-beta", fig.n_beta, "N*beta grid override");
  fig_cmd->add_option("--omega", fig.omega, "omega grid override (fig4)");
  fig_cmd->add_option("--alpha", fig.alpha, "alpha list override (fig4)");
  fig_cmd->add_option("--k-groups", fig.k_groups, "group count (fig4)");
  fig_cmd->add_option("--q-members", fig.q_members, "institution size Q");
  fig_cmd->add_option("--q-threshold", fig.q_threshold, "strictness threshold q");
  fig_cmd->add_option("--out", fig.out, "output path (default stdout)");
  fig_cmd->add_flag("--json", fig.as_json, "emit one JSON object");
  fig_cmd->add_option("--tol", fig.tol, "fixed-point tolerance");

  FixedPointOptions fp;
  CLI::App* fp_cmd =
      app.add_subcommand("fixed-point", "solve and dump a reputation profile");
  fp_cmd->add_option("--mode", fp.mode, "private, institutional, group-wise");
  add_norm_options(fp_cmd, fp.norm);
  fp_cmd->add_option("--ua", fp.ua, "assessment error");
  fp_cmd->add_option("--comp", fp.comp, "f_allc,f_alld,f_disc (default 0,0,1)");
  fp_cmd->add_option("--q-members", fp.q_members, "institution size Q");
  fp_cmd->add_option("--q-threshold", fp.q_threshold, "strictness threshold q");
  fp_cmd->add_option("--k-groups", fp.k_groups, "number of groups");
  fp_cmd->add_option("--omega", fp.omega, "out-group interaction probability");
  fp_cmd->add_option("--alpha", fp.alpha, "out-group payoff premium");
  fp_cmd->add_option("--tol", fp.tol, "fixed-point tolerance");
  fp_cmd->add_option("--max-iter", fp.max_iter, "iteration budget");
  fp_cmd->add_option("--out", fp.out, "output path (default stdout)");
  fp_cmd->add_flag("--json", fp.as_json, "emit one JSON object");

  AbmOptions ab;
  CLI::App* ab_cmd = app.add_subcommand("abm", "stochastic agent-based run");
  add_norm_options(ab_cmd, ab.norm);
  ab_cmd->add_option("--ua", ab.ua, "assessment error");
  ab_cmd->add_option("--n", ab.n, "population size");
  ab_cmd->add_option("--q-members", ab.q_members, "institution size Q");
  ab_cmd->add_option("--q-threshold", ab.q_threshold, "strictness threshold q");
  ab_cmd->add_option("--rounds", ab.rounds, "rounds to simulate");
  ab_cmd->add_option("--burn-in", ab.burn_in, "rounds discarded from statistics");
  ab_cmd->add_option("--comp", ab.comp, "initial f_allc,f_alld,f_disc");
  ab_cmd->add_option("--b", ab.b, "benefit per cooperative act");
  ab_cmd->add_option("--c", ab.c, "cost per cooperative act");
  ab_cmd->add_option("--omega-sel", ab.omega_sel, "Fermi selection strength");
  ab_cmd->add_option("--seed", ab.seed, "RNG seed (required)");
  ab_cmd->add_option("--r", ab.r, "tax rate");
  ab_cmd->add_option("--delta", ab.delta, "evader detection probability");
  ab_cmd->add_option("--n-beta", ab.n_beta, "N*beta audit speed");
  ab_cmd->add_flag("--private-assessment", ab.private_assessment,
                   "per-agent opinions instead of an institution");
  ab_cmd->add_option("--invader", ab.invader, "invader strategy: allc, alld, disc");
  ab_cmd->add_option("--invader-count", ab.invader_count, "number of invaders");
  ab_cmd->add_flag("--invader-evades", ab.invader_evades, "invader evades the tax");
  ab_cmd->add_option("--invader-bribes", ab.invader_bribes,
                     "unconditional or conditional");
  ab_cmd->add_option("--replicates", ab.replicates,
                     "run an invasion trial with this many replicates");
  ab_cmd->add_option("--out", ab.out, "trace CSV path");
  ab_cmd->add_flag("--json", ab.as_json, "emit one JSON object");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*th_cmd) return run_threshold(th);
    if (*fig_cmd) return run_figure(fig);
    if (*fp_cmd) return run_fixed_point(fp);
    if (*ab_cmd) return run_abm(ab);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::ios_base::failure&) {
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
