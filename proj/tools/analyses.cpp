#include <algorithm>
#include <cmath>
#include <sstream>

#include "reader.hpp"
#include "scenario.hpp"
#include "tse/dynamics.hpp"
#include "tse/frontier.hpp"
#include "tse/hopf.hpp"
#include "tse/market.hpp"
#include "tse/pdmp.hpp"
#include "tse/stack.hpp"
#include "tse/stochastic.hpp"
#include "tse/voting.hpp"

namespace tse::scenario {

namespace {

class Builder {
public:
  explicit Builder(AnalysisResult& r) : r_(r) {}
  void num(std::string name, double v) { r_.quantities.push_back({std::move(name), v}); }
  void flag(std::string name, bool v) { r_.quantities.push_back({std::move(name), v}); }
  void text(std::string name, std::string v) { r_.quantities.push_back({std::move(name), std::move(v)}); }
  void artifact(std::string file, std::string content) {
    r_.artifacts.push_back({std::move(file), std::move(content)});
  }

private:
  AnalysisResult& r_;
};

std::string idx(const char* prefix, std::size_t i) { return std::string(prefix) + "_" + std::to_string(i); }

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

FitnessModel linear_model(const Reader& a) {
  const Matrix payoff = a.matrix("payoff");
  if (!payoff.square()) a.fail("payoff", "must be square");
  std::vector<double> offset;
  if (a.has("offset")) {
    offset = a.numbers("offset");
    if (offset.size() != payoff.rows()) a.fail("offset", "length must match the payoff matrix");
  }
  return FitnessModel::linear(payoff, offset);
}

// ---------------------------------------------------------------- dynamics

void run_dynamics(const nlohmann::json& j, Builder& b, std::string& summary) {
  const Reader a(j, "analysis", {"kind", "payoff", "offset", "initial", "horizon", "step",
                                 "emit_every", "gamma", "continuum"});
  if (a.has("continuum")) {
    if (a.has("payoff")) a.fail("continuum", "give either a payoff matrix or a continuum model");
    const Reader c = a.object("continuum", {"alpha", "beta", "n", "horizon", "step"});
    const auto r = dynamics::discretized_continuous_run(c.number("alpha"), c.number("beta"),
                                                        c.count("n"), c.number("horizon"),
                                                        c.number_or("step", 0.05));
    b.num("cluster_count", static_cast<double>(r.cluster_locations.size()));
    for (std::size_t i = 0; i < r.cluster_locations.size(); ++i) b.num(idx("cluster", i), r.cluster_locations[i]);
    b.num("middle_mass", r.middle_mass);
    b.num("mean_s", r.mean_s);
    std::ostringstream csv;
    csv << "s,mass\n";
    for (std::size_t i = 0; i < r.grid.size(); ++i)
      csv << format_double(r.grid[i]) << ',' << format_double(r.final_state[i]) << '\n';
    b.artifact("distribution.csv", csv.str());
    summary = std::to_string(r.cluster_locations.size()) + " cluster(s), middle mass " +
              format_double(r.middle_mass);
    return;
  }

  const auto model = linear_model(a);
  const auto x0 = a.numbers("initial");
  if (x0.size() != model.dimension()) a.fail("initial", "length must match the payoff matrix");
  const PopulationState start(x0);
  dynamics::IntegrationOptions opts;
  opts.emit_every = a.count_or("emit_every", 10);
  if (opts.emit_every == 0) a.fail("emit_every", "must be >= 1");
  const auto traj = dynamics::integrate_replicator(start, model, a.number("horizon"),
                                                   a.number_or("step", 0.01), opts);
  const auto lyap = dynamics::check_lyapunov_monotone(traj, model, a.number_or("gamma", 0.0));
  const auto first = dynamics::price_decomposition(start, model);
  const auto last = dynamics::price_decomposition(PopulationState(traj.states.back(), 0.0), model);
  b.num("mean_fitness_initial", first.mean_fitness);
  b.num("variance_initial", first.variance);
  b.num("externality_initial", first.externality);
  b.num("mean_fitness_final", last.mean_fitness);
  for (std::size_t i = 0; i < traj.states.back().size(); ++i) b.num(idx("x_final", i), traj.states.back()[i]);
  b.flag("lyapunov_nondecreasing", lyap.nondecreasing);
  b.flag("lyapunov_monotone", lyap.monotone);
  b.num("lyapunov_min_margin", lyap.min_margin);

  const auto sw = dynamics::swirl_decompose(model.payoff());
  b.num("symmetric_norm", sw.symmetric_part.frobenius_norm());
  b.num("antisymmetric_norm", sw.antisymmetric_part.frobenius_norm());
  if (sw.swirl_ratio) b.num("swirl_ratio", *sw.swirl_ratio);
  else b.text("swirl_ratio", "undefined");

  if (model.dimension() == 2) {
    const auto basin = dynamics::basin_analysis([&](double x) {
      const std::vector<double> s{x, 1.0 - x};
      const auto f = model.evaluate(s);
      return f[0] - f[1];
    });
    if (basin.sign_change_found) b.num("interior_equilibrium", basin.point_of_no_return);
  }

  std::ostringstream csv;
  dynamics::write_trajectory_csv(csv, traj, model);
  b.artifact("trajectory.csv", csv.str());
  summary = "mean fitness " + format_double(first.mean_fitness) + " -> " +
            format_double(last.mean_fitness) + (lyap.nondecreasing ? ", nondecreasing" : ", not monotone");
}

// ---------------------------------------------------------------- frontier

void run_frontier(const nlohmann::json& j, Builder& b, std::string& summary) {
  const Reader a(j, "analysis", {"kind", "types", "budget", "capacity", "load_cap"});
  std::vector<frontier::AgentTypeSpec> types;
  for (const auto& t : a.objects("types", {"label", "r", "c", "l"}))
    types.push_back({t.number("r"), t.number("c"), t.number("l"), t.string("label")});
  if (types.empty()) a.fail("types", "at least one agent type is required");
  const auto points = frontier::normalize_types(types);
  const auto rep = frontier::roc_frontier(points);
  std::vector<std::string> dominated;
  for (const auto& p : points) {
    const auto& label = types[p.source].label;
    b.num("a_" + label, p.a);
    b.num("b_" + label, p.b);
    b.flag("on_hull_" + label, rep.on_hull(p.source));
  }
  for (std::size_t s : rep.dominated) dominated.push_back(types[s].label);
  b.text("dominated", join(dominated, ","));
  std::ostringstream csv;
  frontier::write_frontier_csv(csv, types, points, rep);
  b.artifact("frontier.csv", csv.str());
  summary = "hull of " + std::to_string(rep.hull.size()) + " type(s), dominated: " +
            (dominated.empty() ? "none" : join(dominated, ","));

  if (a.has("load_cap")) {
    const auto mix = frontier::optimal_unit_mix(types, a.number("load_cap"));
    for (std::size_t i = 0; i < types.size(); ++i) b.num("mix_" + types[i].label, mix[i]);
  }
  if (a.has("budget") || a.has("capacity")) {
    const auto sol = frontier::optimize_portfolio(types, a.number("budget"), a.number("capacity"));
    for (std::size_t i = 0; i < types.size(); ++i) b.num("count_" + types[i].label, sol.counts[i]);
    b.num("total_return", sol.total_return);
    b.num("shadow_budget", sol.mu);
    b.num("shadow_capacity", sol.lambda);
    b.flag("budget_binding", sol.budget_binding);
    b.flag("capacity_binding", sol.capacity_binding);
    b.flag("degenerate", sol.degenerate);
    b.num("support_size", static_cast<double>(sol.support().size()));
    b.flag("sparsity_holds", frontier::sparsity_check(sol, sol.binding_count()));
    std::ostringstream kv;
    frontier::write_solution_report(kv, types, sol);
    b.artifact("shadow_prices.txt", kv.str());
    summary += ", return " + format_double(sol.total_return);
  }
}

// ---------------------------------------------------------------- stack

void run_stack(const nlohmann::json& j, Builder& b, std::string& summary) {
  const Reader a(j, "analysis", {"kind", "levels", "cross_beta", "slack_budget"});
  if (!a.has("levels") && !a.has("slack_budget"))
    a.fail("levels", "give a level stack, a slack budget, or both");
  if (a.has("levels")) {
    stack::LevelStack st;
    for (const auto& l : a.objects("levels", {"label", "gamma"}))
      st.levels.push_back({l.number("gamma"), l.string_or("label", "")});
    st.cross_beta = a.matrix("cross_beta");
    st.validate();
    const auto g = stack::analyze_stack(st);
    const std::size_t n = g.gain.rows();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        b.num("gain_" + std::to_string(i) + "_" + std::to_string(k), g.gain(i, k));
    b.num("rho", g.rho);
    b.num("slack", g.slack);
    b.text("small_gain", stack::to_string(g.status));
    b.num("gershgorin_bound", stack::gershgorin_bound(g.gain));
    if (g.weights) {
      for (std::size_t i = 0; i < n; ++i) b.num(idx("v", i), g.weights->v[i]);
      for (std::size_t i = 0; i < n; ++i) b.num(idx("alpha", i), g.weights->alpha[i]);
      b.num("weight_residual", g.weights->residual);
    }
    std::ostringstream rep;
    stack::write_gain_report(rep, g);
    b.artifact("gain.csv", rep.str());
    summary = "rho " + format_double(g.rho) + " (" + stack::to_string(g.status) + ")";
  }
  if (a.has("slack_budget")) {
    const Reader s = a.object("slack_budget", {"thetas", "sigma0", "sigma_min", "uniform_theta"});
    const double s0 = s.number("sigma0"), smin = s.number("sigma_min");
    const auto sb = stack::slack_budget(s.numbers("thetas"), s0, smin);
    for (std::size_t i = 0; i < sb.costs.size(); ++i) b.num(idx("slack_cost", i), sb.costs[i]);
    b.num("slack_total", sb.total);
    b.num("slack_budget", sb.budget);
    b.num("remaining_slack", sb.remaining_slack);
    b.text("verdict", sb.safe ? "safe" : "unsafe");
    if (s.has("uniform_theta"))
      b.num("uniform_depth", static_cast<double>(stack::safe_depth_uniform(s.number("uniform_theta"), s0, smin)));
    summary += (summary.empty() ? "" : "; ") + std::string("slack cost ") + format_double(sb.total) +
               " of " + format_double(sb.budget) + (sb.safe ? ", safe" : ", unsafe");
  }
}

// ---------------------------------------------------------------- stochastic

void add_protection(const Reader& a, Builder& b, std::string& summary) {
  const Reader p = a.object("protection", {"barriers", "sigma", "base_rate"});
  const double sigma = p.number("sigma");
  const auto barriers = p.numbers("barriers");
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < barriers.size(); ++i) {
    const double bits = stochastic::protection_bits(barriers[i], sigma);
    b.num(idx("protection_bits", i), bits);
    const auto per = stochastic::expected_persistence(bits, p.number_or("base_rate", 1.0));
    b.num(idx("persistence", i), per.value);
    if (per.saturated) b.flag(idx("persistence_saturated", i), true);
    parts.push_back(format_double(bits));
  }
  summary += (summary.empty() ? "" : "; ") + std::string("protection bits ") + join(parts, ", ");
}

void run_stochastic(const nlohmann::json& j, std::uint64_t seed, Builder& b, std::string& summary) {
  const Reader a(j, "analysis", {"kind", "protection", "kramers", "occupancy"});
  if (!a.has("protection") && !a.has("kramers") && !a.has("occupancy"))
    a.fail("kramers", "give at least one of protection, kramers, occupancy");
  if (a.has("protection")) add_protection(a, b, summary);
  if (a.has("kramers")) {
    const Reader k = a.object("kramers", {"barrier_left", "barrier_right", "sigmas", "runs", "step",
                                          "max_steps", "threads"});
    const double wl = k.number("barrier_left");
    const auto well = stochastic::double_well(wl, k.number_or("barrier_right", wl));
    stochastic::NoiseConfig noise;
    noise.seed = seed;
    noise.step = k.number_or("step", noise.step);
    noise.runs = k.count_or("runs", noise.runs);
    noise.max_steps = k.count_or("max_steps", noise.max_steps);
    noise.threads = static_cast<unsigned>(k.count_or("threads", 1));
    const auto fit = stochastic::kramers_scaling(well, k.numbers("sigmas"), noise);
    for (std::size_t i = 0; i < fit.sigmas.size(); ++i) b.num(idx("mean_escape", i), fit.mean_times[i]);
    b.num("kramers_slope", fit.slope);
    b.num("kramers_intercept", fit.intercept);
    b.num("kramers_r_squared", fit.r_squared);
    if (fit.barrier_reference) b.num("barrier_reference", *fit.barrier_reference);
    std::ostringstream csv, kv;
    stochastic::write_escape_csv(csv, fit.sets);
    stochastic::write_kramers_summary(kv, fit);
    b.artifact("escape.csv", csv.str());
    b.artifact("kramers.txt", kv.str());
    summary += (summary.empty() ? "" : "; ") + std::string("Kramers slope ") + format_double(fit.slope);
  }
  if (a.has("occupancy")) {
    const Reader o = a.object("occupancy", {"barrier_left", "barrier_right", "sigmas", "walkers",
                                            "horizon", "burn_in", "step"});
    stochastic::OccupancyConfig cfg;
    cfg.seed = seed;
    cfg.walkers = o.count_or("walkers", cfg.walkers);
    cfg.horizon = o.number_or("horizon", cfg.horizon);
    cfg.burn_in = o.number_or("burn_in", cfg.burn_in);
    cfg.step = o.number_or("step", cfg.step);
    const auto well = stochastic::double_well(o.number("barrier_left"), o.number("barrier_right"));
    const auto occ = stochastic::stationary_concentration(well, o.numbers("sigmas"), cfg);
    std::ostringstream csv;
    csv << "sigma,left,right,transitions\n";
    for (std::size_t i = 0; i < occ.size(); ++i) {
      b.num(idx("occupancy_left", i), occ[i].left);
      csv << format_double(occ[i].sigma) << ',' << format_double(occ[i].left) << ','
          << format_double(occ[i].right) << ',' << occ[i].transitions << '\n';
    }
    b.artifact("occupancy.csv", csv.str());
    summary += (summary.empty() ? "" : "; ") + std::string("occupancy over ") +
               std::to_string(occ.size()) + " noise level(s)";
  }
}

// ---------------------------------------------------------------- hopf

void run_hopf(const nlohmann::json& j, Builder& b, std::string& summary) {
  const Reader a(j, "analysis", {"kind", "mu", "mutation", "offsets", "horizon", "transient_cut", "step"});
  const double mu = a.number("mu");
  const double m = a.number_or("mutation", 0.02);
  b.num("kappa_c", hopf::hopf_curve(mu));
  b.num("l1", hopf::first_lyapunov_coefficient(mu));
  b.flag("supercritical", hopf::first_lyapunov_coefficient(mu) < 0.0);
  b.num("amplitude_coefficient", hopf::amplitude_coefficient(mu));
  const auto o = hopf::orient(mu, m);
  b.num("growth_rate_below", o.growth_rate_below);
  b.num("growth_rate_above", o.growth_rate_above);
  b.num("frequency", o.frequency);
  summary = "kappa_c " + format_double(hopf::hopf_curve(mu)) + ", l1 " +
            format_double(hopf::first_lyapunov_coefficient(mu));
  if (a.has("offsets")) {
    hopf::MeasureOptions opts;
    opts.step = a.number_or("step", opts.step);
    const auto sc = hopf::amplitude_scaling(mu, a.numbers("offsets"), a.number("horizon"),
                                            a.number("transient_cut"), m, opts);
    for (std::size_t i = 0; i < sc.cycles.size(); ++i) {
      b.num(idx("amplitude", i), sc.cycles[i].amplitude);
      if (sc.cycles[i].period) b.num(idx("period", i), *sc.cycles[i].period);
    }
    b.num("amplitude_exponent", sc.exponent);
    std::ostringstream csv;
    const auto rows = hopf::to_rows(sc, mu);
    hopf::write_sweep_csv(csv, rows);
    b.artifact("hopf.csv", csv.str());
    summary += ", amplitude exponent " + format_double(sc.exponent);
  }
}

// ---------------------------------------------------------------- market

void run_market(const nlohmann::json& j, Builder& b, std::string& summary) {
  const Reader a(j, "analysis", {"kind", "tipping", "s_curve", "shadow", "cooperation", "hamilton",
                                 "elite", "discount", "protection", "usdi"});
  std::vector<std::string> parts;
  std::optional<double> tipping;
  if (a.has("tipping")) {
    const Reader t = a.object("tipping", {"alpha", "beta", "tau", "rho", "spawn_elasticity", "beta_power"});
    const market::TippingParams p{t.number("alpha"), t.number("beta"), t.number("tau"),
                                  t.number("rho"), t.number_or("spawn_elasticity", 0.0)};
    p.validate();
    const double s = market::myopic_slope(p);
    b.num("S_myo", s);
    tipping = market::tipping_index(s, p.rho);
    b.num("T", *tipping);
    b.flag("tips", std::abs(*tipping) > 1.0);
    b.num("beta_crit", market::beta_crit(p.tau, p.rho, p.alpha, t.optional_number("beta_power")));
    b.num("beta_crit_queue_neutral", market::beta_crit(p.tau, p.rho, 0.0));
    const double ss = market::spawn_adjusted_slope(p);
    b.num("S_spawn", ss);
    try {
      b.num("T_spawn", market::tipping_index(ss, p.rho));
    } catch (const market::DivergentExpectationsError&) {
      b.text("T_spawn", "divergent");
    }
    parts.push_back("T " + format_double(*tipping));
  }
  if (a.has("s_curve")) {
    const Reader c = a.object("s_curve", {"m0", "steps", "k"});
    double k = 0.0;
    if (c.has("k")) k = c.number("k");
    else if (tipping) k = market::default_steepness(*tipping);
    else c.fail("k", "required when no tipping section is given");
    const auto m = market::iterate_s_curve(c.number("m0"), k, c.count("steps"));
    b.num("s_curve_k", k);
    for (std::size_t i = 0; i < m.size(); ++i) b.num(idx("m", i), m[i]);
    b.num("s_curve_upper_fixed_point", market::s_curve_upper_fixed_point(k));
    parts.push_back("m_" + std::to_string(m.size() - 1) + " " + format_double(m.back()));
  }
  if (a.has("shadow")) {
    const Reader s = a.object("shadow", {"gamma0", "gamma1", "nu", "institutions"});
    const market::ShadowParams p{s.number("gamma0"), s.number("gamma1"), s.number_or("nu", 1.0)};
    const auto inst = s.numbers("institutions");
    for (std::size_t i = 0; i < inst.size(); ++i) {
      const double g = market::lineage_shadow(inst[i], p);
      b.num(idx("shadow", i), g);
      b.num(idx("shadow_slack", i), 1.0 - g);
    }
    b.num("institutional_floor", market::institutional_floor(p));
  }
  if (a.has("cooperation")) {
    const Reader c = a.object("cooperation", {"temptation", "reward", "punishment", "cost", "benefit", "n"});
    const double t = c.number("temptation"), r = c.number("reward"), p = c.number("punishment");
    b.num("delta_star", market::grim_trigger_threshold(t, r, p));
    b.num("shadow_ceiling", market::shadow_ceiling(t, r, p));
    if (c.has("n")) b.num("n_player_threshold", market::n_player_threshold(c.number("cost"), c.number("benefit"), c.count("n")));
    parts.push_back("delta* " + format_double(market::grim_trigger_threshold(t, r, p)));
  }
  if (a.has("hamilton")) {
    const Reader h = a.object("hamilton", {"benefit", "cost", "relatedness"});
    const double benefit = h.number("benefit"), cost = h.number("cost");
    const auto rs = h.numbers("relatedness");
    if (rs.empty()) h.fail("relatedness", "at least one value is required");
    std::vector<std::string> verdicts;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const bool inv = market::hamilton_invade(rs[i], benefit, cost);
      b.flag(idx("invade", i), inv);
      verdicts.push_back(inv ? "true" : "false");
    }
    parts.push_back("invade (" + join(verdicts, ", ") + ")");
  }
  if (a.has("elite")) {
    const Reader e = a.object("elite", {"weights", "indices"});
    const auto r = market::elite_tipping(e.numbers("weights"), e.numbers("indices"));
    b.num("elite_weighted", r.weighted);
    b.num("elite_unweighted", r.unweighted);
    b.num("elite_covariance", r.covariance);
  }
  if (a.has("discount")) {
    const Reader d = a.object("discount", {"b", "growth", "institutions", "gamma1", "nu"});
    const auto u = market::unify_discounts(d.number("b"), d.number("growth"), d.number("institutions"),
                                           {0.0, d.number("gamma1"), d.number_or("nu", 1.0)});
    b.num("rho_amplifier", u.rho_amplifier);
    b.num("discount_shadow", u.lineage_shadow);
    b.num("delta_eff", u.delta_eff);
  }
  if (a.has("usdi")) {
    const Reader u = a.object("usdi", {"shares", "fitness", "dt"});
    const auto next = market::usdi_step(u.numbers("shares"), u.numbers("fitness"), u.number("dt"));
    for (std::size_t i = 0; i < next.size(); ++i) b.num(idx("usdi_share", i), next[i]);
  }
  std::string prot;
  if (a.has("protection")) add_protection(a, b, prot);
  if (!prot.empty()) parts.push_back(prot);
  if (parts.empty() && !a.has("elite") && !a.has("discount") && !a.has("usdi") && !a.has("shadow"))
    a.fail("tipping", "market analysis has no sections");
  summary = join(parts, ", ");
}

// ---------------------------------------------------------------- governance

std::string move_name(market::ForkMove m) { return m == market::ForkMove::stay ? "stay" : "fork"; }

void run_governance(const nlohmann::json& j, Builder& b, std::string& summary) {
  const Reader a(j, "analysis", {"kind", "thresholds", "umpire", "fork", "protection", "institutions"});
  if (!a.has("thresholds") && !a.has("umpire") && !a.has("fork") && !a.has("protection") &&
      !a.has("institutions"))
    a.fail("thresholds", "governance analysis has no sections");
  std::vector<std::string> parts;
  if (a.has("thresholds")) {
    const Reader t = a.object("thresholds", {"delta_h", "delta_ai", "epsilon", "lambda",
                                             "cost_capture", "cost_maladapt"});
    const auto g = market::governance_thresholds({t.number("delta_h"), t.number("delta_ai"),
                                                  t.number("epsilon"), t.number("lambda"),
                                                  t.number("cost_capture"), t.number("cost_maladapt")});
    b.num("capture_eps_crit", g.capture_eps_crit);
    b.num("coalition_min", g.coalition_min_weight);
    b.num("symbiosis_min", g.symbiosis_min_weight);
    b.num("entrenchment_bits", g.optimal_bits);
    parts.push_back("symbiosis min " + format_double(g.symbiosis_min_weight));
  }
  if (a.has("institutions")) {
    const Reader i = a.object("institutions", {"gamma0", "gamma1", "nu", "investment", "depreciation"});
    const market::ShadowParams p{i.number("gamma0"), i.number("gamma1"), i.number_or("nu", 1.0)};
    const double floor = market::institutional_floor(p);
    b.num("institutional_floor", floor);
    if (i.has("investment")) {
      const double dep = i.number("depreciation");
      if (!(dep > 0.0)) i.fail("depreciation", "must be > 0");
      const double steady = i.number("investment") / dep;
      b.num("institutional_steady_state", steady);
      b.flag("above_floor", steady > floor);
    }
  }
  if (a.has("umpire")) {
    const Reader u = a.object("umpire", {"n", "beta", "endowment"});
    const auto r = market::umpire_game(u.count("n"), u.number("beta"), u.number("endowment"));
    b.num("g_nash", r.g_nash);
    b.num("g_per_lineage", r.g_per_lineage);
    b.num("u_nash", r.u_nash);
    b.flag("nash_at_cap", r.nash_at_cap);
    b.num("g_social_unconstrained", r.g_social_unconstrained);
    b.num("g_social", r.g_social);
    b.flag("social_clipped", r.social_clipped);
    b.num("u_social", r.u_social);
    b.num("efficiency_loss", r.efficiency_loss);
    parts.push_back("Nash G " + format_double(r.g_nash) + ", social G " + format_double(r.g_social));
  }
  if (a.has("fork")) {
    const Reader f = a.object("fork", {"losses", "compensation", "fork_cost", "lineages"});
    const auto ls = f.objects("lineages", {"label", "current", "proposed"});
    if (ls.size() != 2) f.fail("lineages", "the fork game takes exactly two lineages");
    const market::LineageUtility u0{ls[0].string("label"), ls[0].number("current"), ls[0].number("proposed")};
    const market::LineageUtility u1{ls[1].string("label"), ls[1].number("current"), ls[1].number("proposed")};
    const auto r = market::fork_analysis(f.numbers("losses"), f.number("compensation"),
                                         f.number("fork_cost"), u0, u1);
    b.flag("fork_viable", r.fork_viable);
    b.num("total_loss", r.total_loss);
    const char* moves[2] = {"stay", "fork"};
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) {
        const std::string cell = std::string(moves[i]) + "_" + moves[k];
        b.num("payoff_" + u0.label + "_" + cell, r.game.row[i][k]);
        b.num("payoff_" + u1.label + "_" + cell, r.game.col[i][k]);
      }
    std::vector<std::string> eq;
    for (const auto& [m0, m1] : r.equilibria) eq.push_back(move_name(m0) + "/" + move_name(m1));
    b.text("equilibria", join(eq, ";"));
    if (r.pareto_dominant)
      b.text("pareto_dominant", move_name(r.pareto_dominant->first) + "/" + move_name(r.pareto_dominant->second));
    parts.push_back(std::string("fork ") + (r.fork_viable ? "viable" : "not viable") + ", equilibria " + join(eq, ";"));
  }
  std::string prot;
  if (a.has("protection")) add_protection(a, b, prot);
  if (!prot.empty()) parts.push_back(prot);
  summary = join(parts, ", ");
}

// ---------------------------------------------------------------- pdmp

void run_pdmp(const nlohmann::json& j, std::uint64_t seed, Builder& b, std::string& summary) {
  const Reader a(j, "analysis", {"kind", "payoff", "offset", "initial", "entry_order", "innovation_rate",
                                 "entry_mass", "exit_threshold", "foster_c", "horizon", "step",
                                 "sample_dt", "recycle", "stationary"});
  pdmp::PdmpConfig cfg(linear_model(a), a.numbers("initial"));
  if (a.has("entry_order")) cfg.entry_order = a.counts("entry_order");
  cfg.innovation_rate = a.number_or("innovation_rate", cfg.innovation_rate);
  cfg.entry_mass = a.number_or("entry_mass", cfg.entry_mass);
  cfg.exit_threshold = a.number_or("exit_threshold", cfg.exit_threshold);
  cfg.foster_c = a.number_or("foster_c", cfg.foster_c);
  cfg.horizon = a.number_or("horizon", cfg.horizon);
  cfg.step = a.number_or("step", cfg.step);
  cfg.sample_dt = a.number_or("sample_dt", cfg.sample_dt);
  cfg.recycle = a.boolean_or("recycle", cfg.recycle);
  cfg.seed = seed;
  const auto r = pdmp::pdmp_simulate(cfg);
  const auto& model = cfg.model;
  const auto fbar = [&](const std::vector<double>& x) {
    return dynamics::price_decomposition(PopulationState(x, 0.0), model).mean_fitness;
  };
  b.num("innovations", static_cast<double>(r.innovations));
  b.num("extinctions", static_cast<double>(r.extinctions));
  b.flag("pool_exhausted", r.pool_exhausted);
  b.num("mean_fitness_initial", fbar(r.trajectory.states.front()));
  b.num("mean_fitness_final", fbar(r.trajectory.states.back()));
  b.num("active_final", static_cast<double>(r.active_set_size.back()));
  b.num("foster_final", r.foster.back());
  b.num("active_time_average", pdmp::active_set_time_average(r, 0.0, cfg.horizon));
  std::ostringstream ev, tr;
  pdmp::write_events_csv(ev, r);
  pdmp::write_trajectory_csv(tr, r, model);
  b.artifact("events.csv", ev.str());
  b.artifact("trajectory.csv", tr.str());
  summary = std::to_string(r.innovations) + " innovation(s), " + std::to_string(r.extinctions) +
            " extinction(s), |S| " + std::to_string(r.active_set_size.back());
  if (a.has("stationary")) {
    const Reader s = a.object("stationary", {"horizon", "burn_in"});
    const auto st = pdmp::stationary_active_set(cfg, s.number("horizon"), s.number("burn_in"));
    b.num("stationary_mean_active", st.mean_active);
    b.num("stationary_standard_error", st.standard_error);
    b.num("exit_rate_upper", st.exit_hazard);
    b.num("innovation_rate_observed", st.innovation_rate);
    b.flag("eeb_satisfied", st.eeb_satisfied);
    summary += ", stationary |S| " + format_double(st.mean_active);
  }
}

// ---------------------------------------------------------------- voting

void run_voting(const nlohmann::json& j, Builder& b, std::string& summary) {
  const Reader a(j, "analysis", {"kind", "rule", "alternatives", "ballots", "max_k"});
  const auto rule = voting::parse_rule(a.string("rule"));
  voting::Profile p;
  p.alternatives = a.strings("alternatives");
  auto index_of = [&](const std::string& name, const std::string& where) {
    const auto it = std::find(p.alternatives.begin(), p.alternatives.end(), name);
    if (it == p.alternatives.end()) throw ConfigError(where + ": unknown alternative '" + name + "'");
    return static_cast<std::size_t>(it - p.alternatives.begin());
  };
  for (const auto& bl : a.objects("ballots", {"ranking", "count"})) {
    voting::Ballot ballot;
    for (const auto& name : bl.strings("ranking")) ballot.push_back(index_of(name, bl.path() + ".ranking"));
    const std::size_t c = bl.count_or("count", 1);
    for (std::size_t i = 0; i < c; ++i) p.ballots.push_back(ballot);
  }
  p.validate();
  std::optional<std::size_t> max_k;
  if (a.has("max_k")) max_k = a.count("max_k");
  const auto m = voting::spawn_manipulation_search(rule, p, max_k);
  const auto name = [&](std::size_t i) { return p.alternatives[i]; };
  b.text("winner", name(m.old_winner));
  b.num("manipulation_bound", static_cast<double>((p.alternatives.size() - 1) * p.ballots.size()));
  b.flag("manipulable", m.found);
  std::ostringstream rep;
  rep << "rule=" << voting::to_string(rule) << "\nvoters=" << p.ballots.size() << "\nwinner="
      << name(m.old_winner) << "\nfound=" << (m.found ? "true" : "false") << '\n';
  summary = std::string(voting::to_string(rule)) + " winner " + name(m.old_winner);
  if (m.found) {
    std::vector<std::string> order;
    for (std::size_t i : m.ballot) order.push_back(name(i));
    b.num("spawn_count", static_cast<double>(m.k));
    b.text("spawn_ballot", join(order, ">"));
    b.text("new_winner", name(m.new_winner));
    b.flag("certificate_replays", voting::replay(rule, p, m));
    rep << "k=" << m.k << "\nballot=" << join(order, ">") << "\nnew_winner=" << name(m.new_winner) << '\n';
    summary += ", " + std::to_string(m.k) + " spawn(s) of " + join(order, ">") + " elect " + name(m.new_winner);
  } else {
    summary += ", no manipulation found";
  }
  b.artifact("manipulation.txt", rep.str());
}

}  // namespace

AnalysisResult run_analysis(const Scenario& s) {
  const auto& j = s.analysis;
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ConfigError("analysis.kind: expected one of dynamics, frontier, stack, stochastic, hopf, "
                      "market, governance, pdmp, voting");
  AnalysisResult r;
  r.kind = j["kind"].get<std::string>();
  Builder b(r);
  std::string summary;
  if (r.kind == "dynamics") run_dynamics(j, b, summary);
  else if (r.kind == "frontier") run_frontier(j, b, summary);
  else if (r.kind == "stack") run_stack(j, b, summary);
  else if (r.kind == "stochastic") run_stochastic(j, s.seed, b, summary);
  else if (r.kind == "hopf") run_hopf(j, b, summary);
  else if (r.kind == "market") run_market(j, b, summary);
  else if (r.kind == "governance") run_governance(j, b, summary);
  else if (r.kind == "pdmp") run_pdmp(j, s.seed, b, summary);
  else if (r.kind == "voting") run_voting(j, b, summary);
  else throw ConfigError("analysis.kind: unknown analysis kind '" + r.kind + "'");
  r.summary = s.name + " [" + r.kind + "]: " + summary;
  return r;
}

}  // namespace tse::scenario
