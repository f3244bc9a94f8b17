#include "lmsig/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "lmsig/beliefs.h"
#include "lmsig/bid_signal.h"
#include "lmsig/measurement.h"
#include "lmsig/records.h"
#include "lmsig/stats.h"
#include "lmsig/supply.h"
#include "lmsig/win_probability.h"

namespace lmsig {

namespace fs = std::filesystem;

std::string PipelineConfig::path(const std::string& file) const {
  return (fs::path(out_dir) / file).string();
}

namespace {

std::uint64_t stage_seed(const PipelineConfig& cfg, std::string_view name) {
  return Rng::stream(cfg.seed, name).engine()();
}

std::string era_name(Era e) { return e == Era::kPreLlm ? "pre_llm" : "post_llm"; }

Era parse_era(const std::string& s) {
  if (s == "pre_llm") return Era::kPreLlm;
  if (s == "post_llm") return Era::kPostLlm;
  throw SchemaError("config: field 'era' must be pre_llm or post_llm");
}

template <typename T>
void read_opt(const Json& j, const char* key, T& dst) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    dst = it->get<T>();
  } catch (const Json::exception&) {
    throw SchemaError(std::string("config: field '") + key + "' has the wrong type");
  }
}

Json artifact(const PipelineConfig& cfg, const std::string& kind) {
  return {{"schema_version", kSchemaVersion}, {"artifact", kind}, {"seed", cfg.seed}};
}

Json load_artifact(const std::string& path, const std::string& kind) {
  if (!fs::exists(path)) throw StageError("missing input artifact " + path);
  Json j = read_json_file(path);
  check_schema(j, path);
  if (j.value("artifact", std::string()) != kind)
    throw SchemaError(path + ": field 'artifact' is not '" + kind + "'");
  return j;
}

std::vector<ApplicationRecord> load_records(const std::string& path) {
  if (!fs::exists(path)) throw StageError("missing input artifact " + path);
  return read_applications(path);
}

std::vector<ChoiceJob> choice_jobs(const std::vector<ApplicationRecord>& recs,
                                   const BeliefFunction* beliefs) {
  std::vector<ChoiceJob> out;
  for (const auto& [job_id, idx] : group_by_job(recs)) {
    std::vector<ChoiceSlot> slots;
    std::vector<bool> considered, won;
    for (std::size_t i : idx) {
      const auto& r = recs[i];
      if (!r.signal) throw SchemaError(job_id + ": field 'signal' is missing after measurement");
      if (!r.considered) throw SchemaError(job_id + ": field 'considered' is missing");
      ChoiceSlot s{r.group, r.bid, *r.signal, std::nullopt};
      if (beliefs && *r.considered) s.belief = evaluate_belief(*beliefs, *r.signal, r.group);
      slots.push_back(s);
      considered.push_back(*r.considered);
      won.push_back(r.won);
    }
    out.push_back(make_choice_job(job_id, slots, considered, won));
  }
  return out;
}

std::vector<EffortObservation> effort_observations(const std::vector<ApplicationRecord>& recs,
                                                   std::vector<std::size_t>* index) {
  std::vector<EffortObservation> obs;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    if (!r.effort_minutes || !r.signal) continue;
    obs.push_back({r.worker_id, r.group, *r.signal, *r.effort_minutes});
    if (index) index->push_back(i);
  }
  return obs;
}

// ---- stages ----

StageResult stage_simulate(const PipelineConfig& cfg) {
  StageResult res;
  const std::uint64_t seed = stage_seed(cfg, "simulate");
  const Equilibrium eq = solve_generator_equilibrium(cfg.generator, seed);
  const auto jobs = simulate_from(eq, cfg.n_jobs, Rng::stream(seed, "market").engine()(), "job");
  const auto data = records_from_market(jobs, Rng::stream(seed, "clicks").engine()());
  write_applications(cfg.path("applications.jsonl"), data.records);
  write_hidden(cfg.path("hidden.jsonl"), data.hidden);

  std::vector<double> c, a;
  double max_sum_error = 0;
  for (const auto& job : jobs) {
    max_sum_error = std::max(max_sum_error, job.probability_sum_error);
    for (const auto& app : job.applications) c.push_back(app.cost), a.push_back(app.ability);
  }
  Json truth = artifact(cfg, "truth");
  StructuralParams sp;
  sp.alpha_signed = alpha_signed_from_disutility(eq.params.alpha);
  sp.beta = eq.params.beta;
  sp.pi = eq.params.pi;
  sp.t_by_group = eq.params.t_by_group;
  truth["params"] = to_json(sp);
  truth["signal_production"] = to_json(eq.params.signal);
  truth["types"] = to_json(eq.types);
  truth["arrival"] = to_json(eq.arrival);
  truth["consideration_rate"] = cfg.generator.consideration_rate;
  truth["strategy"] = to_json(eq.strategy);
  truth["beliefs"] = to_json(eq.beliefs);
  truth["strategy_change"] = eq.strategy_change;
  truth["sample_corr_cost_ability"] = correlation(c, a);
  truth["max_probability_sum_error"] = max_sum_error;
  truth["diagnostics"] = eq.diagnostics;
  write_json_file(cfg.path("truth.json"), truth);
  res.outputs = {"applications.jsonl", "hidden.jsonl", "truth.json"};
  res.diagnostics = eq.diagnostics;
  return res;
}

StageResult stage_measure(const PipelineConfig& cfg) {
  StageResult res;
  auto recs = load_records(cfg.input.value_or(cfg.path("applications.jsonl")));
  std::map<std::string, int> rejected;
  for (auto& r : recs) {
    // A latent score supplied by the source takes precedence over the rubric.
    if (!r.signal) r.signal = aggregate_signal(r.criteria, r.d_edit);
    const auto m = validate_effort(r.first_view_ms, r.submitted_ms);
    r.effort_minutes = m.minutes;
    r.effort_rejection = m.rejection;
    if (m.rejection) ++rejected[std::string(to_string(*m.rejection))];
  }
  write_applications(cfg.path("measured.jsonl"), recs);
  for (const auto& [k, n] : rejected) res.diagnostics.push_back(k + ": " + std::to_string(n));
  res.outputs = {"measured.jsonl"};
  return res;
}

StageResult stage_consider(const PipelineConfig& cfg) {
  StageResult res;
  auto recs = load_records(cfg.path("measured.jsonl"));
  Json summary = artifact(cfg, "consideration");
  summary["source"] = cfg.consideration_source;
  summary["era"] = era_name(cfg.era);
  std::set<std::string> dropped;
  if (cfg.consideration_source == "simulated") {
    const std::string hidden_path = cfg.hidden.value_or(cfg.path("hidden.jsonl"));
    if (!fs::exists(hidden_path))
      throw StageError("consideration_source 'simulated' needs the sidecar " + hidden_path);
    const auto hidden = read_hidden(hidden_path);
    if (hidden.size() != recs.size()) throw SchemaError(hidden_path + ": record count differs from input");
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (hidden[i].job_id != recs[i].job_id || hidden[i].worker_id != recs[i].worker_id)
        throw SchemaError(hidden_path + ": line " + std::to_string(i + 1) +
                          ": field 'job_id' or 'worker_id' does not match the input");
      recs[i].considered = hidden[i].considered;
    }
  } else if (cfg.consideration_source == "clicks") {
    const auto result = build_consideration_sets(clicks_from_records(recs), cfg.era, cfg.consideration);
    std::map<std::string, const JobConsideration*> by_job;
    for (const auto& jc : result.jobs) by_job[jc.job_id] = &jc;
    dropped.insert(result.dropped_job_ids.begin(), result.dropped_job_ids.end());
    for (const auto& [job_id, idx] : group_by_job(recs)) {
      auto it = by_job.find(job_id);
      if (it == by_job.end()) continue;
      for (std::size_t k = 0; k < idx.size(); ++k) recs[idx[k]].considered = bool(it->second->considered[k]);
    }
    summary["size_percentile"] = result.size_percentile;
    res.diagnostics = result.diagnostics;
  } else {
    throw SchemaError("config: field 'consideration_source' must be 'simulated' or 'clicks'");
  }
  std::vector<ApplicationRecord> kept;
  int considered = 0;
  for (auto& r : recs) {
    if (dropped.count(r.job_id)) continue;
    considered += r.considered.value_or(false);
    kept.push_back(std::move(r));
  }
  write_applications(cfg.path("considered.jsonl"), kept);
  summary["dropped_jobs"] = std::vector<std::string>(dropped.begin(), dropped.end());
  summary["applications"] = kept.size();
  summary["considered_share"] = kept.empty() ? 0.0 : double(considered) / kept.size();
  summary["diagnostics"] = res.diagnostics;
  write_json_file(cfg.path("consideration.json"), summary);
  res.outputs = {"considered.jsonl", "consideration.json"};
  return res;
}

StageResult stage_fit_reduced(const PipelineConfig& cfg) {
  StageResult res;
  const auto recs = load_records(cfg.path("considered.jsonl"));
  const auto fit = fit_reduced_form(choice_jobs(recs, nullptr), std::nullopt, cfg.demand);
  const auto production = estimate_signal_production(effort_observations(recs, nullptr));
  Json j = artifact(cfg, "reduced_form");
  j["params"] = to_json(fit.params);
  j["report"] = to_json(fit.report);
  j["signal_production"] = to_json(production.production);
  j["signal_fixed_effects"] = group_map_json(production.fixed_effects, [](bool b) { return b; });
  j["diagnostics"] = production.diagnostics;
  write_json_file(cfg.path("reduced_form.json"), j);
  if (!fit.report.converged) res.diagnostics.push_back("reduced form: " + fit.report.message);
  res.outputs = {"reduced_form.json"};
  return res;
}

StageResult stage_fit_copula(const PipelineConfig& cfg) {
  StageResult res;
  const auto recs = load_records(cfg.path("considered.jsonl"));
  GroupMap<std::vector<double>> bids;
  for (const auto& r : recs) bids[r.group].push_back(r.bid);
  const auto bins = fit_bid_bins(bids);
  GroupMap<std::vector<std::pair<int, double>>> pairs;
  for (const auto& r : recs) pairs[r.group].push_back({bins.groups.at(r.group).assign(r.bid), *r.signal});
  const auto copula = fit_copula(pairs, bins);
  Json j = artifact(cfg, "copula");
  j["bins"] = to_json(bins);
  j["copula"] = to_json(copula);
  write_json_file(cfg.path("copula.json"), j);
  res.diagnostics = copula.diagnostics;
  res.outputs = {"copula.json"};
  return res;
}

StageResult stage_build_pool(const PipelineConfig& cfg) {
  StageResult res;
  const auto recs = load_records(cfg.path("considered.jsonl"));
  const Json rf = load_artifact(cfg.path("reduced_form.json"), "reduced_form");
  const Json cj = load_artifact(cfg.path("copula.json"), "copula");
  std::vector<Composition> source;
  for (const auto& [job_id, idx] : group_by_job(recs)) {
    Composition c;
    for (std::size_t i : idx) c.push_back({recs[i].group, recs[i].considered.value_or(false)});
    source.push_back(std::move(c));
  }
  Rng rng = Rng::stream(stage_seed(cfg, "build-pool"), "pool");
  const auto pool = build_pool(source, bid_bins_from_json(cj.at("bins")), copula_from_json(cj.at("copula")),
                               reduced_form_from_json(rf.at("params")),
                               signal_production_from_json(rf.at("signal_production")), cfg.pool_size, rng);
  Json j = artifact(cfg, "pool");
  j["pool"] = to_json(pool);
  write_json_file(cfg.path("pool.json"), j);
  res.diagnostics = pool.diagnostics;
  res.outputs = {"pool.json"};
  return res;
}

StageResult stage_invert_supply(const PipelineConfig& cfg) {
  StageResult res;
  auto recs = load_records(cfg.path("considered.jsonl"));
  const SimulationPool pool = pool_from_json(load_artifact(cfg.path("pool.json"), "pool").at("pool"));
  std::vector<std::size_t> index;
  const auto obs = effort_observations(recs, &index);
  const auto production = estimate_signal_production(obs);
  const auto correction = correct_effort(obs, production, cfg.effort_cap);
  std::vector<InversionInput> inputs;
  for (std::size_t k = 0; k < obs.size(); ++k)
    inputs.push_back({obs[k].group, recs[index[k]].bid, correction.corrected_minutes[k]});
  const ExactSurface surface(pool);
  const auto types = invert_focs(surface, inputs);
  std::map<std::string, int> rejects;
  for (auto& r : recs)
    if (r.effort_rejection) {
      r.type_reject = "effort_" + std::string(to_string(*r.effort_rejection));
      ++rejects[r.type_reject];
    }
  int accepted = 0;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    auto& r = recs[index[k]];
    r.effort_corrected = correction.corrected_minutes[k];
    if (types[k].ok()) {
      r.c_hat = types[k].cost;
      r.a_hat = types[k].ability;
      ++accepted;
    } else {
      r.type_reject = types[k].reject_reason;
      ++rejects[r.type_reject];
    }
  }
  write_applications(cfg.path("types.jsonl"), recs);
  Json j = artifact(cfg, "supply");
  j["signal_production"] = to_json(production.production);
  j["v_eta"] = correction.v_eta;
  j["shift_cap"] = correction.cap;
  j["workers"] = correction.workers.size();
  j["accepted"] = accepted;
  j["rejects"] = rejects;
  write_json_file(cfg.path("supply.json"), j);
  for (const auto& [k, n] : rejects) res.diagnostics.push_back(k + ": " + std::to_string(n));
  res.outputs = {"types.jsonl", "supply.json"};
  return res;
}

StageResult stage_fit_beliefs(const PipelineConfig& cfg) {
  StageResult res;
  const auto recs = load_records(cfg.path("types.jsonl"));
  BeliefData data;
  for (const auto& r : recs)
    if (r.a_hat) data[r.group].push_back({*r.signal, *r.a_hat});
  if (data.empty()) throw StageError("fit-beliefs: no recovered abilities in types.jsonl");
  const auto beliefs = fit_beliefs(data, cfg.n_bins);
  Json j = artifact(cfg, "beliefs");
  j["beliefs"] = to_json(beliefs);
  write_json_file(cfg.path("beliefs.json"), j);
  res.diagnostics = beliefs.diagnostics;
  res.outputs = {"beliefs.json"};
  return res;
}

StageResult stage_fit_demand(const PipelineConfig& cfg) {
  StageResult res;
  const auto recs = load_records(cfg.path("types.jsonl"));
  const BeliefFunction beliefs = beliefs_from_json(load_artifact(cfg.path("beliefs.json"), "beliefs").at("beliefs"));
  const auto rf = reduced_form_from_json(load_artifact(cfg.path("reduced_form.json"), "reduced_form").at("params"));
  // Groups without a fitted belief cannot enter the structural likelihood.
  std::vector<ApplicationRecord> usable;
  std::set<std::string> skipped_jobs;
  for (const auto& [job_id, idx] : group_by_job(recs)) {
    const bool ok = std::all_of(idx.begin(), idx.end(), [&](std::size_t i) {
      return !recs[i].considered.value_or(false) || beliefs.groups.count(recs[i].group);
    });
    if (!ok) {
      skipped_jobs.insert(job_id);
      continue;
    }
    for (std::size_t i : idx) usable.push_back(recs[i]);
  }
  StructuralParams init;
  init.alpha_signed = rf.alpha_signed;
  init.pi = rf.pi;
  const auto fit = fit_structural(choice_jobs(usable, &beliefs), init, cfg.demand);
  std::vector<double> mu;
  for (const auto& r : usable) mu.push_back(evaluate_belief(beliefs, *r.signal, r.group));
  Json j = artifact(cfg, "structural");
  j["params"] = to_json(fit.params);
  j["report"] = to_json(fit.report);
  j["wtp_per_sd_ability"] = wtp_per_sd(fit.params.beta, fit.params.alpha_signed, std::sqrt(variance(mu)));
  j["skipped_jobs"] = skipped_jobs.size();
  write_json_file(cfg.path("structural.json"), j);
  if (!fit.report.converged) res.diagnostics.push_back("structural: " + fit.report.message);
  if (!skipped_jobs.empty())
    res.diagnostics.push_back(std::to_string(skipped_jobs.size()) + " jobs skipped: group without belief");
  res.outputs = {"structural.json"};
  return res;
}

// Type distribution with empirical marginals of the recovered types and a
// Gaussian copula correlation from their normal scores.
TypeDistribution recovered_types(const std::vector<ApplicationRecord>& recs,
                                 const std::set<GroupId>& groups, std::vector<std::string>& diag) {
  GroupMap<std::vector<double>> cs, as;
  std::vector<double> all_c, all_a;
  for (const auto& r : recs)
    if (r.c_hat && r.a_hat) {
      cs[r.group].push_back(*r.c_hat);
      as[r.group].push_back(*r.a_hat);
      all_c.push_back(*r.c_hat);
      all_a.push_back(*r.a_hat);
    }
  if (all_c.size() < 2) throw StageError("counterfactual: fewer than two recovered types");
  auto normal_scores_corr = [](const std::vector<double>& x, const std::vector<double>& y) {
    auto zx = pseudo_observations(x), zy = pseudo_observations(y);
    for (auto& v : zx) v = normal_quantile(v);
    for (auto& v : zy) v = normal_quantile(v);
    const double r = correlation(zx, zy);
    return std::isfinite(r) ? r : 0.0;
  };
  TypeDistribution t;
  for (GroupId g : groups) {
    const bool own = cs.count(g) && cs[g].size() >= 2;
    if (!own) diag.push_back("no recovered types in group " + group_label(g) + "; pooled types used");
    const auto& c = own ? cs[g] : all_c;
    const auto& a = own ? as[g] : all_a;
    t.groups[g] = {Marginal::empirical(c), Marginal::empirical(a), normal_scores_corr(c, a)};
  }
  return t;
}

StageResult stage_counterfactual(const PipelineConfig& cfg) {
  StageResult res;
  const auto recs = load_records(cfg.path("types.jsonl"));
  const auto sp = structural_from_json(load_artifact(cfg.path("structural.json"), "structural").at("params"));
  const BeliefFunction beliefs = beliefs_from_json(load_artifact(cfg.path("beliefs.json"), "beliefs").at("beliefs"));
  const auto production = signal_production_from_json(
      load_artifact(cfg.path("reduced_form.json"), "reduced_form").at("signal_production"));

  ArrivalDistribution arrival;
  std::set<GroupId> groups;
  GroupMap<double> n_apps, n_considered, a_sum, a_count;
  GroupMap<std::vector<Donor>> donors;
  int data_hires = 0, n_jobs = 0;
  for (const auto& [job_id, idx] : group_by_job(recs)) {
    GroupMap<int> comp;
    ++n_jobs;
    for (std::size_t i : idx) {
      const auto& r = recs[i];
      ++comp[r.group];
      groups.insert(r.group);
      n_apps[r.group] += 1;
      n_considered[r.group] += r.considered.value_or(false);
      data_hires += r.won;
      if (r.c_hat && r.a_hat) {
        a_sum[r.group] += *r.a_hat;
        a_count[r.group] += 1;
        donors[r.group].push_back({*r.c_hat, *r.a_hat, r.bid, r.effort_corrected.value_or(kEffortFloor)});
      }
    }
    arrival.compositions.push_back(std::move(comp));
  }
  if (n_jobs == 0) throw StageError("counterfactual: no jobs in types.jsonl");
  arrival.weights.assign(arrival.compositions.size(), 1.0 / double(arrival.compositions.size()));
  ConsiderationRates consideration;
  consideration.default_rate = 0.0;
  for (GroupId g : groups) consideration.rate[g] = n_considered[g] / n_apps[g];

  const TypeDistribution types = recovered_types(recs, groups, res.diagnostics);
  GroupMap<double> means;
  double pooled_sum = 0, pooled_n = 0;
  for (const auto& [g, s] : a_sum) pooled_sum += s, pooled_n += a_count[g];
  for (GroupId g : groups) means[g] = a_count[g] > 0 ? a_sum[g] / a_count[g] : pooled_sum / pooled_n;

  StructuralParams params = sp;
  for (GroupId g : groups)
    if (!params.t_by_group.count(g)) params.t_by_group[g] = 0.0;
  ModelParams mp = market_params(params, production);
  for (GroupId g : groups)
    if (!mp.signal.count(g)) throw StageError("counterfactual: no signal production for " + group_label(g));

  SolverConfig solver = cfg.solver;
  solver.seed = stage_seed(cfg, "counterfactual-solver");
  const auto ns = solve_ns_equilibrium(types, arrival, consideration, params, means, solver);
  const auto fi = solve_fi_equilibrium(types, arrival, consideration, params, solver);
  for (const auto* sol : {&ns, &fi}) {
    if (!sol->report.converged) res.diagnostics.push_back(sol->report.diagnostic);
    if (!sol->alternative_report.converged) res.diagnostics.push_back(sol->alternative_report.diagnostic);
    if (sol->start_gap > cfg.solver.tol)
      res.diagnostics.push_back("starting points reach different fixed points (max gap " +
                                std::to_string(sol->start_gap) + ")");
  }

  const std::uint64_t market_seed = stage_seed(cfg, "counterfactual-market");
  const DonorStrategy donor(donors);
  auto sq = simulate_sq(donor, beliefs, mp, arrival, types, consideration, cfg.counterfactual_jobs, market_seed);
  res.diagnostics.insert(res.diagnostics.end(), sq.diagnostics.begin(), sq.diagnostics.end());
  const QuintileCuts cuts = quintile_cuts(sq.jobs);
  MarketOptions opts;
  opts.job_prefix = "ns";
  const auto ns_jobs = simulate_market(cfg.counterfactual_jobs, arrival, types, ns.strategy, mp, consideration,
                                       group_mean_view(means), market_seed, opts);
  opts.job_prefix = "fi";
  const auto fi_jobs = simulate_market(cfg.counterfactual_jobs, arrival, types, fi.strategy, mp, consideration,
                                       true_ability_view(), market_seed, opts);
  const auto ns_report = welfare_report(ns_jobs, mp, Scenario::kNoSignaling, cuts);
  const auto fi_report = welfare_report(fi_jobs, mp, Scenario::kFullInformation, cuts);
  if (fi_report.total_surplus < ns_report.total_surplus)
    res.diagnostics.push_back("full-information total surplus below no-signaling on the same draws");

  double max_sum_error = 0;
  for (const auto* jobs : {&std::as_const(sq.jobs), &ns_jobs, &fi_jobs})
    for (const auto& job : *jobs) max_sum_error = std::max(max_sum_error, job.probability_sum_error);

  Json j = artifact(cfg, "counterfactual");
  j["scenarios"] = {{"SQ", to_json(sq.report)}, {"NS", to_json(ns_report)}, {"FI", to_json(fi_report)}};
  auto solution = [](const EquilibriumSolution& s) {
    return Json{{"convergence", to_json(s.report)}, {"alternative_convergence", to_json(s.alternative_report)},
                {"start_gap", s.start_gap}, {"strategy", to_json(s.strategy)},
                {"alternative_strategy", to_json(s.alternative)}};
  };
  j["ns"] = solution(ns);
  j["fi"] = solution(fi);
  j["hire_rate_change_ns"] = to_json(percent_change(sq.report.hire_rate, ns_report.hire_rate));
  j["hire_rate_change_fi"] = to_json(percent_change(sq.report.hire_rate, fi_report.hire_rate));
  j["quintile_cuts"] = {{"ability", cuts.ability}, {"cost", cuts.cost}};
  j["group_means"] = group_map_json(means, [](double v) { return v; });
  j["types"] = to_json(types);
  j["data_hiring_rate"] = double(data_hires) / n_jobs;
  j["max_probability_sum_error"] = max_sum_error;
  j["diagnostics"] = res.diagnostics;
  write_json_file(cfg.path("counterfactual.json"), j);
  res.outputs = {"counterfactual.json"};
  return res;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string matrix_csv(const Json& m) {
  std::string s = "ability_quintile,cost_q1,cost_q2,cost_q3,cost_q4,cost_q5\n";
  for (int i = 0; i < 5; ++i) {
    s += std::to_string(i + 1);
    for (int k = 0; k < 5; ++k) s += "," + fmt(m.at(i).at(k).get<double>());
    s += "\n";
  }
  return s;
}

StageResult stage_report(const PipelineConfig& cfg) {
  StageResult res;
  const Json cf = load_artifact(cfg.path("counterfactual.json"), "counterfactual");
  const Json st = load_artifact(cfg.path("structural.json"), "structural");
  const Json rf = load_artifact(cfg.path("reduced_form.json"), "reduced_form");
  const auto recs = load_records(cfg.path("types.jsonl"));
  const fs::path dir = fs::path(cfg.out_dir) / "report";
  fs::create_directories(dir);

  write_text((dir / "hire_rate_change_ns.csv").string(), matrix_csv(cf.at("hire_rate_change_ns")));
  write_text((dir / "hire_rate_change_fi.csv").string(), matrix_csv(cf.at("hire_rate_change_fi")));

  std::string surplus = "scenario,worker_surplus,employer_surplus,total_surplus,writing_costs,hiring_rate,"
                        "conditional_hiring_rate,mean_winning_bid\n";
  std::string cells = "scenario,ability_quintile,cost_quintile,applicants,hire_rate,hired_share\n";
  std::string series = "scenario,dimension,quintile,hire_rate\n";
  for (const char* s : {"SQ", "NS", "FI"}) {
    const Json& r = cf.at("scenarios").at(s);
    surplus += std::string(s);
    for (const char* k : {"worker_surplus", "employer_surplus", "total_surplus", "writing_costs", "hiring_rate",
                          "conditional_hiring_rate", "mean_winning_bid"})
      surplus += "," + fmt(r.at(k).get<double>());
    surplus += "\n";
    for (int i = 0; i < 5; ++i) {
      for (int k = 0; k < 5; ++k)
        cells += std::string(s) + "," + std::to_string(i + 1) + "," + std::to_string(k + 1) + "," +
                 fmt(r.at("applicants").at(i).at(k).get<double>()) + "," +
                 fmt(r.at("hire_rate").at(i).at(k).get<double>()) + "," +
                 fmt(r.at("hired_share").at(i).at(k).get<double>()) + "\n";
      series += std::string(s) + ",ability," + std::to_string(i + 1) + "," +
                fmt(r.at("ability_hire_rate").at(i).get<double>()) + "\n";
      series += std::string(s) + ",cost," + std::to_string(i + 1) + "," +
                fmt(r.at("cost_hire_rate").at(i).get<double>()) + "\n";
    }
  }
  write_text((dir / "surplus.csv").string(), surplus);
  write_text((dir / "hire_rate_cells.csv").string(), cells);
  write_text((dir / "quintile_hire_rates.csv").string(), series);

  // Dollar value of one standard deviation: signal per group from the reduced
  // form, ability from the structural fit.
  const auto rfp = reduced_form_from_json(rf.at("params"));
  GroupMap<std::vector<double>> signals;
  std::vector<double> mu;
  for (const auto& r : recs) signals[r.group].push_back(*r.signal);
  std::string wtp = "variable,group,coefficient,sd,wtp_per_sd\n";
  for (const auto& [g, s] : signals) {
    auto it = rfp.gamma_lambda.find(g);
    if (it == rfp.gamma_lambda.end()) continue;
    const double sd = std::sqrt(variance(s));
    wtp += "signal," + group_label(g) + "," + fmt(it->second) + "," + fmt(sd) + "," +
           fmt(wtp_per_sd(it->second, rfp.alpha_signed, sd)) + "\n";
  }
  wtp += "ability,all," + fmt(st.at("params").at("beta").get<double>()) + ",," +
         fmt(st.at("wtp_per_sd_ability").get<double>()) + "\n";
  write_text((dir / "wtp.csv").string(), wtp);

  Json summary = artifact(cfg, "report");
  const Json& est = st.at("params");
  summary["estimates"] = est;
  summary["standard_errors"] = st.at("report").at("standard_errors");
  if (fs::exists(cfg.path("truth.json"))) {
    const Json truth = load_artifact(cfg.path("truth.json"), "truth");
    const Json& tp = truth.at("params");
    const double a = tp.at("alpha_signed"), b = tp.at("beta"), p = tp.at("pi");
    summary["truth"] = tp;
    summary["recovery"] = {
        {"alpha_relative_error", std::abs(est.at("alpha_signed").get<double>() - a) / std::abs(a)},
        {"beta_relative_error", std::abs(est.at("beta").get<double>() - b) / std::abs(b)},
        {"pi_abs_error_pp", 100 * std::abs(est.at("pi").get<double>() - p)}};
  }
  const std::string hidden_path = cfg.hidden.value_or(cfg.path("hidden.jsonl"));
  if (fs::exists(hidden_path)) {
    const auto hidden = read_hidden(hidden_path);
    std::map<std::pair<std::string, std::string>, const HiddenRecord*> by_key;
    for (const auto& h : hidden) by_key[{h.job_id, h.worker_id}] = &h;
    std::vector<double> ce, ae;
    for (const auto& r : recs) {
      auto it = by_key.find({r.job_id, r.worker_id});
      if (it == by_key.end() || !r.c_hat) continue;
      ce.push_back(*r.c_hat - it->second->cost);
      ae.push_back(*r.a_hat - it->second->ability);
    }
    if (!ce.empty())
      summary["type_recovery"] = {{"n", ce.size()}, {"cost_error_mean", mean(ce)},
                                  {"cost_error_sd", std::sqrt(variance(ce))}, {"ability_error_mean", mean(ae)},
                                  {"ability_error_sd", std::sqrt(variance(ae))}};
  }
  summary["counterfactual"] = {{"ns_converged", cf.at("ns").at("convergence").at("converged")},
                               {"fi_converged", cf.at("fi").at("convergence").at("converged")},
                               {"diagnostics", cf.at("diagnostics")}};
  write_json_file((dir / "summary.json").string(), summary);
  res.outputs = {"report/hire_rate_change_ns.csv", "report/hire_rate_change_fi.csv", "report/surplus.csv",
                 "report/hire_rate_cells.csv", "report/quintile_hire_rates.csv", "report/wtp.csv",
                 "report/summary.json"};
  return res;
}

using StageFn = StageResult (*)(const PipelineConfig&);

struct StageSpec {
  const char* name;
  StageFn fn;
  std::vector<std::string> inputs;  // relative to out_dir, hashed into the manifest
};

const std::vector<StageSpec>& stage_table() {
  static const std::vector<StageSpec> table = {
      {"simulate", stage_simulate, {}},
      {"measure", stage_measure, {"applications.jsonl"}},
      {"consider", stage_consider, {"measured.jsonl", "hidden.jsonl"}},
      {"fit-reduced", stage_fit_reduced, {"considered.jsonl"}},
      {"fit-copula", stage_fit_copula, {"considered.jsonl"}},
      {"build-pool", stage_build_pool, {"considered.jsonl", "reduced_form.json", "copula.json"}},
      {"invert-supply", stage_invert_supply, {"considered.jsonl", "pool.json"}},
      {"fit-beliefs", stage_fit_beliefs, {"types.jsonl"}},
      {"fit-demand", stage_fit_demand, {"types.jsonl", "beliefs.json", "reduced_form.json"}},
      {"counterfactual", stage_counterfactual,
       {"types.jsonl", "structural.json", "beliefs.json", "reduced_form.json"}},
      {"report", stage_report, {"counterfactual.json", "structural.json", "reduced_form.json", "types.jsonl"}},
  };
  return table;
}

}  // namespace

Json PipelineConfig::to_json() const {
  Json gen = {{"n_jobs", n_jobs},
              {"alpha", generator.alpha},
              {"beta", generator.beta},
              {"pi", generator.pi},
              {"t", generator.t},
              {"cost", lmsig::to_json(generator.cost)},
              {"ability", lmsig::to_json(generator.ability)},
              {"cost_ability_rho", generator.cost_ability_rho},
              {"consideration_rate", generator.consideration_rate},
              {"mean_applications", generator.mean_applications},
              {"n_compositions", generator.n_compositions},
              {"efficiency_sd", generator.efficiency_sd},
              {"round_share", generator.round_share},
              {"round_step", generator.round_step},
              {"iterations", generator.iterations},
              {"damping", generator.damping},
              {"pool_jobs", generator.pool_jobs},
              {"belief_jobs", generator.belief_jobs},
              {"workers_per_group", generator.workers_per_group}};
  Json groups = Json::array();
  for (GroupId g : generator.groups) groups.push_back(group_label(g));
  gen["groups"] = groups;
  Json j = {{"schema_version", kSchemaVersion},
            {"seed", seed},
            {"out", out_dir},
            {"stages", stages},
            {"era", era_name(era)},
            {"simulate", gen},
            {"consideration_source", consideration_source},
            {"max_set_size", consideration.max_set_size},
            {"pool_size", pool_size},
            {"n_bins", n_bins},
            {"effort_cap", effort_cap},
            {"demand", {{"grad_tol", demand.grad_tol}, {"max_iter", demand.max_iter}}},
            {"solver",
             {{"tol", solver.tol}, {"damping", solver.damping}, {"max_iter", solver.max_iter},
              {"pool_jobs", solver.pool_jobs}, {"cost_nodes", solver.cost_nodes},
              {"fi_nodes", solver.fi_nodes}, {"bid_step", solver.bid_step}}},
            {"counterfactual_jobs", counterfactual_jobs}};
  if (input) j["input"] = *input;
  if (hidden) j["hidden"] = *hidden;
  if (consideration.size_percentile_override) j["size_percentile"] = *consideration.size_percentile_override;
  return j;
}

PipelineConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("config: not a JSON object");
  check_schema(j, "config");
  static const std::set<std::string> known = {
      "schema_version", "seed", "out", "stages", "input", "hidden", "era", "simulate",
      "consideration_source", "max_set_size", "size_percentile", "pool_size", "n_bins",
      "effort_cap", "demand", "solver", "counterfactual_jobs"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw SchemaError("config: field '" + k + "' is not recognized");
  PipelineConfig c;
  read_opt(j, "seed", c.seed);
  read_opt(j, "out", c.out_dir);
  read_opt(j, "stages", c.stages);
  for (const auto& s : c.stages)
    if (std::find(stage_names().begin(), stage_names().end(), s) == stage_names().end())
      throw SchemaError("config: field 'stages' names unknown stage '" + s + "'");
  if (j.contains("input")) c.input = j.at("input").get<std::string>();
  if (j.contains("hidden")) c.hidden = j.at("hidden").get<std::string>();
  if (j.contains("era")) c.era = parse_era(j.at("era").get<std::string>());
  if (j.contains("simulate")) {
    const Json& s = j.at("simulate");
    auto& g = c.generator;
    read_opt(s, "n_jobs", c.n_jobs);
    read_opt(s, "alpha", g.alpha);
    read_opt(s, "beta", g.beta);
    read_opt(s, "pi", g.pi);
    read_opt(s, "t", g.t);
    if (s.contains("cost")) g.cost = marginal_from_json(s.at("cost"));
    if (s.contains("ability")) g.ability = marginal_from_json(s.at("ability"));
    read_opt(s, "cost_ability_rho", g.cost_ability_rho);
    read_opt(s, "consideration_rate", g.consideration_rate);
    read_opt(s, "mean_applications", g.mean_applications);
    read_opt(s, "n_compositions", g.n_compositions);
    read_opt(s, "efficiency_sd", g.efficiency_sd);
    read_opt(s, "round_share", g.round_share);
    read_opt(s, "round_step", g.round_step);
    read_opt(s, "iterations", g.iterations);
    read_opt(s, "damping", g.damping);
    read_opt(s, "pool_jobs", g.pool_jobs);
    read_opt(s, "belief_jobs", g.belief_jobs);
    read_opt(s, "workers_per_group", g.workers_per_group);
    if (s.contains("groups")) {
      g.groups.clear();
      for (const auto& label : s.at("groups")) {
        try {
          g.groups.push_back(parse_group_label(label.get<std::string>()));
        } catch (const std::exception&) {
          throw SchemaError("config: field 'simulate.groups' has an invalid group " + label.dump());
        }
      }
    }
  }
  read_opt(j, "consideration_source", c.consideration_source);
  if (c.consideration_source != "simulated" && c.consideration_source != "clicks")
    throw SchemaError("config: field 'consideration_source' must be 'simulated' or 'clicks'");
  read_opt(j, "max_set_size", c.consideration.max_set_size);
  if (j.contains("size_percentile")) c.consideration.size_percentile_override = j.at("size_percentile").get<int>();
  read_opt(j, "pool_size", c.pool_size);
  read_opt(j, "n_bins", c.n_bins);
  read_opt(j, "effort_cap", c.effort_cap);
  if (j.contains("demand")) {
    read_opt(j.at("demand"), "grad_tol", c.demand.grad_tol);
    read_opt(j.at("demand"), "max_iter", c.demand.max_iter);
  }
  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    read_opt(s, "tol", c.solver.tol);
    read_opt(s, "damping", c.solver.damping);
    read_opt(s, "max_iter", c.solver.max_iter);
    read_opt(s, "pool_jobs", c.solver.pool_jobs);
    read_opt(s, "cost_nodes", c.solver.cost_nodes);
    read_opt(s, "fi_nodes", c.solver.fi_nodes);
    read_opt(s, "bid_step", c.solver.bid_step);
  }
  read_opt(j, "counterfactual_jobs", c.counterfactual_jobs);
  if (c.pool_size < 1) throw SchemaError("config: field 'pool_size' must be positive");
  if (c.n_jobs < 1) throw SchemaError("config: field 'simulate.n_jobs' must be positive");
  return c;
}

PipelineConfig load_config(const std::string& path) {
  if (!fs::exists(path)) throw StageError("config file not found: " + path);
  return config_from_json(read_json_file(path));
}

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& s : stage_table()) v.push_back(s.name);
    return v;
  }();
  return names;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t h = kFnvOffset;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  return h;
}

std::string hex64(std::uint64_t x) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << x;
  return os.str();
}

StageResult run_stage(const std::string& name, const PipelineConfig& cfg) {
  const auto& table = stage_table();
  auto it = std::find_if(table.begin(), table.end(), [&](const StageSpec& s) { return name == s.name; });
  if (it == table.end()) throw StageError("unknown stage '" + name + "'");
  fs::create_directories(cfg.out_dir);

  Json inputs = Json::object();
  for (const auto& in : it->inputs) {
    std::string p = cfg.path(in);
    if (in == "applications.jsonl" && cfg.input) p = *cfg.input;
    if (in == "hidden.jsonl") {
      if (cfg.hidden) p = *cfg.hidden;
      if (cfg.consideration_source != "simulated" && !fs::exists(p)) continue;
    }
    if (!fs::exists(p)) throw StageError("stage " + name + ": missing input artifact " + p);
    inputs[in] = hex64(fnv1a_file(p));
  }

  const auto t0 = std::chrono::steady_clock::now();
  StageResult res = it->fn(cfg);
  res.stage = name;
  res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Json outputs = Json::object();
  for (const auto& out : res.outputs) outputs[out] = hex64(fnv1a_file(cfg.path(out)));
  const Json line = {{"stage", name},
                     {"seed", cfg.seed},
                     {"config", hex64(fnv1a(cfg.to_json().dump()))},
                     {"inputs", inputs},
                     {"outputs", outputs},
                     {"wall_time_s", res.wall_time_s}};
  std::ofstream manifest(cfg.path("manifest.jsonl"), std::ios::app);
  manifest << line.dump() << '\n';
  return res;
}

std::vector<StageResult> run_pipeline(const PipelineConfig& cfg) {
  std::vector<StageResult> out;
  for (const auto& s : cfg.stages.empty() ? stage_names() : cfg.stages) out.push_back(run_stage(s, cfg));
  return out;
}

}  // namespace lmsig
