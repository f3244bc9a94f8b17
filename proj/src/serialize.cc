#include "lmsig/serialize.h"

#include <fstream>
#include <sstream>

#include "lmsig/records.h"

namespace lmsig {
namespace {

template <typename T>
T field(const Json& j, const char* name, const std::string& what) {
  auto it = j.find(name);
  if (it == j.end()) throw SchemaError(what + ": field '" + name + "' is missing");
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw SchemaError(what + ": field '" + name + "' has the wrong type");
  }
}

Json doubles(const GroupMap<double>& m) {
  return group_map_json(m, [](double v) { return v; });
}

// Collects "<prefix>/<group>" keys of a flat parameter object.
GroupMap<double> prefixed(const Json& j, const std::string& prefix) {
  GroupMap<double> out;
  for (const auto& [k, v] : j.items())
    if (k.rfind(prefix + "/", 0) == 0) out[parse_group_label(k.substr(prefix.size() + 1))] = v.get<double>();
  return out;
}

}  // namespace

Json to_json(const ReducedFormParams& p) {
  Json j = Json::object();
  j["alpha_signed"] = p.alpha_signed;
  j["pi"] = p.pi;
  for (const auto& [g, v] : p.k_lambda) j["K_lambda/" + group_label(g)] = v;
  for (const auto& [g, v] : p.gamma_lambda) j["gamma_lambda/" + group_label(g)] = v;
  return j;
}

ReducedFormParams reduced_form_from_json(const Json& j) {
  ReducedFormParams p;
  p.alpha_signed = field<double>(j, "alpha_signed", "reduced form");
  p.pi = field<double>(j, "pi", "reduced form");
  p.k_lambda = prefixed(j, "K_lambda");
  p.gamma_lambda = prefixed(j, "gamma_lambda");
  return p;
}

Json to_json(const StructuralParams& p) {
  Json j = Json::object();
  j["alpha_signed"] = p.alpha_signed;
  j["beta"] = p.beta;
  j["pi"] = p.pi;
  for (const auto& [g, v] : p.t_by_group) j["T/" + group_label(g)] = v;
  return j;
}

StructuralParams structural_from_json(const Json& j) {
  StructuralParams p;
  p.alpha_signed = field<double>(j, "alpha_signed", "structural parameters");
  p.beta = field<double>(j, "beta", "structural parameters");
  p.pi = field<double>(j, "pi", "structural parameters");
  p.t_by_group = prefixed(j, "T");
  return p;
}

Json to_json(const FitReport& r) {
  Json est = Json::object(), se = Json::object();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    est[r.names[i]] = r.estimates[i];
    se[r.names[i]] = i < r.standard_errors.size() ? r.standard_errors[i] : 0.0;
  }
  return {{"converged", r.converged}, {"iterations", r.iterations}, {"loglik", r.loglik},
          {"grad_sup_norm", r.grad_sup_norm}, {"message", r.message}, {"estimates", est},
          {"standard_errors", se}};
}

Json to_json(const GroupMap<SignalProduction>& m) {
  return group_map_json(m, [](const SignalProduction& sp) {
    return Json{{"K", sp.k}, {"gamma", sp.gamma}, {"noise_var", sp.noise_var}};
  });
}

GroupMap<SignalProduction> signal_production_from_json(const Json& j) {
  return group_map_from<SignalProduction>(j, [](const Json& v) {
    return SignalProduction{field<double>(v, "K", "signal production"),
                            field<double>(v, "gamma", "signal production"),
                            field<double>(v, "noise_var", "signal production")};
  });
}

Json to_json(const BidBinModel& m) {
  Json groups = group_map_json(m.groups, [](const GroupBidBins& gb) {
    Json bins = Json::array();
    for (const auto& b : gb.bins)
      bins.push_back({{"center", b.center}, {"mass", b.mass}, {"deviation_freq", b.deviation_freq},
                      {"lo", b.lo}, {"hi", b.hi}});
    return Json{{"bins", bins}, {"n_obs", gb.n_obs}, {"sparse", gb.sparse}};
  });
  return {{"groups", groups}, {"diagnostics", m.diagnostics}};
}

BidBinModel bid_bins_from_json(const Json& j) {
  BidBinModel m;
  m.groups = group_map_from<GroupBidBins>(field<Json>(j, "groups", "bid bins"), [](const Json& v) {
    GroupBidBins gb;
    for (const auto& b : field<Json>(v, "bins", "bid bins"))
      gb.bins.push_back({b.at("center").get<double>(), b.at("mass").get<double>(),
                         b.at("deviation_freq").get<double>(), b.at("lo").get<double>(),
                         b.at("hi").get<double>()});
    gb.n_obs = field<int>(v, "n_obs", "bid bins");
    gb.sparse = field<bool>(v, "sparse", "bid bins");
    return gb;
  });
  m.diagnostics = j.value("diagnostics", std::vector<std::string>{});
  return m;
}

Json to_json(const CopulaModel& m) {
  Json groups = group_map_json(m.groups, [](const GroupCopula& c) {
    Json pooled = Json::array();
    for (GroupId g : c.pooled_with) pooled.push_back(group_label(g));
    return Json{{"rho", c.fit.rho}, {"dof", c.fit.dof}, {"loglik", c.fit.loglik},
                {"independent", c.fit.independent}, {"bin_cdf", c.bin_cdf},
                {"signals", c.sorted_signals}, {"pooled_with", pooled}};
  });
  return {{"groups", groups}, {"diagnostics", m.diagnostics}};
}

CopulaModel copula_from_json(const Json& j) {
  CopulaModel m;
  m.groups = group_map_from<GroupCopula>(field<Json>(j, "groups", "copula"), [](const Json& v) {
    GroupCopula c;
    c.fit.rho = field<double>(v, "rho", "copula");
    c.fit.dof = field<double>(v, "dof", "copula");
    c.fit.loglik = field<double>(v, "loglik", "copula");
    c.fit.independent = field<bool>(v, "independent", "copula");
    c.bin_cdf = field<std::vector<double>>(v, "bin_cdf", "copula");
    c.sorted_signals = field<std::vector<double>>(v, "signals", "copula");
    for (const auto& g : field<std::vector<std::string>>(v, "pooled_with", "copula"))
      c.pooled_with.push_back(parse_group_label(g));
    return c;
  });
  m.diagnostics = j.value("diagnostics", std::vector<std::string>{});
  return m;
}

Json to_json(const SimulationPool& pool) {
  if (!pool.index.is_linear()) throw std::invalid_argument("only linear-index pools are stored");
  Json slots = group_map_json(pool.slots, [](const std::vector<PoolSlot>& v) {
    std::vector<int> considered;
    std::vector<double> others, noise;
    for (const auto& s : v) {
      considered.push_back(s.considered ? 1 : 0);
      others.push_back(s.delta_others);
      noise.push_back(s.noise);
    }
    return Json{{"considered", considered}, {"delta_others", others}, {"noise", noise}};
  });
  return {{"alpha_signed", pool.alpha_signed}, {"pi", pool.pi}, {"n_jobs", pool.n_jobs},
          {"index_k", doubles(*pool.index.k)}, {"index_gamma", doubles(*pool.index.gamma)},
          {"signal", to_json(pool.signal)}, {"slots", slots}, {"diagnostics", pool.diagnostics}};
}

SimulationPool pool_from_json(const Json& j) {
  const std::string what = "pool";
  SimulationPool pool;
  pool.alpha_signed = field<double>(j, "alpha_signed", what);
  pool.pi = field<double>(j, "pi", what);
  pool.n_jobs = field<int>(j, "n_jobs", what);
  auto as_doubles = [](const Json& v) { return v.get<double>(); };
  pool.index = SignalIndex::linear(group_map_from<double>(field<Json>(j, "index_k", what), as_doubles),
                                   group_map_from<double>(field<Json>(j, "index_gamma", what), as_doubles));
  pool.signal = signal_production_from_json(field<Json>(j, "signal", what));
  pool.slots = group_map_from<std::vector<PoolSlot>>(field<Json>(j, "slots", what), [&](const Json& v) {
    const auto c = field<std::vector<int>>(v, "considered", what);
    const auto d = field<std::vector<double>>(v, "delta_others", what);
    const auto n = field<std::vector<double>>(v, "noise", what);
    if (c.size() != d.size() || c.size() != n.size())
      throw SchemaError("pool: slot arrays differ in length");
    std::vector<PoolSlot> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = {c[i] != 0, d[i], n[i]};
    return out;
  });
  pool.diagnostics = j.value("diagnostics", std::vector<std::string>{});
  pool.prepare();
  return pool;
}

Json to_json(const BeliefFunction& f) {
  Json groups = group_map_json(f.groups, [](const GroupBelief& b) {
    return Json{{"knot_signal", b.knot_signal}, {"knot_ability", b.knot_ability},
                {"knot_weight", b.knot_weight}, {"curve_x", b.curve.x()},
                {"curve_y", b.curve.y()}, {"n_bins", b.n_bins}, {"reduced_bins", b.reduced_bins}};
  });
  return {{"groups", groups}, {"diagnostics", f.diagnostics}};
}

BeliefFunction beliefs_from_json(const Json& j) {
  BeliefFunction f;
  f.groups = group_map_from<GroupBelief>(field<Json>(j, "groups", "beliefs"), [](const Json& v) {
    GroupBelief b;
    b.knot_signal = field<std::vector<double>>(v, "knot_signal", "beliefs");
    b.knot_ability = field<std::vector<double>>(v, "knot_ability", "beliefs");
    b.knot_weight = field<std::vector<double>>(v, "knot_weight", "beliefs");
    b.curve = MonotoneCubic(field<std::vector<double>>(v, "curve_x", "beliefs"),
                            field<std::vector<double>>(v, "curve_y", "beliefs"));
    b.n_bins = field<int>(v, "n_bins", "beliefs");
    b.reduced_bins = field<bool>(v, "reduced_bins", "beliefs");
    return b;
  });
  f.diagnostics = j.value("diagnostics", std::vector<std::string>{});
  return f;
}

Json to_json(const ArrivalDistribution& a) {
  Json comps = Json::array();
  for (const auto& c : a.compositions) comps.push_back(group_map_json(c, [](int n) { return n; }));
  return {{"compositions", comps}, {"weights", a.weights}};
}

ArrivalDistribution arrival_from_json(const Json& j) {
  ArrivalDistribution a;
  for (const auto& c : field<Json>(j, "compositions", "arrival"))
    a.compositions.push_back(group_map_from<int>(c, [](const Json& v) { return v.get<int>(); }));
  a.weights = field<std::vector<double>>(j, "weights", "arrival");
  a.validate();
  return a;
}

Json to_json(const Marginal& m) {
  if (m.kind == Marginal::Kind::kEmpirical) return {{"kind", "empirical"}, {"values", m.values}};
  return {{"kind", "normal"}, {"mean", m.mean}, {"sd", m.sd}, {"lo", m.lo}, {"hi", m.hi}};
}

Marginal marginal_from_json(const Json& j) {
  const auto kind = field<std::string>(j, "kind", "marginal");
  if (kind == "empirical") return Marginal::empirical(field<std::vector<double>>(j, "values", "marginal"));
  if (kind == "normal")
    return Marginal::normal(field<double>(j, "mean", "marginal"), field<double>(j, "sd", "marginal"),
                            field<double>(j, "lo", "marginal"), field<double>(j, "hi", "marginal"));
  throw SchemaError("marginal: field 'kind' has an unknown value");
}

Json to_json(const TypeDistribution& t) {
  return group_map_json(t.groups, [](const GroupTypeDistribution& d) {
    return Json{{"cost", to_json(d.cost)}, {"ability", to_json(d.ability)}, {"rho", d.rho}};
  });
}

TypeDistribution types_from_json(const Json& j) {
  TypeDistribution t;
  t.groups = group_map_from<GroupTypeDistribution>(j, [](const Json& v) {
    return GroupTypeDistribution{marginal_from_json(field<Json>(v, "cost", "types")),
                                 marginal_from_json(field<Json>(v, "ability", "types")),
                                 field<double>(v, "rho", "types")};
  });
  return t;
}

Json to_json(const StrategyProfile& s) {
  return group_map_json(s.groups, [](const GroupStrategy& g) {
    return Json{{"cost_nodes", g.cost_nodes}, {"ability_nodes", g.ability_nodes},
                {"bid", g.bid}, {"effort", g.effort}};
  });
}

StrategyProfile strategy_from_json(const Json& j) {
  StrategyProfile s;
  s.groups = group_map_from<GroupStrategy>(j, [](const Json& v) {
    GroupStrategy g;
    g.cost_nodes = field<std::vector<double>>(v, "cost_nodes", "strategy");
    g.ability_nodes = field<std::vector<double>>(v, "ability_nodes", "strategy");
    g.bid = field<std::vector<double>>(v, "bid", "strategy");
    g.effort = field<std::vector<double>>(v, "effort", "strategy");
    if (g.bid.size() != g.cost_nodes.size() * g.ability_nodes.size() || g.effort.size() != g.bid.size())
      throw SchemaError("strategy: grid values do not match the node counts");
    return g;
  });
  return s;
}

Json to_json(const ConvergenceReport& r) {
  return {{"converged", r.converged}, {"iterations", r.iterations}, {"residual", r.residual},
          {"exact_residual", r.exact_residual}, {"history", r.history}, {"diagnostic", r.diagnostic}};
}

Json to_json(const Matrix5& m) {
  Json j = Json::array();
  for (const auto& row : m) j.push_back(row);
  return j;
}

Json to_json(const WelfareReport& r) {
  return {{"scenario", std::string(to_string(r.scenario))},
          {"n_jobs", r.n_jobs},
          {"hiring_rate", r.hiring_rate},
          {"conditional_hiring_rate", r.conditional_hiring_rate},
          {"mean_winning_bid", r.mean_winning_bid},
          {"worker_surplus", r.worker_surplus},
          {"employer_surplus", r.employer_surplus},
          {"total_surplus", r.total_surplus},
          {"writing_costs", r.writing_costs},
          {"hire_rate", to_json(r.hire_rate)},
          {"hired_share", to_json(r.hired_share)},
          {"applicants", to_json(r.applicants)},
          {"ability_hire_rate", r.ability_hire_rate},
          {"cost_hire_rate", r.cost_hire_rate}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path + ": not valid JSON (" + e.what() + ")");
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << '\n';
}

void check_schema(const Json& j, const std::string& what) {
  auto it = j.find("schema_version");
  if (it == j.end()) throw SchemaError(what + ": field 'schema_version' is missing");
  if (*it != kSchemaVersion)
    throw SchemaError(what + ": field 'schema_version' is " + it->dump() + ", expected " +
                      std::to_string(kSchemaVersion));
}

}  // namespace lmsig
