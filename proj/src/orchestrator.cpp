#include "uavsec/orchestrator.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace uavsec {

using nlohmann::json;

std::string ToString(Scheme s) {
  switch (s) {
    case Scheme::kPA: return "PA";
    case Scheme::kNJ: return "NJ";
    case Scheme::kSAJ: return "SAJ";
    case Scheme::kZAI: return "ZAI";
    case Scheme::kSLI: return "SLI";
    case Scheme::kPerfectCsi: return "PERFECT_CSI";
  }
  return "?";
}

Scheme SchemeFromString(const std::string& name) {
  for (Scheme s : {Scheme::kPA, Scheme::kNJ, Scheme::kSAJ, Scheme::kZAI, Scheme::kSLI,
                   Scheme::kPerfectCsi}) {
    if (ToString(s) == name) return s;
  }
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::string ToString(RunStatus s) {
  switch (s) {
    case RunStatus::kConverged: return "converged";
    case RunStatus::kMaxIterations: return "max-iterations";
    case RunStatus::kInfeasible: return "infeasible";
    case RunStatus::kInfeasibleAtAudit: return "infeasible-at-audit";
    case RunStatus::kError: return "error";
  }
  return "?";
}

std::string SerializeRunSettings(const RunSettings& s) {
  json j;
  j["scheme"] = ToString(s.scheme);
  j["eps4"] = s.eps4;
  j["J_max_A4"] = s.J_max_A4;
  j["seed"] = s.seed;
  j["G"] = s.G;
  j["sp1"] = {{"chi", s.sp1.chi},
              {"eps1", s.sp1.eps1},
              {"J_max_outer", s.sp1.J_max_outer},
              {"eps2", s.sp1.eps2},
              {"max_dinkelbach", s.sp1.max_dinkelbach},
              {"round_threshold", s.sp1.round_threshold},
              {"fixed_sca_iters", s.sp1.fixed_sca_iters},
              {"init_noise_scale", s.sp1.init_noise_scale},
              {"leak_pool", s.sp1.leak_pool},
              {"max_cut_rounds", s.sp1.max_cut_rounds},
              {"cut_tol", s.sp1.cut_tol}};
  j["sp2"] = {{"eps3", s.sp2.eps3},
              {"J_max_outer", s.sp2.J_max_outer},
              {"eps2", s.sp2.eps2},
              {"max_dinkelbach", s.sp2.max_dinkelbach}};
  j["audit"] = {{"samples_per_eve", s.audit.samples_per_eve},
                {"tol_rel", s.audit.tol_rel},
                {"tol_leak", s.audit.tol_leak},
                {"tol_kin", s.audit.tol_kin}};
  return j.dump(2) + "\n";
}

namespace {

template <typename T>
void Opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunSettings ParseRunSettings(const std::string& text) {
  RunSettings s;
  try {
    const json j = json::parse(text);
    if (j.contains("scheme")) s.scheme = SchemeFromString(j.at("scheme").get<std::string>());
    Opt(j, "eps4", s.eps4);
    Opt(j, "J_max_A4", s.J_max_A4);
    Opt(j, "seed", s.seed);
    Opt(j, "G", s.G);
    if (j.contains("sp1")) {
      const json& a = j.at("sp1");
      Opt(a, "chi", s.sp1.chi);
      Opt(a, "eps1", s.sp1.eps1);
      Opt(a, "J_max_outer", s.sp1.J_max_outer);
      Opt(a, "eps2", s.sp1.eps2);
      Opt(a, "max_dinkelbach", s.sp1.max_dinkelbach);
      Opt(a, "round_threshold", s.sp1.round_threshold);
      Opt(a, "fixed_sca_iters", s.sp1.fixed_sca_iters);
      Opt(a, "init_noise_scale", s.sp1.init_noise_scale);
      Opt(a, "leak_pool", s.sp1.leak_pool);
      Opt(a, "max_cut_rounds", s.sp1.max_cut_rounds);
      Opt(a, "cut_tol", s.sp1.cut_tol);
    }
    if (j.contains("sp2")) {
      const json& a = j.at("sp2");
      Opt(a, "eps3", s.sp2.eps3);
      Opt(a, "J_max_outer", s.sp2.J_max_outer);
      Opt(a, "eps2", s.sp2.eps2);
      Opt(a, "max_dinkelbach", s.sp2.max_dinkelbach);
    }
    if (j.contains("audit")) {
      const json& a = j.at("audit");
      Opt(a, "samples_per_eve", s.audit.samples_per_eve);
      Opt(a, "tol_rel", s.audit.tol_rel);
      Opt(a, "tol_leak", s.audit.tol_leak);
      Opt(a, "tol_kin", s.audit.tol_kin);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed run settings: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  if (s.J_max_A4 < 1) throw ParseError("J_max_A4 must be at least 1");
  if (s.G < 1) throw ParseError("G must be at least 1");
  return s;
}

ComplexityCounts CountComplexity(const ScenarioConfig& cfg) {
  const long long N = cfg.N, K = cfg.K(), E = cfg.E(), NF = cfg.N_F, NJ = cfg.NJ();
  ComplexityCounts c;
  c.M1 = 10 * N * K * NF + N * K * E * NF + 2 * N * NF + 4 * N + K;
  c.N1 = 3 * N * K * NF + NJ * NJ * N * NF + NJ * NJ * N * K * NF;
  c.M2 = 9 * N + N * K + K;
  c.N2 = 4 * N + N * K;
  return c;
}

namespace {

// Re-materializes derived fields (jammer centre and path) after an edit.
ScenarioConfig Rebuild(const ScenarioConfig& cfg) { return ParseScenario(SerializeScenario(cfg)); }

}  // namespace

ScenarioConfig ApplyScheme(const ScenarioConfig& cfg, Scheme scheme) {
  ScenarioConfig c = cfg;
  switch (scheme) {
    case Scheme::kSAJ:
      c.array.N_Jx = 1;
      c.array.N_Jy = 1;
      return Rebuild(c);
    case Scheme::kPerfectCsi:
      for (auto& e : c.eavesdroppers) e.radius = 0.0;
      return Rebuild(c);
    default:
      return c;
  }
}

SolveReport AlternateOptimize(const ScenarioConfig& base, const RunSettings& settings) {
  SolveReport rep;
  rep.scheme = settings.scheme;
  rep.cfg = ApplyScheme(base, settings.scheme);
  const ScenarioConfig& cfg = rep.cfg;
  rep.complexity = CountComplexity(cfg);
  rep.jammer = cfg.jammer_plan.trajectory;
  rep.info = InitialInfoTrajectory(cfg);

  Sp1Params p1 = settings.sp1;
  Sp2Params p2 = settings.sp2;
  p1.leak_seed = 90000 + settings.seed;
  const bool nj = settings.scheme == Scheme::kNJ;
  p1.jammer = !nj;
  p2.jammer = !nj;
  p2.zai = settings.scheme == Scheme::kZAI;
  AuditOptions ao = settings.audit;
  ao.seed = settings.seed;

  ChannelSet ch = BuildChannelSet(cfg, rep.info, rep.jammer, settings.G);
  LeakagePool pool;
  const bool use_pool = !nj && std::isfinite(cfg.Gamma_th) && cfg.NJ() > 0;
  if (use_pool) pool = BuildLeakagePool(cfg, rep.jammer, p1.leak_pool, p1.leak_seed);
  const LeakagePool* pool_ptr = use_pool ? &pool : nullptr;

  bool have_alloc = false;
  double prev = 0.0;
  rep.status = RunStatus::kMaxIterations;
  std::string phase;
  try {
    for (int j = 1; j <= settings.J_max_A4; ++j) {
      rep.outer_iterations = j;
      ch.info = BuildInfoChannels(cfg, rep.info);
      phase = "sp1";
      const Sp1Inputs in1{cfg, ch, rep.info, rep.jammer, pool_ptr};
      Sp1Result r1 = SolveSp1(in1, p1, have_alloc ? &rep.alloc : nullptr);
      ch.jam.cuts.insert(ch.jam.cuts.end(), r1.cuts.begin(), r1.cuts.end());
      rep.leakage_cuts += static_cast<int>(r1.cuts.size());
      rep.sp1_traces.push_back(r1.q1_trace);
      rep.residuals.insert(rep.residuals.end(), r1.residuals.begin(), r1.residuals.end());
      rep.inner_converged.insert(rep.inner_converged.end(), r1.inner_converged.begin(),
                                 r1.inner_converged.end());
      // Keep the incumbent allocation if the new one is worse on this path.
      if (!have_alloc || r1.q1 >= prev) {
        rep.alloc = std::move(r1.alloc);
        rep.ee_after_sp1.push_back(r1.q1);
      } else {
        rep.ee_after_sp1.push_back(prev);
      }
      have_alloc = true;

      double ee = rep.ee_after_sp1.back();
      if (settings.scheme != Scheme::kSLI) {
        phase = "sp2";
        const Sp2Inputs in2{cfg, rep.alloc, rep.jammer, ch.jam, pool_ptr};
        Sp2Result r2 = SolveSp2(in2, p2, rep.info);
        rep.sp2_traces.push_back(r2.q3_trace);
        rep.residuals.insert(rep.residuals.end(), r2.residuals.begin(), r2.residuals.end());
        rep.inner_converged.insert(rep.inner_converged.end(), r2.inner_converged.begin(),
                                   r2.inner_converged.end());
        rep.info = std::move(r2.info);
        ee = r2.q3;
      }
      rep.ee_trace.push_back(ee);
      const double rel = prev > 0.0 ? std::abs(ee - prev) / prev : INFINITY;
      prev = ee;
      // The straight path never changes, so one allocation pass is final.
      if (rel <= settings.eps4 || settings.scheme == Scheme::kSLI) {
        rep.status = RunStatus::kConverged;
        break;
      }
    }
  } catch (const SubproblemInfeasible& e) {
    rep.status = RunStatus::kInfeasible;
    rep.phase = phase;
    rep.message = e.what();
    return rep;
  }
  ch.info = BuildInfoChannels(cfg, rep.info);
  rep.ee = EnergyEfficiency(rep.alloc, rep.info, rep.jammer, ch, cfg, !nj);
  rep.audit = Audit(rep.alloc, rep.info, rep.jammer, cfg, ao);
  if (!rep.audit.AllPass()) {
    rep.status = RunStatus::kInfeasibleAtAudit;
    rep.phase = "audit";
    for (const auto& c : rep.audit.checks) {
      if (!c.pass) {
        rep.message = "audit failed: " + c.name + " at " + c.worst;
        break;
      }
    }
  }
  return rep;
}

SolveReport RunBaseline(const ScenarioConfig& cfg, const RunSettings& settings) {
  return AlternateOptimize(cfg, settings);
}

ScenarioConfig ApplySweepValue(const ScenarioConfig& cfg, const std::string& param, double value) {
  ScenarioConfig c = cfg;
  auto whole = [&](const char* what) {
    const double r = std::round(value);
    if (std::abs(r - value) > 1e-9) throw ValidationError(std::string(what) + " must be an integer");
    return static_cast<int>(r);
  };
  if (param == "P_peak_I") {
    c.P_peak_I = value;
  } else if (param == "P_peak_J") {
    c.P_peak_J = value;
  } else if (param == "Q_e") {
    for (auto& e : c.eavesdroppers) e.radius = value;
  } else if (param.rfind("Q_", 0) == 0) {
    int idx = 0;
    try {
      idx = std::stoi(param.substr(2));
    } catch (const std::exception&) {
      throw ValidationError("unknown sweep parameter '" + param + "'");
    }
    if (idx < 1 || idx > c.E()) throw ValidationError("no eavesdropper " + param.substr(2));
    c.eavesdroppers[idx - 1].radius = value;
  } else if (param == "N_J") {
    const int nj = whole("N_J");
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(nj))));
    if (side < 1 || side * side != nj) throw ValidationError("N_J must be a perfect square");
    c.array.N_Jx = side;
    c.array.N_Jy = side;
  } else if (param == "K") {
    const int k = whole("K");
    if (k < 1 || k > c.K()) throw ValidationError("K must be between 1 and the configured users");
    c.users.resize(k);
  } else if (param == "T") {
    c.N = static_cast<int>(std::lround(value / c.tau));
  } else {
    throw ValidationError("unknown sweep parameter '" + param + "'");
  }
  return Rebuild(c);
}

std::vector<SweepPoint> RunSweep(const ScenarioConfig& cfg, const RunSettings& settings,
                                 const std::string& param, const std::vector<double>& values) {
  std::vector<SweepPoint> out;
  for (double v : values) {
    SweepPoint pt;
    pt.param = param;
    pt.value = v;
    pt.report = RunBaseline(ApplySweepValue(cfg, param, v), settings);
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace uavsec
