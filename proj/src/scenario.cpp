#include "uavsec/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace uavsec {

using nlohmann::json;

namespace {

Vec2 ReadVec2(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2) {
    throw ParseError(std::string("field '") + key + "' must be a 2-vector");
  }
  return Vec2(v[0].get<double>(), v[1].get<double>());
}

json WriteVec2(const Vec2& v) { return json::array({v.x(), v.y()}); }

template <typename T>
void ReadOpt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

bool InRect(const Vec2& p, const Eigen::Vector4d& r) {
  return p.x() >= r[0] && p.x() <= r[2] && p.y() >= r[1] && p.y() <= r[3];
}

void Require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

Vec2 Centroid(const std::vector<Eavesdropper>& eves) {
  Vec2 c = Vec2::Zero();
  for (const auto& e : eves) c += e.est_position;
  return eves.empty() ? c : Vec2(c / static_cast<double>(eves.size()));
}

// Fills in the derived orbit centre for plans whose centre is a rule.
void ResolveJammerCenter(ScenarioConfig& cfg) {
  JammerPlan& jp = cfg.jammer_plan;
  if (jp.kind == JammerKind::kCSA) {
    jp.center = Vec2(0.5 * (cfg.service_area[0] + cfg.service_area[2]),
                     0.5 * (cfg.service_area[1] + cfg.service_area[3]));
  } else if (jp.kind == JammerKind::kCEA) {
    jp.center = Centroid(cfg.eavesdroppers);
  }
}

double DefaultRadius(JammerKind kind) {
  switch (kind) {
    case JammerKind::kCSA: return 150.0;
    case JammerKind::kCEA: return 159.0;
    case JammerKind::kCA: return 10.0;
    case JammerKind::kSFE: return 0.0;
  }
  return 0.0;
}

Trajectory CircularOrbit(const Vec2& center, double radius, double speed,
                         double tau, int n) {
  Trajectory tr;
  tr.positions.resize(n);
  tr.velocities.resize(n);
  // Chord per slot equals speed*tau, so |v| is exactly the declared speed.
  const double step = speed * tau;
  double dphi = 0.0;
  if (step > 0.0) {
    if (step > 2.0 * radius) {
      throw ValidationError("jammer step exceeds orbit diameter");
    }
    dphi = 2.0 * std::asin(step / (2.0 * radius));
  }
  for (int i = 0; i < n; ++i) {
    const double phi = dphi * i;
    tr.positions[i] = center + radius * Vec2(std::cos(phi), std::sin(phi));
  }
  for (int i = 0; i < n; ++i) {
    const double phi = dphi * (i + 1);
    const Vec2 next = (i + 1 < n)
                          ? tr.positions[i + 1]
                          : Vec2(center + radius * Vec2(std::cos(phi), std::sin(phi)));
    tr.velocities[i] = (next - tr.positions[i]) / tau;
  }
  return tr;
}

// Back and forth on [a, b]; a step that would leave the segment is taken in
// the opposite direction instead, so every step has length speed*tau.
Trajectory Shuttle(const Vec2& a, const Vec2& b, double speed, double tau, int n) {
  Trajectory tr;
  tr.positions.resize(n);
  tr.velocities.resize(n);
  const double len = (b - a).norm();
  const Vec2 dir = len > 0.0 ? Vec2((b - a) / len) : Vec2(1.0, 0.0);
  const double step = speed * tau;
  if (step > 0.0 && step > len) {
    throw ValidationError("jammer step exceeds shuttle segment length");
  }
  double s = 0.0;
  double sign = 1.0;
  std::vector<double> arc(n + 1);
  for (int i = 0; i <= n; ++i) {
    arc[i] = s;
    double next = s + sign * step;
    if (next > len + 1e-12 || next < -1e-12) {
      sign = -sign;
      next = s + sign * step;
    }
    s = next;
  }
  for (int i = 0; i < n; ++i) {
    tr.positions[i] = a + arc[i] * dir;
    tr.velocities[i] = (arc[i + 1] - arc[i]) / tau * dir;
  }
  return tr;
}

}  // namespace

std::string ToString(JammerKind kind) {
  switch (kind) {
    case JammerKind::kCSA: return "CSA";
    case JammerKind::kCEA: return "CEA";
    case JammerKind::kSFE: return "SFE";
    case JammerKind::kCA: return "CA";
  }
  return "?";
}

JammerKind JammerKindFromString(const std::string& name) {
  if (name == "CSA") return JammerKind::kCSA;
  if (name == "CEA") return JammerKind::kCEA;
  if (name == "SFE") return JammerKind::kSFE;
  if (name == "CA") return JammerKind::kCA;
  throw ValidationError("unsupported jammer plan kind '" + name + "'");
}

double ScenarioConfig::JammerCircuitPower() const {
  return P_C_J_per_antenna > 0.0 ? P_C_J_per_antenna * NJ() : P_C_J;
}

void ValidateScenario(const ScenarioConfig& c) {
  Require(c.N >= 2, "N must be at least 2");
  Require(c.tau > 0.0, "tau must be positive");
  Require(c.H > 0.0, "H must be positive");
  Require(c.N_F >= 1, "N_F must be at least 1");
  Require(c.W > 0.0, "W must be positive");
  Require(c.N0 > 0.0, "N0 must be positive");
  Require(c.beta0 > 0.0, "beta0 must be positive");
  Require(!c.users.empty(), "at least one user is required");
  Require(c.array.N_Jx >= 1 && c.array.N_Jy >= 1, "N_Jx and N_Jy must be positive");
  Require(c.array.delta_J > 0.0, "delta_J must be positive");
  Require(c.array.lambda_c > 0.0, "lambda_c must be positive");
  const FlightPowerParams& f = c.flight;
  Require(f.Omega > 0 && f.r > 0 && f.rho > 0 && f.s > 0 && f.A_r > 0 &&
              f.P_o > 0 && f.P_i > 0 && f.v0 > 0 && f.d0 > 0,
          "flight power parameters must be positive");
  Require(c.P_C_I > 0.0 && c.P_C_J > 0.0, "circuit powers must be positive");
  Require(c.P_C_J_per_antenna >= 0.0, "P_C_J_per_antenna must be nonnegative");
  Require(c.zeta_I >= 1.0 && c.zeta_J >= 1.0, "zeta must be at least 1");
  Require(c.P_peak_I >= 0.0 && c.P_peak_J >= 0.0, "peak powers must be nonnegative");
  Require(c.P_max_I > 0.0 && c.P_max_J > 0.0, "power budgets must be positive");
  Require(c.R_min >= 0.0, "R_min must be nonnegative");
  Require(c.Gamma_th > 0.0, "Gamma_th must be positive");
  Require(c.V_max_I > 0.0, "V_max_I must be positive");
  Require(c.V_acc_I >= 0.0, "V_acc_I must be nonnegative");
  Require(c.d_min >= 0.0, "d_min must be nonnegative");
  for (const auto& e : c.eavesdroppers) {
    Require(e.radius >= 0.0, "eavesdropper radius must be nonnegative");
    Require(std::isfinite(e.est_position.x()) && std::isfinite(e.est_position.y()),
            "eavesdropper position must be finite");
    Require(InRect(e.est_position, c.service_area),
            "eavesdropper outside the service area");
  }
  for (const auto& u : c.users) {
    Require(std::isfinite(u.position.x()) && std::isfinite(u.position.y()),
            "user position must be finite");
    Require(InRect(u.position, c.service_area), "user outside the service area");
  }
  const double reach = (c.N - 1) * c.tau * c.V_max_I;
  const double dist = (c.tF_I - c.t0_I).norm();
  if (dist > reach * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "tF_I is unreachable: distance " << dist << " m exceeds (N-1)*tau*V_max_I = "
       << reach << " m";
    throw ValidationError(os.str());
  }
  const JammerPlan& jp = c.jammer_plan;
  Require(jp.speed >= 0.0, "jammer speed must be nonnegative");
  if (jp.kind == JammerKind::kSFE) {
    Require(c.E() == 2, "SFE jammer plan requires exactly two eavesdroppers");
  } else {
    Require(jp.radius > 0.0, "jammer orbit radius must be positive");
  }
  if (jp.kind == JammerKind::kCEA) {
    Require(c.E() >= 1, "CEA jammer plan requires eavesdroppers");
  }
}

ScenarioConfig ParseScenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed config: ") + e.what());
  }
  ScenarioConfig c;
  try {
    c.users.clear();
    for (const auto& u : j.at("users")) {
      GroundUser g;
      g.position = ReadVec2(u, "position");
      c.users.push_back(g);
    }
    c.eavesdroppers.clear();
    if (j.contains("eavesdroppers")) {
      for (const auto& e : j.at("eavesdroppers")) {
        Eavesdropper ev;
        ev.est_position = ReadVec2(e, "est_position");
        ev.radius = e.at("radius").get<double>();
        c.eavesdroppers.push_back(ev);
      }
    }
    c.H = j.at("H").get<double>();
    c.N = j.at("N").get<int>();
    c.tau = j.at("tau").get<double>();
    c.N_F = j.at("N_F").get<int>();
    c.W = j.at("W").get<double>();
    c.N0 = j.at("N0").get<double>();
    c.beta0 = j.at("beta0").get<double>();
    if (j.contains("array")) {
      const json& a = j.at("array");
      ReadOpt(a, "N_Jx", c.array.N_Jx);
      ReadOpt(a, "N_Jy", c.array.N_Jy);
      ReadOpt(a, "delta_J", c.array.delta_J);
      c.array.lambda_c = 2.0 * c.array.delta_J;
      ReadOpt(a, "lambda_c", c.array.lambda_c);
    }
    if (j.contains("flight")) {
      const json& f = j.at("flight");
      ReadOpt(f, "Omega", c.flight.Omega);
      ReadOpt(f, "r", c.flight.r);
      ReadOpt(f, "rho", c.flight.rho);
      ReadOpt(f, "s", c.flight.s);
      ReadOpt(f, "A_r", c.flight.A_r);
      ReadOpt(f, "P_o", c.flight.P_o);
      ReadOpt(f, "P_i", c.flight.P_i);
      ReadOpt(f, "v0", c.flight.v0);
      ReadOpt(f, "d0", c.flight.d0);
    }
    ReadOpt(j, "P_C_I", c.P_C_I);
    ReadOpt(j, "P_C_J", c.P_C_J);
    ReadOpt(j, "P_C_J_per_antenna", c.P_C_J_per_antenna);
    ReadOpt(j, "zeta_I", c.zeta_I);
    ReadOpt(j, "zeta_J", c.zeta_J);
    ReadOpt(j, "P_peak_I", c.P_peak_I);
    ReadOpt(j, "P_peak_J", c.P_peak_J);
    ReadOpt(j, "P_max_I", c.P_max_I);
    ReadOpt(j, "P_max_J", c.P_max_J);
    ReadOpt(j, "R_min", c.R_min);
    ReadOpt(j, "Gamma_th", c.Gamma_th);
    ReadOpt(j, "V_max_I", c.V_max_I);
    ReadOpt(j, "V_acc_I", c.V_acc_I);
    ReadOpt(j, "d_min", c.d_min);
    c.t0_I = ReadVec2(j, "t0_I");
    c.tF_I = ReadVec2(j, "tF_I");
    if (j.contains("service_area")) {
      const auto v = j.at("service_area").get<std::vector<double>>();
      if (v.size() != 4) throw ParseError("service_area must have 4 entries");
      c.service_area = Eigen::Vector4d(v[0], v[1], v[2], v[3]);
    }
    const json& jp = j.at("jammer_plan");
    c.jammer_plan.kind = JammerKindFromString(jp.at("kind").get<std::string>());
    c.jammer_plan.speed = jp.value("speed", 10.4);
    c.jammer_plan.radius = jp.value("radius", DefaultRadius(c.jammer_plan.kind));
    if (c.jammer_plan.kind == JammerKind::kCA) {
      c.jammer_plan.center = ReadVec2(jp, "center");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed config: ") + e.what());
  }
  ResolveJammerCenter(c);
  ValidateScenario(c);
  c.jammer_plan.trajectory = GenerateJammerTrajectory(c);
  return c;
}

ScenarioConfig LoadScenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseScenario(ss.str());
}

std::string SerializeScenario(const ScenarioConfig& c) {
  json j;
  json users = json::array();
  for (const auto& u : c.users) users.push_back({{"position", WriteVec2(u.position)}});
  j["users"] = users;
  json eves = json::array();
  for (const auto& e : c.eavesdroppers) {
    eves.push_back({{"est_position", WriteVec2(e.est_position)}, {"radius", e.radius}});
  }
  j["eavesdroppers"] = eves;
  j["H"] = c.H;
  j["N"] = c.N;
  j["tau"] = c.tau;
  j["N_F"] = c.N_F;
  j["W"] = c.W;
  j["N0"] = c.N0;
  j["beta0"] = c.beta0;
  j["array"] = {{"N_Jx", c.array.N_Jx},
                {"N_Jy", c.array.N_Jy},
                {"delta_J", c.array.delta_J},
                {"lambda_c", c.array.lambda_c}};
  const FlightPowerParams& f = c.flight;
  j["flight"] = {{"Omega", f.Omega}, {"r", f.r},     {"rho", f.rho},
                 {"s", f.s},         {"A_r", f.A_r}, {"P_o", f.P_o},
                 {"P_i", f.P_i},     {"v0", f.v0},   {"d0", f.d0}};
  j["P_C_I"] = c.P_C_I;
  j["P_C_J"] = c.P_C_J;
  j["P_C_J_per_antenna"] = c.P_C_J_per_antenna;
  j["zeta_I"] = c.zeta_I;
  j["zeta_J"] = c.zeta_J;
  j["P_peak_I"] = c.P_peak_I;
  j["P_peak_J"] = c.P_peak_J;
  j["P_max_I"] = c.P_max_I;
  j["P_max_J"] = c.P_max_J;
  j["R_min"] = c.R_min;
  j["Gamma_th"] = c.Gamma_th;
  j["V_max_I"] = c.V_max_I;
  j["V_acc_I"] = c.V_acc_I;
  j["d_min"] = c.d_min;
  j["t0_I"] = WriteVec2(c.t0_I);
  j["tF_I"] = WriteVec2(c.tF_I);
  j["service_area"] = {c.service_area[0], c.service_area[1], c.service_area[2],
                       c.service_area[3]};
  j["jammer_plan"] = {{"kind", ToString(c.jammer_plan.kind)},
                      {"speed", c.jammer_plan.speed},
                      {"radius", c.jammer_plan.radius},
                      {"center", WriteVec2(c.jammer_plan.center)}};
  return j.dump(2) + "\n";
}

Trajectory GenerateJammerTrajectory(const ScenarioConfig& c) {
  const JammerPlan& jp = c.jammer_plan;
  switch (jp.kind) {
    case JammerKind::kCSA:
    case JammerKind::kCEA:
    case JammerKind::kCA:
      if (jp.radius <= 0.0) throw ValidationError("jammer orbit radius must be positive");
      return CircularOrbit(jp.center, jp.radius, jp.speed, c.tau, c.N);
    case JammerKind::kSFE:
      if (c.E() != 2) {
        throw ValidationError("SFE jammer plan requires exactly two eavesdroppers");
      }
      return Shuttle(c.eavesdroppers[0].est_position, c.eavesdroppers[1].est_position,
                     jp.speed, c.tau, c.N);
  }
  throw ValidationError("unsupported jammer plan kind");
}

Trajectory InitialInfoTrajectory(const ScenarioConfig& c) {
  const double reach = (c.N - 1) * c.tau * c.V_max_I;
  if ((c.tF_I - c.t0_I).norm() > reach * (1.0 + 1e-12)) {
    throw ValidationError("infeasible kinematics: tF_I unreachable");
  }
  Trajectory tr;
  const Vec2 v = (c.tF_I - c.t0_I) / ((c.N - 1) * c.tau);
  tr.velocities.assign(c.N, v);
  tr.positions.resize(c.N);
  tr.positions[0] = c.t0_I;
  for (int n = 1; n < c.N; ++n) tr.positions[n] = tr.positions[n - 1] + c.tau * v;
  tr.positions[c.N - 1] = c.tF_I;
  return tr;
}

bool SameConfig(const ScenarioConfig& a, const ScenarioConfig& b) {
  return SerializeScenario(a) == SerializeScenario(b);
}

ScenarioConfig CanonicalDeskScenario() {
  ScenarioConfig c;
  c.users = {GroundUser{Vec2(350, 100)}, GroundUser{Vec2(150, 400)}};
  c.eavesdroppers = {Eavesdropper{Vec2(400, 100), 71.0}, Eavesdropper{Vec2(250, 250), 141.0}};
  c.t0_I = Vec2(120.0, 380.0);
  c.tF_I = Vec2(170.0, 400.0);
  c.R_min = 0.0;
  c.jammer_plan.kind = JammerKind::kCEA;
  c.jammer_plan.radius = 159.0;
  ResolveJammerCenter(c);
  ValidateScenario(c);
  c.jammer_plan.trajectory = GenerateJammerTrajectory(c);
  return c;
}

}  // namespace uavsec
