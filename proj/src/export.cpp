#include "uavsec/export.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace uavsec {

using nlohmann::json;

namespace {

// Shortest round-trip decimal.
std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void WriteFile(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
}

}  // namespace

std::string TrajectoryCsv(const SolveReport& r) {
  std::ostringstream os;
  os << "n,info_x,info_y,info_vx,info_vy,jammer_x,jammer_y,jammer_vx,jammer_vy\n";
  for (int n = 0; n < r.info.size(); ++n) {
    const Vec2& p = r.info.positions[n];
    const Vec2& v = r.info.velocities[n];
    const Vec2& jp = r.jammer.positions[n];
    const Vec2& jv = r.jammer.velocities[n];
    os << n << ',' << Num(p.x()) << ',' << Num(p.y()) << ',' << Num(v.x()) << ',' << Num(v.y())
       << ',' << Num(jp.x()) << ',' << Num(jp.y()) << ',' << Num(jv.x()) << ',' << Num(jv.y())
       << '\n';
  }
  return os.str();
}

std::string AllocationCsv(const SolveReport& r) {
  std::ostringstream os;
  os << "n,i,k,alpha,p,trace_Z\n";
  const AllocationState& a = r.alloc;
  for (int n = 0; n < a.N; ++n) {
    for (int i = 0; i < a.NF; ++i) {
      const double tr = a.NJ > 0 ? a.Zm(i, n).trace().real() : 0.0;
      for (int k = 0; k < a.K; ++k) {
        os << n << ',' << i << ',' << k << ',' << Num(a.Alpha(k, i, n)) << ','
           << Num(a.P(k, i, n)) << ',' << Num(tr) << '\n';
      }
    }
  }
  return os.str();
}

std::string EeTraceCsv(const SolveReport& r) {
  std::ostringstream os;
  os << "iteration,ee_after_sp1,ee\n";
  for (size_t j = 0; j < r.ee_trace.size(); ++j) {
    os << j + 1 << ',' << Num(j < r.ee_after_sp1.size() ? r.ee_after_sp1[j] : r.ee_trace[j]) << ','
       << Num(r.ee_trace[j]) << '\n';
  }
  return os.str();
}

std::string AuditCsv(const SolveReport& r) {
  std::ostringstream os;
  os << "check,pass,margin,worst\n";
  for (const auto& c : r.audit.checks) {
    os << c.name << ',' << (c.pass ? 1 : 0) << ',' << Num(c.margin) << ',' << '"' << c.worst
       << '"' << '\n';
  }
  os << "max_leakage_sinr,," << Num(r.audit.max_leakage_sinr) << ",\n";
  os << "min_user_rate,," << Num(r.audit.min_user_rate) << ",\n";
  return os.str();
}

std::string SummaryJson(const SolveReport& r, const RunSettings& settings) {
  json j;
  j["scheme"] = ToString(r.scheme);
  j["status"] = ToString(r.status);
  j["phase"] = r.phase;
  j["message"] = r.message;
  j["energy_efficiency"] = r.ee;
  j["ee_trace"] = r.ee_trace;
  j["outer_iterations"] = r.outer_iterations;
  j["leakage_cuts"] = r.leakage_cuts;
  j["audit_pass"] = r.audit.AllPass();
  j["max_leakage_sinr"] = r.audit.max_leakage_sinr;
  j["min_user_rate"] = r.audit.min_user_rate;
  double worst = 0.0;
  for (double v : r.residuals) worst = std::max(worst, v);
  j["max_dinkelbach_residual"] = worst;
  j["complexity"] = {{"M1", r.complexity.M1},
                     {"N1", r.complexity.N1},
                     {"M2", r.complexity.M2},
                     {"N2", r.complexity.N2}};
  json sol;
  const AllocationState& a = r.alloc;
  sol["K"] = a.K;
  sol["N_F"] = a.NF;
  sol["N"] = a.N;
  sol["N_J"] = a.NJ;
  sol["alpha"] = a.alpha;
  sol["p"] = a.p;
  // Z[i][n] row-major as [re, im] pairs.
  json zs = json::array();
  for (const CMat& Z : a.Z) {
    json flat = json::array();
    for (int r0 = 0; r0 < Z.rows(); ++r0) {
      for (int c0 = 0; c0 < Z.cols(); ++c0) {
        flat.push_back(Z(r0, c0).real());
        flat.push_back(Z(r0, c0).imag());
      }
    }
    zs.push_back(flat);
  }
  sol["Z"] = zs;
  json pos = json::array(), vel = json::array();
  for (int n = 0; n < r.info.size(); ++n) {
    pos.push_back({r.info.positions[n].x(), r.info.positions[n].y()});
    vel.push_back({r.info.velocities[n].x(), r.info.velocities[n].y()});
  }
  sol["info_positions"] = pos;
  sol["info_velocities"] = vel;
  j["solution"] = sol;
  j["settings"] = json::parse(SerializeRunSettings(settings));
  j["scenario"] = json::parse(SerializeScenario(r.cfg));
  return j.dump(2) + "\n";
}

void ExportResults(const SolveReport& r, const RunSettings& settings, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir + "': " + ec.message());
  const std::filesystem::path d(dir);
  WriteFile(d / "trajectory.csv", TrajectoryCsv(r));
  WriteFile(d / "allocation.csv", AllocationCsv(r));
  WriteFile(d / "ee_trace.csv", EeTraceCsv(r));
  WriteFile(d / "audit.csv", AuditCsv(r));
  WriteFile(d / "summary.json", SummaryJson(r, settings));
}

StoredSolution ParseSolution(const std::string& summary_text) {
  StoredSolution out;
  try {
    const json j = json::parse(summary_text);
    const json& s = j.at("solution");
    AllocationState a(s.at("K").get<int>(), s.at("N_F").get<int>(), s.at("N").get<int>(),
                      s.at("N_J").get<int>());
    a.alpha = s.at("alpha").get<std::vector<double>>();
    a.p = s.at("p").get<std::vector<double>>();
    if (a.alpha.size() != a.p.size() || static_cast<int>(a.alpha.size()) != a.K * a.NF * a.N) {
      throw std::runtime_error("allocation size mismatch");
    }
    const json& zs = s.at("Z");
    if (static_cast<int>(zs.size()) != a.NF * a.N) throw std::runtime_error("Z size mismatch");
    for (size_t b = 0; b < zs.size(); ++b) {
      const auto flat = zs[b].get<std::vector<double>>();
      if (static_cast<int>(flat.size()) != 2 * a.NJ * a.NJ) throw std::runtime_error("Z entry size mismatch");
      for (int r0 = 0; r0 < a.NJ; ++r0) {
        for (int c0 = 0; c0 < a.NJ; ++c0) {
          const int e = 2 * (r0 * a.NJ + c0);
          a.Z[b](r0, c0) = cplx(flat[e], flat[e + 1]);
        }
      }
    }
    for (const auto& p : s.at("info_positions")) {
      out.info.positions.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    for (const auto& v : s.at("info_velocities")) {
      out.info.velocities.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    }
    if (out.info.size() != a.N || static_cast<int>(out.info.velocities.size()) != a.N) {
      throw std::runtime_error("trajectory length mismatch");
    }
    out.alloc = std::move(a);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed solution: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw ParseError(std::string("malformed solution: ") + e.what());
  }
  return out;
}

std::string SweepCsv(const std::vector<SweepPoint>& points) {
  std::ostringstream os;
  os << "param,value,status,ee,outer_iterations\n";
  for (const auto& p : points) {
    os << p.param << ',' << Num(p.value) << ',' << ToString(p.report.status) << ','
       << Num(p.report.ee) << ',' << p.report.outer_iterations << '\n';
  }
  return os.str();
}

}  // namespace uavsec
