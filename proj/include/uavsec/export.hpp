#pragma once

// Plain-text result files. Every writer is deterministic: same report, same bytes.
//
//   trajectory.csv  n,info_x,info_y,info_vx,info_vy,jammer_x,jammer_y,jammer_vx,jammer_vy
//   allocation.csv  n,i,k,alpha,p,trace_Z
//   ee_trace.csv    iteration,ee_after_sp1,ee
//   audit.csv       check,pass,margin,worst
//   summary.json    scheme, status, EE, counts, solution, settings, scenario

#include <string>
#include <vector>

#include "uavsec/orchestrator.hpp"

namespace uavsec {

std::string TrajectoryCsv(const SolveReport& r);
std::string AllocationCsv(const SolveReport& r);
std::string EeTraceCsv(const SolveReport& r);
std::string AuditCsv(const SolveReport& r);
std::string SummaryJson(const SolveReport& r, const RunSettings& settings);

// Writes the five files into dir (created if missing). Throws std::runtime_error
// on I/O failure.
void ExportResults(const SolveReport& r, const RunSettings& settings, const std::string& dir);

struct StoredSolution {
  AllocationState alloc;
  Trajectory info;
};

// Reads the "solution" block of a summary.json. Throws ParseError.
StoredSolution ParseSolution(const std::string& summary_text);

// One row per sweep point: param,value,status,ee,outer_iterations.
std::string SweepCsv(const std::vector<SweepPoint>& points);

}  // namespace uavsec
