#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coshf/bench_td.hpp"
#include "coshf/sca.hpp"
#include "coshf/trajectory.hpp"

namespace uavsec {

/// Shortest decimal text that parses back to the same double ('.' decimal,
/// no locale). Non-finite values print as nan / inf / -inf.
std::string format_double(double v);
double parse_double(const std::string& s);

/// 16 hex digits of FNV-1a over the canonical scenario text.
std::string scenario_hash(const Scenario& sc);

/// One scheduling group of a finished solution: a hover pair, a flight
/// segment or a time slot, in mission order.
struct ScheduleRow {
  std::string kind;  // "hover", "fly" or "slot"
  int index = 0;
  double t_start = 0.0;
  double duration = 0.0;
  std::vector<double> weights;  // K entries

  bool operator==(const ScheduleRow&) const = default;
};

std::vector<ScheduleRow> schedule_rows(const CoShfTrajectory& traj, const Scenario& sc);
std::vector<ScheduleRow> schedule_rows(const DiscretePath& path);

/// Columns t,xS,yS,xJ,yJ,active_user.
std::string trajectory_csv(const DiscretePath& path);
/// Recovers t, positions and one-hot scheduling from the active_user column.
DiscretePath parse_trajectory_csv(const std::string& text, int K);

/// Columns kind,index,t_start,duration,a_0..a_{K-1}.
std::string schedule_csv(const std::vector<ScheduleRow>& rows, int K);
std::vector<ScheduleRow> parse_schedule_csv(const std::string& text);

struct SweepRow {
  std::string param;  // "P_J", "N0" or "V"
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string mode;   // coshf, td or single
  std::string status;
  int iters = 0;
  double objective = 0.0;
  double wallclock = 0.0;

  bool operator==(const SweepRow&) const = default;
};

/// Columns param,value,seed,mode,status,iters,objective,wallclock; an empty
/// sweep gives the header line only.
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

/// Everything one run exports.
struct RunBundle {
  std::string mode;  // coshf, td or single
  Scenario scenario;
  std::vector<std::pair<std::string, std::string>> config;  // flag name -> value text
  SolveReport report;
  std::optional<CoShfTrajectory> relaxed, solution;  // hover-and-fly modes
  std::optional<DiscretePath> td_relaxed, td_path;   // slotted mode
  double sample_dt = 0.0;  // trajectory.csv spacing for hover-and-fly modes; 0 picks T/1000
};

/// results.json text. `with_timings = false` drops every wallclock field so
/// reruns compare byte for byte.
std::string results_json(const RunBundle& b, bool with_timings = true);

/// SolveReport fields as stored in results.json (timings included).
SolveReport report_from_results_json(const std::string& text);

/// Writes results.json, trajectory.csv, schedule.csv and, for hover-and-fly
/// modes, solution.json and relaxed.json into `dir` (created if missing).
/// Throws std::runtime_error on I/O failure.
void export_bundle(const RunBundle& b, const std::string& dir);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// $COSHF_OUT_DIR when set and nonempty, else "out".
std::string default_out_dir();

}  // namespace uavsec
