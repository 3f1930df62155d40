#include "coshf/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace uavsec {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::runtime_error("bad number: '" + s + "'");
  return v;
}

std::string scenario_hash(const Scenario& sc) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : serialize_scenario(sc)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string l;
  while (std::getline(is, l)) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

int parse_int(const std::string& s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::runtime_error("bad integer: '" + s + "'");
  return v;
}

// Finite doubles as numbers, the rest as strings so the document stays valid JSON.
json num(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

double num_from(const json& j) { return j.is_string() ? parse_double(j.get<std::string>()) : j.get<double>(); }

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::vector<double> nums_from(const json& a) {
  std::vector<double> v;
  for (const auto& x : a) v.push_back(num_from(x));
  return v;
}

json audit_json(const Audit& a) {
  return {{"samples", a.samples},
          {"max_speed", num(a.max_speed)},
          {"max_speed_violation", num(a.max_speed_violation)},
          {"worst_speed_time", num(a.worst_speed_time)},
          {"min_pair_distance", num(a.min_pair_distance)},
          {"worst_distance_time", num(a.worst_distance_time)},
          {"mission_time", num(a.mission_time)},
          {"time_budget_slack", num(a.time_budget_slack)},
          {"scheduling_binary", a.scheduling_binary},
          {"scheduling_simplex", a.scheduling_simplex},
          {"jammer_present", a.jammer_present},
          {"throughput_recomputed", nums(a.throughput_recomputed)},
          {"min_throughput", num(a.min_throughput)},
          {"max_rel_throughput_gap", num(a.max_rel_throughput_gap)}};
}

Audit audit_from(const json& j) {
  Audit a;
  a.samples = j.at("samples").get<std::size_t>();
  a.max_speed = num_from(j.at("max_speed"));
  a.max_speed_violation = num_from(j.at("max_speed_violation"));
  a.worst_speed_time = num_from(j.at("worst_speed_time"));
  a.min_pair_distance = num_from(j.at("min_pair_distance"));
  a.worst_distance_time = num_from(j.at("worst_distance_time"));
  a.mission_time = num_from(j.at("mission_time"));
  a.time_budget_slack = num_from(j.at("time_budget_slack"));
  a.scheduling_binary = j.at("scheduling_binary").get<bool>();
  a.scheduling_simplex = j.at("scheduling_simplex").get<bool>();
  a.jammer_present = j.at("jammer_present").get<bool>();
  a.throughput_recomputed = nums_from(j.at("throughput_recomputed"));
  a.min_throughput = num_from(j.at("min_throughput"));
  a.max_rel_throughput_gap = num_from(j.at("max_rel_throughput_gap"));
  return a;
}

RunStatus status_from(const std::string& s) {
  for (RunStatus r : {RunStatus::Converged, RunStatus::MaxIter, RunStatus::Infeasible})
    if (s == to_string(r)) return r;
  throw std::runtime_error("unknown status '" + s + "'");
}

}  // namespace

std::vector<ScheduleRow> schedule_rows(const CoShfTrajectory& tr, const Scenario& sc) {
  std::vector<ScheduleRow> out;
  double clock = 0.0;
  auto row = [](const Eigen::MatrixXd& m, Eigen::Index r) {
    std::vector<double> w(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) w[static_cast<std::size_t>(k)] = m(r, k);
    return w;
  };
  for (int i = 0; i <= tr.K; ++i) {
    if (i > 0) {
      const double d = tr.hover_dur[static_cast<std::size_t>(i - 1)];
      out.push_back({"hover", i, clock, d, row(tr.sched_hover, i - 1)});
      clock += d;
    }
    for (int j = 0; j <= tr.N; ++j) {
      const SegmentIndex seg{i, j};
      double d = segment_length(tr, Uav::S, seg);
      if (tr.jammer_active) d = std::max(d, segment_length(tr, Uav::J, seg));
      d /= sc.V;
      out.push_back({"fly", tr.flat(seg), clock, d, row(tr.sched_fly, tr.flat(seg))});
      clock += d;
    }
  }
  return out;
}

std::vector<ScheduleRow> schedule_rows(const DiscretePath& p) {
  std::vector<ScheduleRow> out;
  for (std::size_t m = 0; m + 1 < p.size(); ++m) {
    ScheduleRow r{"slot", static_cast<int>(m), p.t[m], p.t[m + 1] - p.t[m], {}};
    for (Eigen::Index k = 0; k < p.sched.cols(); ++k) r.weights.push_back(p.sched(static_cast<Eigen::Index>(m), k));
    out.push_back(std::move(r));
  }
  return out;
}

std::string trajectory_csv(const DiscretePath& p) {
  std::string s = "t,xS,yS,xJ,yJ,active_user\n";
  for (std::size_t m = 0; m < p.size(); ++m) {
    s += format_double(p.t[m]) + "," + format_double(p.pos_S[m].x()) + "," + format_double(p.pos_S[m].y()) + "," +
         format_double(p.pos_J[m].x()) + "," + format_double(p.pos_J[m].y()) + "," +
         std::to_string(p.active_user(m)) + "\n";
  }
  return s;
}

DiscretePath parse_trajectory_csv(const std::string& text, int K) {
  const auto ls = lines(text);
  if (ls.empty() || ls[0] != "t,xS,yS,xJ,yJ,active_user") throw std::runtime_error("trajectory.csv: bad header");
  DiscretePath p;
  p.sched = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ls.size() - 1), K);
  for (std::size_t r = 1; r < ls.size(); ++r) {
    const auto c = split(ls[r]);
    if (c.size() != 6) throw std::runtime_error("trajectory.csv: row " + std::to_string(r) + " needs 6 columns");
    p.t.push_back(parse_double(c[0]));
    p.pos_S.emplace_back(parse_double(c[1]), parse_double(c[2]));
    p.pos_J.emplace_back(parse_double(c[3]), parse_double(c[4]));
    const int k = parse_int(c[5]);
    if (k < 0 || k >= K) throw std::runtime_error("trajectory.csv: active_user out of range");
    p.sched(static_cast<Eigen::Index>(r - 1), k) = 1.0;
  }
  p.dt = p.size() > 1 ? p.t[1] - p.t[0] : 0.0;
  return p;
}

std::string schedule_csv(const std::vector<ScheduleRow>& rows, int K) {
  std::string s = "kind,index,t_start,duration";
  for (int k = 0; k < K; ++k) s += ",a_" + std::to_string(k);
  s += "\n";
  for (const auto& r : rows) {
    if (static_cast<int>(r.weights.size()) != K) throw std::invalid_argument("schedule row width differs from K");
    s += r.kind + "," + std::to_string(r.index) + "," + format_double(r.t_start) + "," + format_double(r.duration);
    for (double w : r.weights) s += "," + format_double(w);
    s += "\n";
  }
  return s;
}

std::vector<ScheduleRow> parse_schedule_csv(const std::string& text) {
  const auto ls = lines(text);
  if (ls.empty()) throw std::runtime_error("schedule.csv: empty");
  const auto head = split(ls[0]);
  if (head.size() < 4 || head[0] != "kind" || head[1] != "index" || head[2] != "t_start" || head[3] != "duration")
    throw std::runtime_error("schedule.csv: bad header");
  const std::size_t K = head.size() - 4;
  std::vector<ScheduleRow> out;
  for (std::size_t r = 1; r < ls.size(); ++r) {
    const auto c = split(ls[r]);
    if (c.size() != K + 4) throw std::runtime_error("schedule.csv: row " + std::to_string(r) + " has wrong width");
    ScheduleRow row{c[0], parse_int(c[1]), parse_double(c[2]), parse_double(c[3]), {}};
    for (std::size_t k = 0; k < K; ++k) row.weights.push_back(parse_double(c[4 + k]));
    out.push_back(std::move(row));
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = "param,value,seed,mode,status,iters,objective,wallclock\n";
  for (const auto& r : rows)
    s += r.param + "," + format_double(r.value) + "," + std::to_string(r.seed) + "," + r.mode + "," + r.status + "," +
         std::to_string(r.iters) + "," + format_double(r.objective) + "," + format_double(r.wallclock) + "\n";
  return s;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  const auto ls = lines(text);
  if (ls.empty() || ls[0] != "param,value,seed,mode,status,iters,objective,wallclock")
    throw std::runtime_error("sweep csv: bad header");
  std::vector<SweepRow> out;
  for (std::size_t r = 1; r < ls.size(); ++r) {
    const auto c = split(ls[r]);
    if (c.size() != 8) throw std::runtime_error("sweep csv: row " + std::to_string(r) + " needs 8 columns");
    SweepRow row;
    row.param = c[0];
    row.value = parse_double(c[1]);
    row.seed = std::stoull(c[2]);
    row.mode = c[3];
    row.status = c[4];
    row.iters = parse_int(c[5]);
    row.objective = parse_double(c[6]);
    row.wallclock = parse_double(c[7]);
    out.push_back(row);
  }
  return out;
}

std::string results_json(const RunBundle& b, bool with_timings) {
  const SolveReport& r = b.report;
  json j;
  j["mode"] = b.mode;
  j["scenario_hash"] = scenario_hash(b.scenario);
  j["scenario"] = serialize_scenario(b.scenario);
  json cfg = json::object();
  for (const auto& [k, v] : b.config) cfg[k] = v;
  j["config"] = cfg;
  j["status"] = to_string(r.status);
  j["message"] = r.message;
  j["iters"] = r.iters;
  j["polish_iters"] = r.polish_iters;
  j["m_var"] = r.m_var;
  j["m_con"] = r.m_con;
  j["objective"] = num(r.objective);
  j["throughput"] = nums(r.throughput);
  j["throughput_relaxed"] = nums(r.throughput_relaxed);
  j["objective_trace"] = nums(r.objective_trace);
  j["polish_trace"] = nums(r.polish_trace);
  json its = json::array();
  for (const auto& it : r.iterations) {
    json e = {{"iter", it.iter},
              {"objective", num(it.objective)},
              {"surrogate", num(it.surrogate)},
              {"kkt_residual", num(it.kkt_residual)},
              {"newton_steps", it.newton_steps},
              {"accepted", it.accepted}};
    if (with_timings) e["wallclock"] = num(it.wallclock);
    its.push_back(e);
  }
  j["iterations"] = its;
  j["audit"] = audit_json(r.audit);
  if (with_timings) j["timings"] = {{"main", num(r.wallclock_main)}, {"polish", num(r.wallclock_polish)}};
  return j.dump(2) + "\n";
}

SolveReport report_from_results_json(const std::string& text) {
  const json j = json::parse(text);
  SolveReport r;
  r.status = status_from(j.at("status").get<std::string>());
  r.message = j.at("message").get<std::string>();
  r.iters = j.at("iters").get<int>();
  r.polish_iters = j.at("polish_iters").get<int>();
  r.m_var = j.at("m_var").get<int>();
  r.m_con = j.at("m_con").get<int>();
  r.objective = num_from(j.at("objective"));
  r.throughput = nums_from(j.at("throughput"));
  r.throughput_relaxed = nums_from(j.at("throughput_relaxed"));
  r.objective_trace = nums_from(j.at("objective_trace"));
  r.polish_trace = nums_from(j.at("polish_trace"));
  for (const auto& e : j.at("iterations")) {
    IterationRecord it;
    it.iter = e.at("iter").get<int>();
    it.objective = num_from(e.at("objective"));
    it.surrogate = num_from(e.at("surrogate"));
    it.kkt_residual = num_from(e.at("kkt_residual"));
    it.newton_steps = e.at("newton_steps").get<int>();
    it.accepted = e.at("accepted").get<bool>();
    if (e.contains("wallclock")) it.wallclock = num_from(e.at("wallclock"));
    r.iterations.push_back(it);
  }
  r.audit = audit_from(j.at("audit"));
  if (j.contains("timings")) {
    r.wallclock_main = num_from(j.at("timings").at("main"));
    r.wallclock_polish = num_from(j.at("timings").at("polish"));
  }
  return r;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void export_bundle(const RunBundle& b, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir + "': " + ec.message());
  const std::filesystem::path d(dir);
  write_text((d / "results.json").string(), results_json(b));
  const int K = b.scenario.K;
  if (b.solution) {
    const double dt = b.sample_dt > 0.0 ? b.sample_dt : b.scenario.T / 1000.0;
    write_text((d / "trajectory.csv").string(), trajectory_csv(to_discrete(*b.solution, b.scenario, dt)));
    write_text((d / "schedule.csv").string(), schedule_csv(schedule_rows(*b.solution, b.scenario), K));
    write_text((d / "solution.json").string(), trajectory_to_json(*b.solution));
    if (b.relaxed) write_text((d / "relaxed.json").string(), trajectory_to_json(*b.relaxed));
  } else if (b.td_path) {
    write_text((d / "trajectory.csv").string(), trajectory_csv(*b.td_path));
    write_text((d / "schedule.csv").string(), schedule_csv(schedule_rows(*b.td_path), K));
    if (b.td_relaxed) write_text((d / "schedule_relaxed.csv").string(), schedule_csv(schedule_rows(*b.td_relaxed), K));
  }
}

std::string default_out_dir() {
  const char* env = std::getenv("COSHF_OUT_DIR");
  return env && *env ? std::string(env) : std::string("out");
}

}  // namespace uavsec
