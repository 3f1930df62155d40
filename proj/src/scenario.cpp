#include "coshf/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace uavsec {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ScenarioError("key '" + key + "': not a number: '" + s + "'");
  if (!std::isfinite(v)) throw ScenarioError("key '" + key + "': non-finite value");
  return v;
}

Vec2 parse_point(const std::string& key, const std::string& raw) {
  const auto comma = raw.find(',');
  if (comma == std::string::npos)
    throw ScenarioError("key '" + key + "': expected 'x,y', got '" + trim(raw) + "'");
  return {parse_number(key, raw.substr(0, comma)), parse_number(key, raw.substr(comma + 1))};
}

std::vector<Vec2> parse_points(const std::string& key, const std::string& raw) {
  std::vector<Vec2> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_point(key, item));
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt(const Vec2& p) { return fmt(p.x()) + "," + fmt(p.y()); }

class KeyTable {
 public:
  explicit KeyTable(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& k) const { return kv_.count(k) != 0; }

  const std::string& take(const std::string& k) {
    auto it = kv_.find(k);
    if (it == kv_.end()) throw ScenarioError("missing key '" + k + "'");
    used_.push_back(k);
    return it->second;
  }

  double number(const std::string& k) { return parse_number(k, take(k)); }
  Vec2 point(const std::string& k) { return parse_point(k, take(k)); }

  // Exactly one of the unit variants must be present.
  double power(const std::string& base) {
    const bool w = has(base + "_W"), mw = has(base + "_mW"), dbm = has(base + "_dBm");
    if (int(w) + int(mw) + int(dbm) > 1)
      throw ScenarioError("key '" + base + "' given in more than one unit");
    if (w) return number(base + "_W");
    if (mw) return number(base + "_mW") * 1e-3;
    if (dbm) return dbm_to_watts(number(base + "_dBm"));
    throw ScenarioError("missing key '" + base + "_W' (or _mW/_dBm)");
  }

  void reject_unused() const {
    for (const auto& [k, v] : kv_) {
      bool used = false;
      for (const auto& u : used_) used = used || u == k;
      if (!used) throw ScenarioError("unknown key '" + k + "'");
    }
  }

 private:
  std::map<std::string, std::string> kv_;
  std::vector<std::string> used_;
};

}  // namespace

void validate(const Scenario& sc) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ScenarioError(std::string("invariant violated: ") + what);
  };
  require(sc.K >= 1, "K >= 1");
  require(static_cast<int>(sc.gu_pos.size()) == sc.K, "one position per user");
  require(sc.N >= 0, "N >= 0");
  auto finite = [](const Vec2& p) { return std::isfinite(p.x()) && std::isfinite(p.y()); };
  for (const auto& p : sc.gu_pos) require(finite(p), "finite user positions");
  require(finite(sc.eve_pos) && finite(sc.start_S) && finite(sc.end_S) && finite(sc.start_J) &&
              finite(sc.end_J),
          "finite positions");
  require(std::isfinite(sc.T) && sc.T > 0, "T > 0");
  require(std::isfinite(sc.V) && sc.V > 0, "V > 0");
  require(std::isfinite(sc.d_min) && sc.d_min >= 0, "d_min >= 0");
  require(std::isfinite(sc.alt) && sc.alt > 0, "alt > 0");
  require(std::isfinite(sc.P_S) && sc.P_S >= 0 && std::isfinite(sc.P_J) && sc.P_J >= 0,
          "powers >= 0");
  require(std::isfinite(sc.beta0) && sc.beta0 > 0, "beta0 > 0");
  require(std::isfinite(sc.sigma2_gu) && sc.sigma2_gu > 0 && std::isfinite(sc.sigma2_eve) &&
              sc.sigma2_eve > 0,
          "noise powers > 0");
  require((sc.start_S - sc.start_J).norm() >= sc.d_min, "initial separation below d_min");
  require((sc.end_S - sc.end_J).norm() >= sc.d_min, "final separation below d_min");
  const double reach =
      std::max((sc.start_S - sc.end_S).norm(), (sc.start_J - sc.end_J).norm()) / sc.V;
  require(sc.T >= reach, "T >= max_u |start_u - end_u| / V (reachability)");
}

Scenario parse_scenario(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ScenarioError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (!kv.emplace(key, line.substr(eq + 1)).second)
      throw ScenarioError("duplicate key '" + key + "'");
  }

  KeyTable t(std::move(kv));
  Scenario sc;
  const double K = t.number("K");
  if (K != std::floor(K)) throw ScenarioError("key 'K': not an integer");
  sc.K = static_cast<int>(K);
  if (t.has("N")) {
    const double N = t.number("N");
    if (N != std::floor(N)) throw ScenarioError("key 'N': not an integer");
    sc.N = static_cast<int>(N);
  }
  sc.gu_pos = parse_points("gu_m", t.take("gu_m"));
  sc.eve_pos = t.point("eve_m");
  if (t.has("alt_m")) sc.alt = t.number("alt_m");
  sc.T = t.number("T_s");
  sc.V = t.number("V_mps");
  sc.d_min = t.number("d_min_m");
  sc.P_S = t.power("P_S");
  sc.P_J = t.power("P_J");
  if (t.has("beta0") && t.has("beta0_dB"))
    throw ScenarioError("key 'beta0' given in more than one unit");
  sc.beta0 = t.has("beta0_dB") ? db_to_linear(t.number("beta0_dB")) : t.number("beta0");
  if (t.has("noise_dBm")) {
    sc.sigma2_gu = sc.sigma2_eve = dbm_to_watts(t.number("noise_dBm"));
  } else {
    sc.sigma2_gu = t.power("sigma2_gu");
    sc.sigma2_eve = t.power("sigma2_eve");
  }
  sc.start_S = t.point("start_S_m");
  sc.end_S = t.point("end_S_m");
  sc.start_J = t.point("start_J_m");
  sc.end_J = t.point("end_J_m");
  t.reject_unused();
  validate(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& sc) {
  std::string gu;
  for (std::size_t k = 0; k < sc.gu_pos.size(); ++k) gu += (k ? "; " : "") + fmt(sc.gu_pos[k]);
  std::ostringstream os;
  os << "K = " << sc.K << "\n"
     << "N = " << sc.N << "\n"
     << "gu_m = " << gu << "\n"
     << "eve_m = " << fmt(sc.eve_pos) << "\n"
     << "alt_m = " << fmt(sc.alt) << "\n"
     << "T_s = " << fmt(sc.T) << "\n"
     << "V_mps = " << fmt(sc.V) << "\n"
     << "d_min_m = " << fmt(sc.d_min) << "\n"
     << "P_S_W = " << fmt(sc.P_S) << "\n"
     << "P_J_W = " << fmt(sc.P_J) << "\n"
     << "beta0 = " << fmt(sc.beta0) << "\n"
     << "sigma2_gu_W = " << fmt(sc.sigma2_gu) << "\n"
     << "sigma2_eve_W = " << fmt(sc.sigma2_eve) << "\n"
     << "start_S_m = " << fmt(sc.start_S) << "\n"
     << "end_S_m = " << fmt(sc.end_S) << "\n"
     << "start_J_m = " << fmt(sc.start_J) << "\n"
     << "end_J_m = " << fmt(sc.end_J) << "\n";
  return os.str();
}

Scenario random_scenario(std::uint64_t seed, int K, double area) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, area);
  Scenario sc;
  sc.K = K;
  for (int k = 0; k < K; ++k) {
    const double x = u(rng);
    sc.gu_pos.emplace_back(x, u(rng));
  }
  const double ex = u(rng);
  sc.eve_pos = Vec2(ex, u(rng));
  sc.alt = 100.0;
  sc.T = 150.0;
  sc.V = 10.0;
  sc.d_min = 3.0;
  sc.P_S = 10e-3;
  sc.P_J = 1e-3;
  sc.beta0 = db_to_linear(-30.0);
  sc.sigma2_gu = dbm_to_watts(-80.0);
  sc.sigma2_eve = dbm_to_watts(-80.0);
  sc.start_S = Vec2(0.9 * area, 0.9 * area);
  sc.end_S = Vec2(0.9 * area, 0.1 * area);
  sc.start_J = Vec2(0.1 * area, 0.9 * area);
  sc.end_J = Vec2(0.1 * area, 0.1 * area);
  sc.N = 1;
  return sc;
}

Scenario default_scenario() { return random_scenario(1, 4, 500.0); }

}  // namespace uavsec
