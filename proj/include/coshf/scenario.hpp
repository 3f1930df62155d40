#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace uavsec {

using Vec2 = Eigen::Vector2d;

/// Thrown when a scenario document is malformed or violates a physical invariant.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable mission description. All quantities are linear SI units:
/// meters, seconds, watts, and a linear reference gain at 1 m.
struct Scenario {
  int K = 0;                  // ground users
  std::vector<Vec2> gu_pos;   // K horizontal user positions
  Vec2 eve_pos = Vec2::Zero();
  double alt = 100.0;         // common flight altitude H
  double T = 0.0;             // mission time
  double V = 0.0;             // max horizontal speed
  double d_min = 0.0;         // inter-UAV safety distance
  double P_S = 0.0;           // transmitter power
  double P_J = 0.0;           // jammer power
  double beta0 = 0.0;         // power gain at 1 m
  double sigma2_gu = 0.0;     // noise power at users
  double sigma2_eve = 0.0;    // noise power at the eavesdropper
  Vec2 start_S = Vec2::Zero(), end_S = Vec2::Zero();
  Vec2 start_J = Vec2::Zero(), end_J = Vec2::Zero();
  int N = 1;                  // turning points per inter-hover leg

  bool operator==(const Scenario&) const = default;
};

double db_to_linear(double db);
double dbm_to_watts(double dbm);

/// Throws ScenarioError naming the first violated invariant.
void validate(const Scenario& sc);

/// Parses a flat `key = value` document. Unit-suffixed keys (`_dB`, `_dBm`,
/// `_mW`, `_W`, `_m`, `_s`, `_mps`) are converted to linear SI.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Writes the canonical linear-SI form; parse_scenario(serialize(s)) == s.
std::string serialize_scenario(const Scenario& sc);

/// Users and eavesdropper uniform in [0, area]^2, corner start/end points,
/// remaining parameters at their nominal values. Deterministic per seed.
Scenario random_scenario(std::uint64_t seed, int K, double area = 500.0);

/// Nominal evaluation scenario: random_scenario(1, 4, 500).
Scenario default_scenario();

}  // namespace uavsec
