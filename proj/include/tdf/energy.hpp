#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdf/errors.hpp"

namespace tdf::energy {

// The five measured operating conditions: resting clock activity, a single
// block in flight, and the three full-pipeline workloads.
enum class Mode { Idle, Low, High128, High256, HighBoth };

inline constexpr std::array<Mode, 5> kModes = {
    Mode::Idle, Mode::Low, Mode::High128, Mode::High256, Mode::HighBoth};

inline constexpr std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::Idle: return "idle";
    case Mode::Low: return "low";
    case Mode::High128: return "high128";
    case Mode::High256: return "high256";
    case Mode::HighBoth: return "highboth";
  }
  return "";
}

inline Mode mode_from_name(std::string_view n) {
  for (Mode m : kModes)
    if (mode_name(m) == n) return m;
  throw Error("unknown power mode \"" + std::string(n) + "\"");
}

// Average power of one design per mode, in milliwatts. Designs measured for
// a single standard leave the other modes absent.
struct PowerProfile {
  std::string design;
  std::map<Mode, double> mw;

  bool has(Mode m) const { return mw.count(m) > 0; }
  double at(Mode m) const {
    auto it = mw.find(m);
    if (it == mw.end())
      throw MissingProfile(design + " has no power figure for mode " +
                           std::string(mode_name(m)));
    return it->second;
  }
  void validate() const {
    for (const auto& [mode, value] : mw)
      if (value < 0)
        throw Error(design + ": negative power for " + std::string(mode_name(mode)));
    if (has(Mode::Idle))
      for (const auto& [mode, value] : mw)
        if (value < at(Mode::Idle))
          throw Error(design + ": " + std::string(mode_name(mode)) +
                      " power below idle");
  }
};

// Usage rates of the five modes. Rates are used exactly as printed, without
// renormalization; the sum window guards against typos in the inputs.
struct Scenario {
  int id = 0;
  std::array<double, 5> rates{};  // indexed by kModes order

  double rate(Mode m) const { return rates[static_cast<std::size_t>(m)]; }
  void validate() const {
    double sum = 0;
    for (double r : rates) {
      if (r < 0 || r > 1)
        throw Error("scenario " + std::to_string(id) + ": rates must be in [0,1]");
      sum += r;
    }
    if (sum < 0.98 || sum > 1.02)
      throw Error("scenario " + std::to_string(id) + ": rates sum to " +
                  std::to_string(sum) + ", outside [0.98, 1.02]");
  }
};

struct BatteryModel {
  double capacity_mah = 5000.0;
  double voltage_v = 3.7;
};

// Usage-weighted average power: sum of rate(mode) * power(mode). Modes with
// rate 0 need no power figure.
inline double weighted_power_mw(const PowerProfile& p, const Scenario& s) {
  double mw = 0;
  for (Mode m : kModes)
    if (s.rate(m) > 0) mw += s.rate(m) * p.at(m);
  return mw;
}

inline double battery_lifetime_h(double power_mw, const BatteryModel& b) {
  if (b.capacity_mah <= 0 || b.voltage_v <= 0)
    throw Error("battery capacity and voltage must be positive");
  if (power_mw <= 0) throw ZeroPower("power must be positive to bound lifetime");
  return b.capacity_mah * b.voltage_v / power_mw;
}

// Power of the parallel pair: the sum of the two single designs, with the
// inactive one at idle when only one algorithm runs.
inline PowerProfile compose_parallel(const PowerProfile& st128,
                                     const PowerProfile& st256) {
  PowerProfile p;
  p.design = "AES-PARALL";
  p.mw[Mode::Idle] = st128.at(Mode::Idle) + st256.at(Mode::Idle);
  p.mw[Mode::Low] = st128.at(Mode::Low) + st256.at(Mode::Low);
  p.mw[Mode::High128] = st128.at(Mode::High128) + st256.at(Mode::Idle);
  p.mw[Mode::High256] = st128.at(Mode::Idle) + st256.at(Mode::High256);
  p.mw[Mode::HighBoth] = st128.at(Mode::High128) + st256.at(Mode::High256);
  return p;
}

// Integer percentage variation of the reconfigurable design against the
// parallel one, as the power table prints it.
inline int power_delta_pct(double parall_mw, double reconf_mw) {
  return static_cast<int>(std::lround((reconf_mw - parall_mw) / reconf_mw * 100.0));
}

struct ModeComparison {
  Mode mode;
  double parall_mw = 0;
  double reconf_mw = 0;
  int delta_pct = 0;
};

struct ScenarioComparison {
  int scenario = 0;
  double parall_mw = 0;
  double reconf_mw = 0;
  double parall_lifetime_h = 0;
  double reconf_lifetime_h = 0;
  double lifetime_gain_pct = 0;  // reconf vs parall
};

struct DesignComparison {
  std::vector<ModeComparison> modes;
  std::vector<ScenarioComparison> scenarios;
  double avg_lifetime_gain_pct = 0;
};

inline const PowerProfile* find_profile(std::span<const PowerProfile> profiles,
                                        std::string_view design) {
  for (const auto& p : profiles)
    if (p.design == design) return &p;
  return nullptr;
}

// Per-mode and per-scenario comparison of AES-RECONF against AES-PARALL.
// The parallel profile is composed from the single designs when both are
// present, otherwise taken from the table as-is.
inline DesignComparison compare_designs(std::span<const PowerProfile> profiles,
                                        std::span<const Scenario> scenarios,
                                        const BatteryModel& battery) {
  const PowerProfile* reconf = find_profile(profiles, "AES-RECONF");
  if (!reconf) throw MissingProfile("no AES-RECONF profile");
  const PowerProfile* st128 = find_profile(profiles, "AES-128-ST");
  const PowerProfile* st256 = find_profile(profiles, "AES-256-ST");
  const PowerProfile* parall_listed = find_profile(profiles, "AES-PARALL");

  PowerProfile parall;
  if (st128 && st256) {
    parall = compose_parallel(*st128, *st256);
    if (parall_listed)
      for (Mode m : kModes)
        if (parall_listed->has(m) && parall_listed->at(m) != parall.at(m))
          throw Error("AES-PARALL table row disagrees with the composed value for " +
                      std::string(mode_name(m)));
  } else if (parall_listed) {
    parall = *parall_listed;
  } else {
    throw MissingProfile("need AES-PARALL or both single-design profiles");
  }

  DesignComparison cmp;
  for (Mode m : kModes) {
    if (!parall.has(m) || !reconf->has(m)) continue;
    cmp.modes.push_back({m, parall.at(m), reconf->at(m),
                         power_delta_pct(parall.at(m), reconf->at(m))});
  }
  double gain_sum = 0;
  for (const auto& s : scenarios) {
    ScenarioComparison sc;
    sc.scenario = s.id;
    sc.parall_mw = weighted_power_mw(parall, s);
    sc.reconf_mw = weighted_power_mw(*reconf, s);
    sc.parall_lifetime_h = battery_lifetime_h(sc.parall_mw, battery);
    sc.reconf_lifetime_h = battery_lifetime_h(sc.reconf_mw, battery);
    sc.lifetime_gain_pct =
        (sc.reconf_lifetime_h - sc.parall_lifetime_h) / sc.parall_lifetime_h * 100.0;
    gain_sum += sc.lifetime_gain_pct;
    cmp.scenarios.push_back(sc);
  }
  if (!cmp.scenarios.empty())
    cmp.avg_lifetime_gain_pct = gain_sum / static_cast<double>(cmp.scenarios.size());
  return cmp;
}

namespace detail {

inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      // trim
      const auto a = cell.find_first_not_of(" \t");
      const auto b = cell.find_last_not_of(" \t");
      row.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

// power.csv: header design,mode,mw; one row per measured (design, mode).
inline std::vector<PowerProfile> load_power_csv(std::string_view text) {
  auto rows = detail::parse_csv(text);
  if (rows.empty() || rows.front() != std::vector<std::string>{"design", "mode", "mw"})
    throw Error("power csv must start with header design,mode,mw");
  std::vector<PowerProfile> profiles;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 3) throw Error("power csv row " + std::to_string(i) + " malformed");
    PowerProfile* p = nullptr;
    for (auto& existing : profiles)
      if (existing.design == row[0]) p = &existing;
    if (!p) {
      profiles.push_back({row[0], {}});
      p = &profiles.back();
    }
    p->mw[mode_from_name(row[1])] = std::stod(row[2]);
  }
  for (const auto& p : profiles) p.validate();
  return profiles;
}

// scenarios.csv: header id,idle,low,high128,high256,highboth.
inline std::vector<Scenario> load_scenarios_csv(std::string_view text) {
  auto rows = detail::parse_csv(text);
  const std::vector<std::string> header = {"id",      "idle",     "low",
                                           "high128", "high256", "highboth"};
  if (rows.empty() || rows.front() != header)
    throw Error("scenarios csv must start with header id,idle,low,high128,high256,highboth");
  std::vector<Scenario> scenarios;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 6)
      throw Error("scenarios csv row " + std::to_string(i) + " malformed");
    Scenario s;
    s.id = std::stoi(row[0]);
    for (std::size_t m = 0; m < 5; ++m) s.rates[m] = std::stod(row[m + 1]);
    s.validate();
    scenarios.push_back(s);
  }
  return scenarios;
}

inline std::string lifetime_csv(const DesignComparison& cmp) {
  std::ostringstream out;
  out << "scenario,design,power_mw,lifetime_h\n";
  auto row = [&](int scenario, const char* design, double mw, double h) {
    out << scenario << ',' << design << ',' << mw << ',' << h << '\n';
  };
  for (const auto& sc : cmp.scenarios) {
    row(sc.scenario, "AES-PARALL", sc.parall_mw, sc.parall_lifetime_h);
    row(sc.scenario, "AES-RECONF", sc.reconf_mw, sc.reconf_lifetime_h);
  }
  return out.str();
}

// Per-scenario lifetime bars for external plotting.
inline nlohmann::json lifetime_plot_json(const DesignComparison& cmp,
                                         const BatteryModel& battery) {
  nlohmann::json j;
  j["battery_mah"] = battery.capacity_mah;
  j["voltage_v"] = battery.voltage_v;
  j["scenarios"] = nlohmann::json::array();
  nlohmann::json parall = nlohmann::json::array();
  nlohmann::json reconf = nlohmann::json::array();
  nlohmann::json gains = nlohmann::json::array();
  for (const auto& sc : cmp.scenarios) {
    j["scenarios"].push_back(sc.scenario);
    parall.push_back(sc.parall_lifetime_h);
    reconf.push_back(sc.reconf_lifetime_h);
    gains.push_back(sc.lifetime_gain_pct);
  }
  j["lifetime_h"]["AES-PARALL"] = std::move(parall);
  j["lifetime_h"]["AES-RECONF"] = std::move(reconf);
  j["lifetime_gain_pct"] = std::move(gains);
  j["avg_lifetime_gain_pct"] = cmp.avg_lifetime_gain_pct;
  return j;
}

}  // namespace tdf::energy
