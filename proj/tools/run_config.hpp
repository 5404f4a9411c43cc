#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aimd/evaluate.hpp"
#include "aimd/model.hpp"
#include "aimd/validate.hpp"

namespace aimd::cli {

enum class KeyType { Number, Integer, Text, Flag, NumberList, TextList };

struct KeyInfo {
  const char* name;
  KeyType type;
  const char* help;
};

// Keys shared by flags, config files and the JSON config echo, in echo order.
inline const std::vector<KeyInfo>& keys() {
  static const std::vector<KeyInfo> table = {
      {"kind", KeyType::Text, "exit kind"},
      {"lambda", KeyType::Number, "jump rate"},
      {"p", KeyType::Number, "multiplicative jump factor in (0,1)"},
      {"beta", KeyType::Number, "growth slope"},
      {"x", KeyType::Number, "initial level"},
      {"a", KeyType::Number, "upper level"},
      {"b", KeyType::Number, "lower level"},
      {"c", KeyType::Number, "reflecting level or drawdown/drawup size"},
      {"u", KeyType::Number, "initial running infimum (drawup)"},
      {"xbar0", KeyType::Number, "initial running supremum (drawdown)"},
      {"w", KeyType::NumberList, "Laplace argument(s)"},
      {"point", KeyType::TextList, "grid point as key=value,key=value,..."},
      {"suite", KeyType::Text, "named grid (default)"},
      {"param", KeyType::Text, "swept parameter"},
      {"values", KeyType::NumberList, "swept values"},
      {"paths", KeyType::Integer, "Monte Carlo paths per point"},
      {"seed", KeyType::Integer, "base seed"},
      {"cap", KeyType::Number, "horizon cap (0 selects the default)"},
      {"threshold", KeyType::Number, "z-score pass threshold"},
      {"retry", KeyType::Flag, "reseeded retry on failure"},
      {"format", KeyType::Text, "csv or json"},
      {"output", KeyType::Text, "output path (stdout if empty)"},
      {"series-rel-tol", KeyType::Number, "series relative tolerance"},
      {"max-terms", KeyType::Integer, "series term cap"},
      {"quad-abs-tol", KeyType::Number, "quadrature absolute tolerance"},
      {"quad-rel-tol", KeyType::Number, "quadrature relative tolerance"},
      {"max-subdivisions", KeyType::Integer, "quadrature panel cap"},
      {"tail-tol", KeyType::Number, "drawdown tail cutoff"},
      {"rel-step", KeyType::Number, "finite-difference relative step"},
      {"extrapolation", KeyType::Flag, "Richardson extrapolation of differences"},
      {"points-per-efold", KeyType::Number, "drawup renewal grid density"},
      {"floor-ratio", KeyType::Number, "drawup renewal grid floor"},
      {"root-tol", KeyType::Number, "level root tolerance"},
  };
  return table;
}

inline const KeyInfo& key_info(const std::string& name) {
  for (const KeyInfo& k : keys()) {
    if (name == k.name) return k;
  }
  throw ConfigError("unknown key '" + name + "'");
}

inline std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a number");
  }
  return v;
}

inline std::uint64_t parse_integer(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a nonnegative integer");
  }
  return v;
}

inline bool parse_flag(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "on") return true;
  if (text == "false" || text == "0" || text == "off") return false;
  throw ConfigError("key '" + key + "': '" + text + "' is not a boolean");
}

inline std::string trim(const std::string& s) {
  const auto lo = s.find_first_not_of(" \t\r");
  if (lo == std::string::npos) return "";
  const auto hi = s.find_last_not_of(" \t\r");
  return s.substr(lo, hi - lo + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

enum class Command { Eval, Simulate, Compare, Sweep };

inline std::string to_string(Command c) {
  switch (c) {
    case Command::Eval: return "eval";
    case Command::Simulate: return "simulate";
    case Command::Compare: return "compare";
    case Command::Sweep: return "sweep";
  }
  return "eval";
}

inline Command parse_command(const std::string& s) {
  if (s == "eval") return Command::Eval;
  if (s == "simulate") return Command::Simulate;
  if (s == "compare") return Command::Compare;
  if (s == "sweep") return Command::Sweep;
  throw ConfigError("unknown command '" + s + "'");
}

// key -> raw values; later sources replace whole entries
using KeyValues = std::map<std::string, std::vector<std::string>>;

inline void merge(KeyValues& into, const KeyValues& from) {
  for (const auto& [k, v] : from) into[k] = v;
}

inline KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  KeyValues kv;
  std::map<std::string, bool> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const KeyInfo& info = key_info(key);
    const bool list = info.type == KeyType::NumberList || info.type == KeyType::TextList;
    if (!list || !seen[key]) kv[key].clear();
    seen[key] = true;
    kv[key].push_back(value);
  }
  return kv;
}

inline KeyValues environment_defaults() {
  KeyValues kv;
  if (const char* s = std::getenv("AIMD_SEED"); s != nullptr && *s != '\0') kv["seed"] = {s};
  return kv;
}

struct RunConfig {
  Command command = Command::Eval;
  ModelParams params;
  std::optional<ExitKind> kind;
  ExitSpec spec;
  std::vector<double> w{1.0};
  std::vector<std::string> points;
  std::string suite;
  std::string param;
  std::vector<double> values;
  std::uint64_t paths = 1000000;
  std::uint64_t seed = 1;
  double cap = 0.0;
  double threshold = 3.0;
  bool retry = true;
  std::string format = "csv";
  std::string output;
  Controls controls;
  unsigned threads = 1;  // never echoed: output must not depend on it

  static RunConfig defaults_for(Command c) {
    RunConfig rc;
    rc.command = c;
    if (c == Command::Sweep) rc.paths = 0;
    return rc;
  }
};

inline bool operator==(const RunConfig& l, const RunConfig& r);

namespace detail {

inline std::vector<double> number_list(const std::string& key, const std::vector<std::string>& raw) {
  std::vector<double> out;
  for (const std::string& item : raw) {
    for (const std::string& part : split(item, ',')) {
      if (!part.empty()) out.push_back(parse_number(key, part));
    }
  }
  return out;
}

inline const std::string& single(const std::string& key, const std::vector<std::string>& raw) {
  if (raw.size() != 1) throw ConfigError("key '" + key + "' takes exactly one value");
  return raw.front();
}

}  // namespace detail

inline void apply(RunConfig& rc, const std::string& key, const std::vector<std::string>& raw) {
  key_info(key);
  auto num = [&] { return parse_number(key, detail::single(key, raw)); };
  auto integer = [&] { return parse_integer(key, detail::single(key, raw)); };
  auto text = [&] { return detail::single(key, raw); };
  auto flag = [&] { return parse_flag(key, detail::single(key, raw)); };
  if (key == "kind") rc.kind = parse_kind(text());
  else if (key == "lambda") rc.params.lambda = num();
  else if (key == "p") rc.params.p = num();
  else if (key == "beta") rc.params.beta = num();
  else if (key == "x") rc.spec.x = num();
  else if (key == "a") rc.spec.a = num();
  else if (key == "b") rc.spec.b = num();
  else if (key == "c") rc.spec.c = num();
  else if (key == "u") rc.spec.u = num();
  else if (key == "xbar0") rc.spec.xbar0 = num();
  else if (key == "w") rc.w = detail::number_list(key, raw);
  else if (key == "point") rc.points = raw;
  else if (key == "suite") rc.suite = text();
  else if (key == "param") rc.param = text();
  else if (key == "values") rc.values = detail::number_list(key, raw);
  else if (key == "paths") rc.paths = integer();
  else if (key == "seed") rc.seed = integer();
  else if (key == "cap") rc.cap = num();
  else if (key == "threshold") rc.threshold = num();
  else if (key == "retry") rc.retry = flag();
  else if (key == "format") rc.format = text();
  else if (key == "output") rc.output = text();
  else if (key == "series-rel-tol") rc.controls.series.rel_tol = num();
  else if (key == "max-terms") rc.controls.series.max_terms = static_cast<int>(integer());
  else if (key == "quad-abs-tol") rc.controls.quadrature.abs_tol = num();
  else if (key == "quad-rel-tol") rc.controls.quadrature.rel_tol = num();
  else if (key == "max-subdivisions") rc.controls.quadrature.max_subdivisions = static_cast<int>(integer());
  else if (key == "tail-tol") rc.controls.quadrature.tail_cutoff_tol = num();
  else if (key == "rel-step") rc.controls.derivative.rel_step = num();
  else if (key == "extrapolation") rc.controls.derivative.use_extrapolation = flag();
  else if (key == "points-per-efold") rc.controls.renewal.points_per_efold = num();
  else if (key == "floor-ratio") rc.controls.renewal.floor_ratio = num();
  else if (key == "root-tol") rc.controls.root_tol = num();
}

inline void check_config(const RunConfig& rc) {
  if (rc.format != "csv" && rc.format != "json") {
    throw ConfigError("format must be csv or json, got '" + rc.format + "'");
  }
  if (rc.w.empty()) throw ConfigError("w list is empty");
  if (!rc.suite.empty() && rc.suite != "default") {
    throw ConfigError("unknown suite '" + rc.suite + "'");
  }
  rc.controls.series.validate();
  rc.controls.quadrature.validate();
  rc.controls.derivative.validate();
  rc.controls.renewal.validate();
  aimd::detail::require(rc.controls.root_tol > 0.0, "root-tol must be > 0");
  aimd::detail::require(rc.threshold > 0.0, "threshold must be > 0");
  if (rc.command == Command::Simulate) aimd::detail::require(rc.paths >= 1, "paths must be >= 1");
  if (rc.command == Command::Sweep) {
    if (rc.param.empty()) throw ConfigError("sweep needs param");
    if (rc.values.empty()) throw ConfigError("sweep needs values");
  }
}

inline RunConfig resolve(Command c, const KeyValues& kv) {
  RunConfig rc = RunConfig::defaults_for(c);
  for (const auto& [k, v] : kv) apply(rc, k, v);
  check_config(rc);
  return rc;
}

// Resolved configuration as ordered key -> textual values.
inline std::vector<std::pair<std::string, std::vector<std::string>>> echo(const RunConfig& rc) {
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  auto put = [&](const char* k, std::vector<std::string> v) { out.emplace_back(k, std::move(v)); };
  auto n = [](double v) { return std::vector<std::string>{format_number(v)}; };
  auto i = [](std::uint64_t v) { return std::vector<std::string>{std::to_string(v)}; };
  auto t = [](const std::string& v) { return std::vector<std::string>{v}; };
  auto f = [](bool v) { return std::vector<std::string>{v ? "true" : "false"}; };
  auto nl = [](const std::vector<double>& v) {
    std::vector<std::string> s;
    for (double d : v) s.push_back(format_number(d));
    return s;
  };
  if (rc.kind) put("kind", t(std::string(aimd::to_string(*rc.kind))));
  put("lambda", n(rc.params.lambda));
  put("p", n(rc.params.p));
  put("beta", n(rc.params.beta));
  put("x", n(rc.spec.x));
  put("a", n(rc.spec.a));
  put("b", n(rc.spec.b));
  put("c", n(rc.spec.c));
  put("u", n(rc.spec.u));
  if (rc.spec.xbar0) put("xbar0", n(*rc.spec.xbar0));
  put("w", nl(rc.w));
  if (!rc.points.empty()) put("point", rc.points);
  if (!rc.suite.empty()) put("suite", t(rc.suite));
  if (!rc.param.empty()) put("param", t(rc.param));
  if (!rc.values.empty()) put("values", nl(rc.values));
  put("paths", i(rc.paths));
  put("seed", i(rc.seed));
  put("cap", n(rc.cap));
  put("threshold", n(rc.threshold));
  put("retry", f(rc.retry));
  put("format", t(rc.format));
  if (!rc.output.empty()) put("output", t(rc.output));
  put("series-rel-tol", n(rc.controls.series.rel_tol));
  put("max-terms", i(static_cast<std::uint64_t>(rc.controls.series.max_terms)));
  put("quad-abs-tol", n(rc.controls.quadrature.abs_tol));
  put("quad-rel-tol", n(rc.controls.quadrature.rel_tol));
  put("max-subdivisions", i(static_cast<std::uint64_t>(rc.controls.quadrature.max_subdivisions)));
  put("tail-tol", n(rc.controls.quadrature.tail_cutoff_tol));
  put("rel-step", n(rc.controls.derivative.rel_step));
  put("extrapolation", f(rc.controls.derivative.use_extrapolation));
  put("points-per-efold", n(rc.controls.renewal.points_per_efold));
  put("floor-ratio", n(rc.controls.renewal.floor_ratio));
  put("root-tol", n(rc.controls.root_tol));
  return out;
}

inline nlohmann::ordered_json to_json(const RunConfig& rc) {
  nlohmann::ordered_json j;
  j["command"] = to_string(rc.command);
  for (const auto& [k, v] : echo(rc)) {
    switch (key_info(k).type) {
      case KeyType::Number: j[k] = parse_number(k, v.front()); break;
      case KeyType::Integer: j[k] = parse_integer(k, v.front()); break;
      case KeyType::Flag: j[k] = v.front() == "true"; break;
      case KeyType::Text: j[k] = v.front(); break;
      case KeyType::NumberList: {
        auto arr = nlohmann::ordered_json::array();
        for (const std::string& s : v) arr.push_back(parse_number(k, s));
        j[k] = arr;
        break;
      }
      case KeyType::TextList: j[k] = v; break;
    }
  }
  return j;
}

inline RunConfig from_json(const nlohmann::ordered_json& j) {
  const Command c = parse_command(j.at("command").get<std::string>());
  KeyValues kv;
  for (const auto& [k, v] : j.items()) {
    if (k == "command") continue;
    std::vector<std::string> raw;
    auto one = [](const nlohmann::ordered_json& e) -> std::string {
      if (e.is_string()) return e.get<std::string>();
      if (e.is_boolean()) return e.get<bool>() ? "true" : "false";
      if (e.is_number_unsigned()) return std::to_string(e.get<std::uint64_t>());
      return format_number(e.get<double>());
    };
    if (v.is_array()) {
      for (const auto& e : v) raw.push_back(one(e));
    } else {
      raw.push_back(one(v));
    }
    kv[k] = raw;
  }
  return resolve(c, kv);
}

inline bool operator==(const RunConfig& l, const RunConfig& r) {
  return to_json(l) == to_json(r);
}

// Grid point from "key=value,key=value" over the model and level keys.
inline check::GridPoint parse_point(const std::string& text, const RunConfig& base) {
  RunConfig rc = base;
  rc.w = {base.w.front()};
  for (const std::string& item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("point '" + text + "': expected key=value");
    const std::string key = trim(item.substr(0, eq));
    static const char* allowed[] = {"kind", "lambda", "p", "beta", "x", "a", "b", "c", "u", "xbar0", "w"};
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("point '" + text + "': key '" + key + "' not allowed");
    apply(rc, key, {trim(item.substr(eq + 1))});
  }
  if (!rc.kind) throw ConfigError("point '" + text + "': missing kind");
  if (rc.w.size() != 1) throw ConfigError("point '" + text + "': one w per point");
  check::GridPoint gp;
  gp.spec = rc.spec;
  gp.spec.kind = *rc.kind;
  gp.params = rc.params;
  gp.w = LaplaceArg{rc.w.front()};
  return gp;
}

}  // namespace aimd::cli
