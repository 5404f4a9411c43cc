#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aimd/evaluate.hpp"
#include "aimd/simulator.hpp"
#include "aimd/validate.hpp"
#include "run_config.hpp"

namespace {

using namespace aimd;
using aimd::cli::Command;
using aimd::cli::RunConfig;
using Json = nlohmann::ordered_json;

using Cell = std::variant<std::monostate, double, std::uint64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;  // per-row errors
  std::optional<Json> summary;
  std::string summary_line;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (std::holds_alternative<double>(c)) {
    const double v = std::get<double>(c);
    return std::isfinite(v) ? cli::format_number(v) : "";
  }
  if (std::holds_alternative<std::uint64_t>(c)) return std::to_string(std::get<std::uint64_t>(c));
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  return "";
}

Json cell_json(const Cell& c) {
  if (std::holds_alternative<double>(c)) {
    const double v = std::get<double>(c);
    return std::isfinite(v) ? Json(v) : Json(nullptr);
  }
  if (std::holds_alternative<std::uint64_t>(c)) return std::get<std::uint64_t>(c);
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  return nullptr;
}

std::string render(const RunConfig& rc, const Table& t) {
  std::ostringstream out;
  if (rc.format == "json") {
    Json j;
    j["config"] = cli::to_json(rc);
    auto rows = Json::array();
    for (const auto& r : t.rows) {
      Json o;
      for (std::size_t i = 0; i < t.columns.size(); ++i) o[t.columns[i]] = cell_json(r[i]);
      rows.push_back(o);
    }
    j["rows"] = rows;
    j["summary"] = t.summary ? *t.summary : Json::object();
    out << j.dump(2) << "\n";
    return out.str();
  }
  out << "# command=" << cli::to_string(rc.command) << "\n";
  for (const auto& [k, vals] : cli::echo(rc)) {
    for (const std::string& v : vals) out << "# " << k << "=" << v << "\n";
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_field(cell_text(r[i]));
    out << "\n";
  }
  for (const std::string& n : t.notes) out << "# " << n << "\n";
  if (!t.summary_line.empty()) out << "# " << t.summary_line << "\n";
  return out.str();
}

std::vector<check::GridPoint> build_grid(const RunConfig& rc) {
  if (rc.suite == "default") return check::default_grid();
  std::vector<check::GridPoint> grid;
  if (!rc.points.empty()) {
    for (const std::string& p : rc.points) grid.push_back(cli::parse_point(p, rc));
    return grid;
  }
  if (!rc.kind) throw ConfigError("no kind, point or suite given");
  for (double w : rc.w) {
    check::GridPoint gp;
    gp.spec = rc.spec;
    gp.spec.kind = *rc.kind;
    gp.params = rc.params;
    gp.w = LaplaceArg{w};
    grid.push_back(gp);
  }
  return grid;
}

std::vector<Cell> point_cells(const check::GridPoint& gp, bool with_extras) {
  std::vector<Cell> r{std::string(to_string(gp.spec.kind)), gp.params.lambda, gp.params.p};
  if (with_extras) r.emplace_back(gp.params.beta);
  r.insert(r.end(), {gp.w.w, gp.spec.x, gp.spec.a, gp.spec.b, gp.spec.c, gp.spec.u});
  if (with_extras) r.emplace_back(gp.spec.xbar0 ? Cell(*gp.spec.xbar0) : Cell());
  return r;
}

const std::vector<std::string> kPointColumns = {"kind", "lambda", "p", "beta", "w", "x",
                                                "a", "b", "c", "u", "xbar0"};
const std::vector<std::string> kCompareColumns = {
    "kind", "lambda", "p", "w", "x", "a", "b", "c", "u",
    "analytic", "mc_mean", "mc_stderr", "z_score", "verdict"};

sim::McConfig mc_config(const RunConfig& rc) {
  sim::McConfig cfg;
  cfg.n_paths = rc.paths;
  cfg.seed = rc.seed;
  cfg.horizon_cap = rc.cap;
  cfg.threads = rc.threads;
  return cfg;
}

Table cmd_eval(const RunConfig& rc) {
  Table t;
  t.columns = kPointColumns;
  for (const char* c : {"value", "terms", "precision_bits", "quadrature_error", "level_a",
                        "root_residual", "boundary_residual"}) {
    t.columns.emplace_back(c);
  }
  for (const check::GridPoint& gp : build_grid(rc)) {
    const Evaluation ev = evaluate(gp.params, gp.spec, gp.w, rc.controls, true);
    std::vector<Cell> r = point_cells(gp, true);
    auto opt = [](const std::optional<double>& v) { return v ? Cell(*v) : Cell(); };
    r.insert(r.end(), {ev.value, static_cast<std::uint64_t>(ev.terms),
                       static_cast<std::uint64_t>(ev.precision_bits), ev.quadrature_error,
                       opt(ev.level_a), opt(ev.root_residual), opt(ev.boundary_residual)});
    t.rows.push_back(std::move(r));
  }
  return t;
}

Table cmd_simulate(const RunConfig& rc) {
  Table t;
  t.columns = kPointColumns;
  for (const char* c : {"mc_mean", "mc_stderr", "n_paths", "n_censored", "seed"}) {
    t.columns.emplace_back(c);
  }
  for (const check::GridPoint& gp : build_grid(rc)) {
    const NormalizedProblem np = normalize(gp.params, gp.spec, gp.w);
    sim::McConfig cfg = mc_config(rc);
    cfg.w = np.w;
    const sim::McEstimate e = sim::mc_lst(np.spec, np.params, cfg);
    std::vector<Cell> r = point_cells(gp, true);
    r.insert(r.end(), {e.mean, e.std_error, e.n_paths, e.n_censored, e.seed});
    t.rows.push_back(std::move(r));
  }
  return t;
}

void set_param(check::GridPoint& gp, const std::string& name, double v) {
  if (name == "lambda") gp.params.lambda = v;
  else if (name == "p") gp.params.p = v;
  else if (name == "beta") gp.params.beta = v;
  else if (name == "w") gp.w.w = v;
  else if (name == "x") gp.spec.x = v;
  else if (name == "a") gp.spec.a = v;
  else if (name == "b") gp.spec.b = v;
  else if (name == "c") gp.spec.c = v;
  else if (name == "u") gp.spec.u = v;
  else if (name == "xbar0") gp.spec.xbar0 = v;
  else throw ConfigError("cannot sweep '" + name + "'");
}

// One-sided limit of a two-sided transform: z_down as a grows, z_up as b shrinks.
std::optional<double> limit_value(const check::GridPoint& gp, const Controls& ctl) {
  ExitSpec s = gp.spec;
  if (s.kind == ExitKind::TwoSidedDown) s.kind = ExitKind::DownOne;
  else if (s.kind == ExitKind::TwoSidedUp) s.kind = ExitKind::UpOne;
  else return std::nullopt;
  return evaluate(gp.params, s, gp.w, ctl).value;
}

void append_rows(Table& t, const std::vector<check::ComparisonRow>& rows, bool with_mc,
                 const std::vector<std::optional<double>>* limits) {
  std::size_t ok = 0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const check::ComparisonRow& row = rows[i];
    std::vector<Cell> r = point_cells(row.point, false);
    std::string verdict;
    if (row.error) {
      ++errors;
      verdict = "error";
      t.notes.push_back("row " + std::to_string(i) + " error: " + *row.error);
      r.insert(r.end(), {Cell(), Cell(), Cell(), Cell()});
    } else if (!with_mc) {
      verdict = "skip";
      ++ok;
      r.insert(r.end(), {row.analytic, Cell(), Cell(), Cell()});
    } else {
      verdict = row.pass ? "pass" : "fail";
      if (row.pass) ++ok;
      r.insert(r.end(), {row.analytic, row.mc.mean, row.mc.std_error, row.z_score});
    }
    r.emplace_back(verdict);
    if (limits) r.emplace_back((*limits)[i] ? Cell(*(*limits)[i]) : Cell());
    t.rows.push_back(std::move(r));
  }
  t.summary_line = "pass " + std::to_string(ok) + "/" + std::to_string(rows.size());
  Json s;
  s["passed"] = ok;
  s["total"] = rows.size();
  s["errors"] = errors;
  s["status"] = ok == rows.size() ? "pass" : "fail";
  s["line"] = t.summary_line;
  t.summary = s;
}

check::ComparisonRow analytic_only(const check::GridPoint& gp, const Controls& ctl) {
  check::ComparisonRow row;
  row.point = gp;
  try {
    row.diagnostics = evaluate(gp.params, gp.spec, gp.w, ctl);
    row.analytic = row.diagnostics.value;
    row.pass = true;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

check::SuiteOptions suite_options(const RunConfig& rc) {
  check::SuiteOptions opt;
  opt.threshold = rc.threshold;
  opt.retry = rc.retry;
  opt.controls = rc.controls;
  return opt;
}

Table cmd_compare(const RunConfig& rc) {
  if (rc.paths < 1) throw ConfigError("compare needs paths >= 1");
  Table t;
  t.columns = kCompareColumns;
  append_rows(t, check::run_suite(build_grid(rc), mc_config(rc), suite_options(rc)), true, nullptr);
  return t;
}

Table cmd_sweep(const RunConfig& rc) {
  std::vector<check::GridPoint> base = build_grid(rc);
  if (base.size() != 1 && rc.param != "w") {
    throw ConfigError("sweep needs a single base point");
  }
  std::vector<check::GridPoint> grid;
  for (double v : rc.values) {
    check::GridPoint gp = base.front();
    set_param(gp, rc.param, v);
    grid.push_back(gp);
  }
  std::vector<check::ComparisonRow> rows;
  if (rc.paths > 0) {
    rows = check::run_suite(grid, mc_config(rc), suite_options(rc));
  } else {
    for (const check::GridPoint& gp : grid) rows.push_back(analytic_only(gp, rc.controls));
  }
  std::vector<std::optional<double>> limits;
  for (const check::ComparisonRow& r : rows) {
    try {
      limits.push_back(r.error ? std::nullopt : limit_value(r.point, rc.controls));
    } catch (const std::exception&) {
      limits.push_back(std::nullopt);
    }
  }
  Table t;
  t.columns = kCompareColumns;
  t.columns.emplace_back("limit");
  append_rows(t, rows, rc.paths > 0, &limits);
  return t;
}

std::string category(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence";
  if (dynamic_cast<const QuadratureError*>(&e)) return "quadrature";
  if (dynamic_cast<const RootNotFoundError*>(&e)) return "root";
  return "internal";
}

int fail(const std::string& kind, std::string msg) {
  for (char& ch : msg) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  std::cerr << "error: " << kind << ": " << msg << "\n";
  return 2;
}

struct SubcommandInputs {
  CLI::App* app = nullptr;
  std::map<std::string, std::vector<std::string>> raw;
  std::string config;
  unsigned threads = 1;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AIMD exit-time Laplace transforms: evaluation and Monte Carlo validation"};
  app.require_subcommand(1, 1);
  const std::vector<std::pair<Command, const char*>> commands = {
      {Command::Eval, "evaluate transforms"},
      {Command::Simulate, "Monte Carlo estimates"},
      {Command::Compare, "analytic vs Monte Carlo table"},
      {Command::Sweep, "vary one parameter"},
  };
  std::vector<SubcommandInputs> subs(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    SubcommandInputs& s = subs[i];
    s.app = app.add_subcommand(cli::to_string(commands[i].first), commands[i].second);
    for (const cli::KeyInfo& k : cli::keys()) {
      s.app->add_option(std::string("--") + k.name, s.raw[k.name], k.help)->allow_extra_args(false);
    }
    s.app->add_option("--config", s.config, "key=value config file");
    s.app->add_option("--threads", s.threads, "Monte Carlo worker threads")
        ->check(CLI::Range(1u, 1024u));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    for (std::size_t i = 0; i < commands.size(); ++i) {
      SubcommandInputs& s = subs[i];
      if (!s.app->parsed()) continue;
      cli::KeyValues kv = cli::environment_defaults();
      if (!s.config.empty()) cli::merge(kv, cli::read_config_file(s.config));
      for (const auto& [k, v] : s.raw) {
        if (!v.empty()) kv[k] = v;
      }
      RunConfig rc = cli::resolve(commands[i].first, kv);
      rc.threads = s.threads;
      Table t;
      switch (rc.command) {
        case Command::Eval: t = cmd_eval(rc); break;
        case Command::Simulate: t = cmd_simulate(rc); break;
        case Command::Compare: t = cmd_compare(rc); break;
        case Command::Sweep: t = cmd_sweep(rc); break;
      }
      const std::string text = render(rc, t);
      if (rc.output.empty()) {
        std::cout << text << std::flush;
      } else {
        std::ofstream out(rc.output, std::ios::binary);
        if (!out) return fail("io", "cannot open output '" + rc.output + "'");
        out << text;
      }
      if (!t.summary_line.empty()) std::cerr << t.summary_line << "\n";
      const bool all_ok = !t.summary || (*t.summary)["status"] == "pass";
      return all_ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    return fail(category(e), e.what());
  }
  return fail("usage", "no subcommand");
}
