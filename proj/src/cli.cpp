#include "hololab/cli.hpp"

#include "hololab/parallel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace hololab::cli {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

std::string sci(double v, int digits = 3) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*e", digits, v);
  return buf;
}

std::string fixed(double v, int digits = 10) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "% .*f", digits, v);
  return buf;
}

std::string matrix_lines(const Matrix& m, const std::string& indent) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += indent + "[";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += (j ? " " : "") + fixed(m(i, j));
    out += " ]\n";
  }
  return out;
}

// A number, or a constant expression such as "pi/2".
double number(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return eval(parse(j.get<std::string>()), {});
  config_error(what + " must be a number or a constant expression");
}

Vector vector_from(const json& j, const std::string& what) {
  if (!j.is_array()) config_error(what + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], what);
  return v;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) config_error("unknown key '" + it.key() + "' in " + where);
  }
}

ExpressionManifoldSpec parse_custom(const json& c) {
  if (!c.is_object()) config_error("custom manifold must be an object");
  reject_unknown_keys(c, {"dim", "coords", "metric", "phi", "domain", "periods", "signature"}, "custom manifold");
  ExpressionManifoldSpec spec;
  if (!c.contains("coords") || !c["coords"].is_array()) config_error("custom manifold needs a coords array");
  spec.names = c["coords"].get<std::vector<std::string>>();
  const int n = static_cast<int>(spec.names.size());
  if (c.contains("dim") && c["dim"].get<int>() != n) config_error("dim does not match the number of coords");
  if (!c.contains("metric") || !c["metric"].is_array()) config_error("custom manifold needs a metric array");
  for (const auto& row : c["metric"]) {
    if (row.is_array())
      for (const auto& e : row) spec.metric.push_back(e.get<std::string>());
    else spec.metric.push_back(row.get<std::string>());
  }
  if (static_cast<int>(spec.metric.size()) != n && static_cast<int>(spec.metric.size()) != n * n)
    config_error("metric needs " + std::to_string(n) + " diagonal or " + std::to_string(n * n) + " entries");
  spec.phi = c.value("phi", std::string("0"));
  if (c.contains("domain")) {
    if (!c["domain"].is_array() || static_cast<int>(c["domain"].size()) != n) config_error("domain needs one entry per coordinate");
    for (const auto& d : c["domain"]) {
      Interval iv;
      if (!d.is_null()) {
        if (!d.is_array() || d.size() != 2) config_error("domain entries are [lo, hi] or null");
        iv.lo = d[0].is_null() ? -kInf : number(d[0], "domain bound");
        iv.hi = d[1].is_null() ? kInf : number(d[1], "domain bound");
      }
      spec.domain.push_back(iv);
    }
  }
  if (c.contains("periods")) {
    if (!c["periods"].is_array() || static_cast<int>(c["periods"].size()) != n)
      config_error("periods needs one entry per coordinate");
    for (const auto& p : c["periods"])
      spec.periods.push_back(p.is_null() ? std::nullopt : std::optional<double>(number(p, "period")));
  }
  if (c.contains("signature")) {
    const auto s = c["signature"].get<std::vector<int>>();
    if (s.size() != 2) config_error("signature is [positive, negative]");
    spec.signature = Signature{s[0], s[1]};
  }
  // Surface parse errors now, with their offsets.
  for (const auto& src : spec.metric) parse(src).bind(spec.names);
  parse(spec.phi).bind(spec.names);
  return spec;
}

std::string catalog_name(const json& c) {
  if (c.is_string()) return c.get<std::string>();
  if (!c.is_object() || !c.contains("name")) config_error("catalog manifold needs a name");
  std::string name = c["name"].get<std::string>();
  if (c.contains("params")) {
    name += "(";
    bool first = true;
    for (const auto& p : c["params"]) {
      if (!p.is_number_integer()) config_error("catalog params must be integers");
      name += (first ? "" : ",") + std::to_string(p.get<long long>());
      first = false;
    }
    name += ")";
  }
  return name;
}

LoopConfig parse_loop(const json& l, std::size_t index) {
  if (!l.is_object()) config_error("loop entries must be objects");
  LoopConfig lc;
  lc.label = l.value("name", "loop " + std::to_string(index));
  int kinds = 0;
  if (l.contains("rect")) {
    ++kinds;
    lc.kind = LoopConfig::Kind::Rect;
    const auto& r = l["rect"];
    if (!r.contains("from") || !r.contains("to")) config_error("rect loops need from and to corners");
    lc.points = {vector_from(r["from"], "rect corner"), vector_from(r["to"], "rect corner")};
  }
  if (l.contains("polyline")) {
    ++kinds;
    lc.kind = LoopConfig::Kind::Polyline;
    if (!l["polyline"].is_array() || l["polyline"].size() < 2) config_error("polyline needs at least two points");
    for (const auto& p : l["polyline"]) lc.points.push_back(vector_from(p, "polyline point"));
  }
  if (l.contains("family")) {
    ++kinds;
    lc.kind = LoopConfig::Kind::Family;
    const auto& f = l["family"];
    if (f.contains("index")) {
      lc.family_index = f["index"].get<int>();
    } else {
      if (!f.contains("points") || !f["points"].is_array()) config_error("family needs points or index");
      for (const auto& p : f["points"]) {
        std::vector<std::string> row;
        for (const auto& e : p) row.push_back(e.is_string() ? e.get<std::string>() : e.dump());
        lc.family_points.push_back(std::move(row));
      }
      const std::vector<std::string> s{"s"};
      for (const auto& row : lc.family_points)
        for (const auto& e : row) parse(e).bind(s);
    }
    if (f.contains("s_max")) lc.s_max = number(f["s_max"], "s_max");
  }
  if (l.contains("random")) {
    ++kinds;
    lc.kind = LoopConfig::Kind::Random;
    lc.count = l["random"].value("count", 1);
    if (lc.count < 0) config_error("random loop count must be nonnegative");
  }
  if (kinds != 1) config_error("each loop needs exactly one of rect, polyline, family, random");
  return lc;
}

const std::vector<std::string> kTasks{"holonomy", "algebra", "verify", "curvature"};

std::string timestamp_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}


}  // namespace

// ---------------------------------------------------------------------------

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (std::isfinite(m(i, j))) row.push_back(m(i, j));
      else row.push_back(nullptr);
    }
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto& v = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      m(i, k) = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    }
  return m;
}

json error_to_json(const std::exception& e) {
  json j{{"message", e.what()}};
  if (const auto* err = dynamic_cast<const Error*>(&e)) j["code"] = std::string(to_string(err->code()));
  if (const auto* syn = dynamic_cast<const SyntaxError*>(&e)) j["offset"] = syn->offset();
  return j;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::UnknownExample:
    case ErrorCode::SyntaxError:
    case ErrorCode::UnknownIdentifier:
    case ErrorCode::UnboundVariable: return kUsageError;
    default: return kNumericalFailure;
  }
}

json versioned(json report, const std::string& command) {
  report["schema"] = 1;
  report["command"] = command;
  return report;
}

void stamp(json& report) { report["timestamp"] = timestamp_now(); }

std::optional<std::uint64_t> seed_from_env() {
  const char* s = std::getenv("HOLOLAB_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') config_error(std::string("HOLOLAB_SEED is not an unsigned integer: ") + s);
  return v;
}

// ---------------------------------------------------------------------------
// Config

RunConfig parse_run_config(const json& j, std::optional<std::uint64_t> seed_override) {
  if (!j.is_object()) config_error("config must be a JSON object");
  reject_unknown_keys(j, {"manifold", "connection", "basepoint", "region", "loops", "tasks", "seed", "tolerances",
                          "output", "algebra", "verify", "curvature"},
                      "config");
  RunConfig c;
  if (j.contains("manifold")) {
    const auto& m = j["manifold"];
    if (m.contains("catalog") == m.contains("custom")) config_error("manifold needs exactly one of catalog or custom");
    if (m.contains("catalog")) c.catalog = catalog_name(m["catalog"]);
    else c.custom = parse_custom(m["custom"]);
  }
  if (j.contains("connection")) {
    try {
      c.connection = connection_kind_from_string(j["connection"].get<std::string>());
    } catch (const Error& e) {
      config_error(e.what());
    }
  }
  if (j.contains("basepoint")) c.basepoint = vector_from(j["basepoint"], "basepoint");
  if (j.contains("region")) {
    const auto& r = j["region"];
    if (!r.contains("lo") || !r.contains("hi")) config_error("region needs lo and hi");
    c.region = Box{vector_from(r["lo"], "region"), vector_from(r["hi"], "region")};
  }
  if (j.contains("loops")) {
    if (!j["loops"].is_array()) config_error("loops must be an array");
    for (std::size_t i = 0; i < j["loops"].size(); ++i) c.loops.push_back(parse_loop(j["loops"][i], i));
  }
  if (j.contains("tasks")) {
    c.tasks = j["tasks"].get<std::vector<std::string>>();
    if (c.tasks.empty()) config_error("tasks must be nonempty");
    for (const auto& t : c.tasks)
      if (std::find(kTasks.begin(), kTasks.end(), t) == kTasks.end()) config_error("unknown task '" + t + "'");
  }
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (seed_override) c.seed = *seed_override;
  if (j.contains("output")) c.output = j["output"].get<std::string>();
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    reject_unknown_keys(t, {"integrator", "steps", "max_steps", "rank", "classify", "log_radius", "check_scale"},
                        "tolerances");
    c.tolerances.integrator.tolerance = t.value("integrator", c.tolerances.integrator.tolerance);
    c.tolerances.integrator.steps = t.value("steps", c.tolerances.integrator.steps);
    c.tolerances.integrator.max_steps = t.value("max_steps", c.tolerances.integrator.max_steps);
    c.tolerances.rank_tol = t.value("rank", c.tolerances.rank_tol);
    c.tolerances.classify_tol = t.value("classify", c.tolerances.classify_tol);
    c.tolerances.log_radius = t.value("log_radius", c.tolerances.log_radius);
    c.tolerances.check_scale = t.value("check_scale", c.tolerances.check_scale);
    if (c.tolerances.integrator.steps < 1 || c.tolerances.integrator.max_steps < c.tolerances.integrator.steps)
      config_error("integrator steps must satisfy 1 <= steps <= max_steps");
  }
  if (j.contains("algebra")) {
    const auto& a = j["algebra"];
    reject_unknown_keys(a, {"random_loops", "families", "self_duality", "conjecture", "expect"}, "algebra");
    c.random_loops = a.value("random_loops", c.random_loops);
    c.use_families = a.value("families", c.use_families);
    c.use_self_duality = a.value("self_duality", c.use_self_duality);
    c.conjecture = a.value("conjecture", c.conjecture);
    if (a.contains("expect")) {
      if (a["expect"].contains("dim")) c.expect_dim = a["expect"]["dim"].get<int>();
      if (a["expect"].contains("tag")) c.expect_tag = a["expect"]["tag"].get<std::string>();
    }
  }
  if (j.contains("verify")) {
    const auto& v = j["verify"];
    reject_unknown_keys(v, {"checks", "entries", "points", "paths", "loops"}, "verify");
    if (v.contains("checks")) c.checks = v["checks"].get<std::vector<std::string>>();
    if (v.contains("entries"))
      for (const auto& e : v["entries"]) c.entries.push_back(catalog_name(e));
    c.points = v.value("points", c.points);
    c.paths = v.value("paths", c.paths);
    c.check_loops = v.value("loops", c.check_loops);
    const auto known = check_names();
    for (const auto& ch : c.checks)
      if (std::find(known.begin(), known.end(), ch) == known.end()) config_error("unknown check '" + ch + "'");
  }
  if (j.contains("curvature")) {
    const auto& cv = j["curvature"];
    if (cv.contains("points"))
      for (const auto& p : cv["points"]) c.curvature_points.push_back(vector_from(p, "curvature point"));
  }
  return c;
}

RunConfig load_run_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    config_error("config '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    return parse_run_config(j, seed_override);
  } catch (const json::exception& e) {
    config_error("config '" + path + "': " + e.what());
  }
}

CatalogEntry resolve_entry(const RunConfig& config) {
  if (config.catalog) {
    CatalogEntry e = make_entry(*config.catalog);
    if (config.basepoint) e.basepoint = *config.basepoint;
    if (config.region) e.region = *config.region;
    return e;
  }
  if (!config.custom) config_error("config names no manifold");
  const auto& spec = *config.custom;
  CatalogEntry e("custom", manifold_from_expressions(spec));
  e.expressions = spec;
  const auto& chart = e.manifold.chart();
  const int n = chart.dim();
  if (config.basepoint) {
    e.basepoint = *config.basepoint;
  } else {
    e.basepoint = Vector(n);
    for (int i = 0; i < n; ++i) {
      const Interval& d = chart.domain(i);
      if (chart.period(i) || !std::isfinite(d.lo) || !std::isfinite(d.hi))
        e.basepoint[i] = std::isfinite(d.lo) ? d.lo + 1.0 : std::isfinite(d.hi) ? d.hi - 1.0 : 0.0;
      else e.basepoint[i] = 0.5 * (d.lo + d.hi);
    }
  }
  if (e.basepoint.size() != n) config_error("basepoint has the wrong dimension");
  chart.require_contains(e.basepoint);
  if (config.region) {
    e.region = *config.region;
  } else {
    e.region = {Vector(n), Vector(n)};
    for (int i = 0; i < n; ++i) {
      const Interval& d = chart.domain(i);
      if (!chart.period(i) && d.bounded()) {
        const double w = d.hi - d.lo;
        e.region.lo[i] = d.lo + 0.05 * w;
        e.region.hi[i] = d.hi - 0.05 * w;
      } else {
        e.region.lo[i] = std::max(e.basepoint[i] - 1.0, std::isfinite(d.lo) ? d.lo + 0.05 : -kInf);
        e.region.hi[i] = std::min(e.basepoint[i] + 1.0, std::isfinite(d.hi) ? d.hi - 0.05 : kInf);
      }
    }
  }
  if (e.region.lo.size() != n || e.region.hi.size() != n) config_error("region has the wrong dimension");
  return e;
}

ResolvedLoops resolve_loops(const RunConfig& config, const CatalogEntry& entry) {
  const auto& chart = entry.manifold.chart();
  const int n = chart.dim();
  ResolvedLoops out;
  auto check_points = [&](const LoopConfig& lc) {
    for (const auto& p : lc.points) {
      if (p.size() != n) config_error(lc.label + ": point has " + std::to_string(p.size()) + " coordinates");
      if (!chart.contains(p)) config_error(lc.label + ": point outside the chart domain");
    }
  };
  for (std::size_t i = 0; i < config.loops.size(); ++i) {
    const LoopConfig& lc = config.loops[i];
    switch (lc.kind) {
      case LoopConfig::Kind::Polyline:
        check_points(lc);
        out.labels.push_back(lc.label);
        out.loops.push_back(Loop::polyline(lc.points));
        break;
      case LoopConfig::Kind::Rect: {
        check_points(lc);
        const Vector& a = lc.points[0];
        const Vector& b = lc.points[1];
        std::vector<int> axes;
        for (int k = 0; k < n; ++k)
          if (a[k] != b[k]) axes.push_back(k);
        if (axes.size() != 2) config_error(lc.label + ": rect corners must differ in exactly two coordinates");
        Vector p1 = a, p2 = a;
        p1[axes[0]] = b[axes[0]];
        p2[axes[1]] = b[axes[1]];
        out.labels.push_back(lc.label);
        out.loops.push_back(Loop::polyline({a, p1, b, p2, a}));
        break;
      }
      case LoopConfig::Kind::Random: {
        const auto loops = random_rectangle_loops(entry.manifold, entry.region, lc.count, config.seed + i, entry.basepoint);
        for (std::size_t k = 0; k < loops.size(); ++k) {
          out.labels.push_back(lc.label + "." + std::to_string(k));
          out.loops.push_back(loops[k]);
        }
        break;
      }
      case LoopConfig::Kind::Family: {
        out.family_labels.push_back(lc.label);
        if (lc.family_index) {
          const int k = *lc.family_index;
          if (k < 0 || k >= static_cast<int>(entry.families.size()))
            config_error(lc.label + ": entry has no family " + std::to_string(k));
          out.families.push_back(entry.families[static_cast<std::size_t>(k)]);
        } else {
          std::vector<std::vector<Expr>> exprs;
          const std::vector<std::string> s{"s"};
          for (const auto& row : lc.family_points) {
            if (static_cast<int>(row.size()) != n) config_error(lc.label + ": family point has the wrong dimension");
            std::vector<Expr> r;
            for (const auto& e : row) r.push_back(parse(e).bind(s));
            exprs.push_back(std::move(r));
          }
          if (exprs.size() < 2) config_error(lc.label + ": family needs at least two points");
          out.families.push_back({[exprs](double sv) {
                                    std::vector<Vector> pts;
                                    const double args[1] = {sv};
                                    for (const auto& row : exprs) {
                                      Vector p(static_cast<Eigen::Index>(row.size()));
                                      for (std::size_t k = 0; k < row.size(); ++k)
                                        p[static_cast<Eigen::Index>(k)] = eval_at<double>(row[k], args);
                                      pts.push_back(p);
                                    }
                                    return Loop::polyline(pts);
                                  },
                                  lc.s_max, true});
        }
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

CommandResult cmd_run_example(const std::string& name) {
  const CatalogEntry entry = make_entry(name);
  CommandResult r;
  json goldens = json::array();
  bool all = true;
  if (entry.christoffel_table) {
    try {
      const GoldenResult g = check_christoffel_table(entry);
      goldens.push_back({{"label", g.label}, {"expected", matrix_to_json(g.expected)},
                         {"computed", matrix_to_json(g.computed)}, {"delta", g.delta}, {"tol", g.tol},
                         {"passed", g.passed}, {"note", g.note}});
    } catch (const std::exception& e) {
      goldens.push_back({{"label", "weighted Christoffel table"}, {"passed", false}, {"error", error_to_json(e)}});
    }
  }
  const auto computed = parallel_map<json>(entry.goldens.size(), [&](std::size_t i) {
    try {
      const GoldenResult g = evaluate_golden(entry.goldens[i]);
      return json{{"label", g.label}, {"expected", matrix_to_json(g.expected)}, {"computed", matrix_to_json(g.computed)},
                  {"delta", g.delta}, {"tol", g.tol}, {"passed", g.passed}, {"note", g.note}};
    } catch (const std::exception& e) {
      return json{{"label", entry.goldens[i].label}, {"passed", false}, {"error", error_to_json(e)}};
    }
  });
  for (const auto& g : computed) goldens.push_back(g);

  std::ostringstream s;
  s << entry.name << "\n";
  for (const auto& g : goldens) {
    const bool ok = g["passed"].get<bool>();
    all = all && ok;
    s << (ok ? "  PASS " : "  FAIL ") << g["label"].get<std::string>();
    if (g.contains("error")) {
      s << "  error: " << g["error"]["message"].get<std::string>() << "\n";
      continue;
    }
    s << "  |delta| = " << sci(g["delta"].get<double>()) << "  tol = " << sci(g["tol"].get<double>()) << "\n";
    const Matrix e = matrix_from_json(g["expected"]);
    const Matrix c = matrix_from_json(g["computed"]);
    s << "    expected\n" << matrix_lines(e, "      ") << "    computed\n" << matrix_lines(c, "      ");
    if (!g["note"].get<std::string>().empty()) s << "    note: " << g["note"].get<std::string>() << "\n";
  }
  s << (all ? "all golden values reproduced\n" : "some golden values differ\n");
  r.summary = s.str();
  r.report = {{"entry", entry.name}, {"goldens", goldens}, {"passed", all}};
  r.exit_code = all ? kSuccess : kNumericalFailure;
  return r;
}

CommandResult cmd_holonomy(const RunConfig& config, const std::optional<std::string>& plot_path, int plot_samples) {
  const CatalogEntry entry = resolve_entry(config);
  const ResolvedLoops loops = resolve_loops(config, entry);
  const auto& m = entry.manifold;
  const auto& opts = config.tolerances.integrator;
  const ConnectionKind kind = config.connection;

  const auto loop_results = parallel_map<json>(loops.loops.size(), [&](std::size_t i) {
    json j{{"label", loops.labels[i]}, {"basepoint", vector_json(loops.loops[i].basepoint())}};
    try {
      const HolonomyElement h = holonomy(m, kind, loops.loops[i], opts);
      j["matrix"] = matrix_to_json(h.matrix);
      j["det"] = h.matrix.determinant();
      j["est_error"] = h.est_error;
      j["steps_used"] = h.steps_used;
      try {
        j["log"] = matrix_to_json(mat_log(h.matrix));
      } catch (const Error& e) {
        j["log"] = nullptr;
        j["log_error"] = e.what();
      }
      j["ok"] = true;
    } catch (const std::exception& e) {
      j["ok"] = false;
      j["error"] = error_to_json(e);
    }
    return j;
  });
  const auto family_results = parallel_map<json>(loops.families.size(), [&](std::size_t i) {
    json j{{"label", loops.family_labels[i]}, {"s_max", loops.families[i].s_max}};
    try {
      j["family_derivative"] = matrix_to_json(family_derivative(m, kind, loops.families[i], 1e-2, opts));
      j["ok"] = true;
    } catch (const std::exception& e) {
      j["ok"] = false;
      j["error"] = error_to_json(e);
    }
    return j;
  });

  CommandResult r;
  bool all = true;
  std::ostringstream s;
  s << entry.name << ", " << to_string(kind) << " connection\n";
  for (const auto& j : loop_results) {
    s << "  " << j["label"].get<std::string>();
    if (!j["ok"].get<bool>()) {
      all = false;
      s << "  error: " << j["error"]["message"].get<std::string>() << "\n";
      continue;
    }
    s << "  det = " << fixed(j["det"].get<double>()) << "  est_error = " << sci(j["est_error"].get<double>()) << "\n"
      << matrix_lines(matrix_from_json(j["matrix"]), "    ");
  }
  for (const auto& j : family_results) {
    s << "  " << j["label"].get<std::string>();
    if (!j["ok"].get<bool>()) {
      all = false;
      s << "  error: " << j["error"]["message"].get<std::string>() << "\n";
      continue;
    }
    s << "  derivative at s = 0\n" << matrix_lines(matrix_from_json(j["family_derivative"]), "    ");
  }
  r.summary = s.str();
  r.report = {{"entry", entry.name}, {"connection", std::string(to_string(kind))}, {"seed", config.seed},
              {"loops", loop_results}, {"families", family_results}};

  if (plot_path) {
    std::ofstream csv(*plot_path);
    if (!csv) config_error("cannot write plot file '" + *plot_path + "'");
    const int n = m.dim();
    csv << "loop,segment,t";
    for (int k = 0; k < n; ++k) csv << ",x" << k;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) csv << ",f" << a << b;
    csv << "\n";
    char buf[32];
    for (std::size_t i = 0; i < loops.loops.size(); ++i) {
      if (!loop_results[i]["ok"].get<bool>()) continue;
      std::vector<FrameSample> frames;
      try {
        frames = trace_frame(m, kind, loops.loops[i], plot_samples, opts);
      } catch (const std::exception&) {
        continue;
      }
      for (const auto& fs : frames) {
        csv << loops.labels[i] << "," << fs.segment;
        std::snprintf(buf, sizeof buf, ",%.17g", fs.t);
        csv << buf;
        for (Eigen::Index k = 0; k < fs.point.size(); ++k) {
          std::snprintf(buf, sizeof buf, ",%.17g", fs.point[k]);
          csv << buf;
        }
        for (Eigen::Index a = 0; a < fs.frame.rows(); ++a)
          for (Eigen::Index b = 0; b < fs.frame.cols(); ++b) {
            std::snprintf(buf, sizeof buf, ",%.17g", fs.frame(a, b));
            csv << buf;
          }
        csv << "\n";
      }
    }
    r.report["plot"] = *plot_path;
  }
  r.report["passed"] = all;
  r.exit_code = all ? kSuccess : kNumericalFailure;
  return r;
}

CommandResult cmd_algebra(const RunConfig& config) {
  CatalogEntry entry = resolve_entry(config);
  const ResolvedLoops loops = resolve_loops(config, entry);
  AlgebraOptions opts;
  opts.random_loops = config.random_loops;
  opts.log_radius = config.tolerances.log_radius;
  opts.use_families = config.use_families;
  opts.use_self_duality = config.use_self_duality;
  opts.rank_tol = config.tolerances.rank_tol;
  opts.classify_tol = config.tolerances.classify_tol;
  opts.integrator = config.tolerances.integrator;

  CommandResult r;
  AlgebraResult a;
  try {
    a = algebra_experiment(entry, config.connection, config.seed, opts, loops.loops, loops.families);
  } catch (const std::exception& e) {
    r.exit_code = kNumericalFailure;
    r.report = {{"entry", entry.name}, {"error", error_to_json(e)}, {"passed", false}};
    r.summary = std::string("error: ") + e.what() + "\n";
    return r;
  }
  const int n = entry.manifold.dim();
  json basis = json::array();
  for (const auto& b : a.basis.elements()) basis.push_back(matrix_to_json(b));
  json sources = json::array();
  for (const auto& g : a.generators) sources.push_back(g.source);
  r.report = {{"entry", entry.name},
              {"connection", std::string(to_string(config.connection))},
              {"seed", config.seed},
              {"loops_sampled", a.loops_sampled},
              {"loops_used", a.loops_used},
              {"generators", sources},
              {"dim", a.basis.dim()},
              {"tag", a.tag.name()},
              {"basis", basis},
              {"max_det_deviation", a.max_det_deviation},
              {"max_trace", a.max_trace},
              {"closure_tol", a.closure_tol},
              {"form", a.form ? matrix_to_json(*a.form) : json(nullptr)}};

  std::ostringstream s;
  s << entry.name << ": sampled " << a.loops_sampled << " loops, " << a.loops_used << " logs used, "
    << a.generators.size() << " generators\n"
    << "  closure dimension " << a.basis.dim() << ", tag " << a.tag.name() << "\n"
    << "  max |det P - 1| = " << sci(a.max_det_deviation) << ", max |trace| over basis = " << sci(a.max_trace) << "\n";

  bool passed = true;
  if (config.conjecture) {
    const int bound = n * (n - 1) / 2;
    r.report["mode"] = "EXPERIMENT";
    r.report["conjecture"] = {{"bound", bound},
                              {"within_bound", a.basis.dim() <= bound},
                              {"equals_bound", a.basis.dim() == bound},
                              {"strictly_upper_triangular", a.strictly_upper_triangular}};
    s << "  EXPERIMENT: strictly upper triangular algebra has dimension " << bound << "; observed " << a.basis.dim()
      << (a.strictly_upper_triangular ? ", all elements strictly upper triangular" : ", not strictly upper triangular")
      << " (no pass/fail)\n";
  } else {
    if (config.expect_dim) {
      const bool ok = a.basis.dim() == *config.expect_dim;
      passed = passed && ok;
      s << "  expected dimension " << *config.expect_dim << (ok ? ": ok\n" : ": MISMATCH\n");
    }
    if (config.expect_tag) {
      const bool ok = a.tag.name() == *config.expect_tag;
      passed = passed && ok;
      s << "  expected tag " << *config.expect_tag << (ok ? ": ok\n" : ": MISMATCH\n");
    }
    r.report["passed"] = passed;
  }
  r.summary = s.str();
  r.exit_code = passed ? kSuccess : kNumericalFailure;
  return r;
}

CommandResult cmd_curvature(const RunConfig& config) {
  CatalogEntry entry = resolve_entry(config);
  std::vector<Vector> points = config.curvature_points;
  if (points.empty()) points.push_back(entry.basepoint);
  for (const auto& p : points)
    if (p.size() != entry.manifold.dim() || !entry.manifold.chart().contains(p))
      config_error("curvature point outside the chart domain");
  CommandResult r;
  json out = json::array();
  std::ostringstream s;
  s << entry.name << ", " << to_string(config.connection) << " connection\n";
  bool all = true;
  for (const auto& p : points) {
    json j{{"point", vector_json(p)}};
    try {
      const Matrix ric = ricci_at(entry.manifold, config.connection, p);
      j["ricci"] = matrix_to_json(ric);
      s << "  Ricci at " << json(vector_json(p)).dump() << "\n" << matrix_lines(ric, "    ");
    } catch (const std::exception& e) {
      all = false;
      j["error"] = error_to_json(e);
      s << "  error: " << e.what() << "\n";
    }
    out.push_back(j);
  }
  r.report = {{"entry", entry.name}, {"connection", std::string(to_string(config.connection))}, {"points", out},
              {"passed", all}};
  r.summary = s.str();
  r.exit_code = all ? kSuccess : kNumericalFailure;
  return r;
}

CommandResult cmd_verify(const std::optional<RunConfig>& config, std::uint64_t default_seed) {
  std::vector<CatalogEntry> entries;
  SuiteOptions opts;
  opts.seed = default_seed;
  if (!config) {
    entries = default_suite_entries();
  } else {
    if (!config->entries.empty()) {
      for (const auto& name : config->entries) entries.push_back(make_entry(name));
    } else {
      entries.push_back(resolve_entry(*config));
    }
    opts.checks = config->checks;
    opts.points = config->points;
    opts.paths = config->paths;
    opts.loops = config->check_loops;
    opts.seed = config->seed;
    opts.tol_scale = config->tolerances.check_scale;
  }
  CommandResult r;
  std::vector<CheckReport> reports;
  try {
    reports = run_checks(entries, opts);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    r.exit_code = kNumericalFailure;
    r.report = {{"error", error_to_json(e)}, {"passed", false}};
    r.summary = std::string("error: ") + e.what() + "\n";
    return r;
  }
  json js = json::array();
  bool all = true;
  std::ostringstream s;
  for (const auto& rep : reports) {
    js.push_back(to_json(rep));
    all = all && rep.passed;
    s << (rep.passed ? "  PASS " : "  FAIL ") << rep.check_name << " on " << rep.entry_name << ": " << rep.samples
      << " samples, max violation " << sci(rep.max_violation) << " (tol " << sci(rep.tol) << ")\n";
  }
  s << reports.size() << " checks, " << (all ? "all passed" : "some failed") << "\n";
  r.summary = s.str();
  r.report = {{"seed", opts.seed}, {"reports", js}, {"passed", all}};
  r.exit_code = all ? kSuccess : kNumericalFailure;
  return r;
}

CommandResult cmd_catalog_list() {
  CommandResult r;
  json list = json::array();
  std::ostringstream s;
  for (const auto& name : catalog_names()) {
    const CatalogEntry e = make_entry(name);
    const Signature sig = e.manifold.metric().signature();
    json j{{"name", e.name},
           {"dim", e.manifold.dim()},
           {"signature", {sig.positive, sig.negative}},
           {"coords", e.manifold.chart().names()},
           {"companion", e.companion.has_value()},
           {"goldens", e.goldens.size()},
           {"families", e.families.size()},
           {"christoffel_table", e.christoffel_table.has_value()}};
    list.push_back(j);
    s << "  " << e.name << "  dim " << e.manifold.dim() << "  goldens " << e.goldens.size()
      << (e.companion ? "  companion" : "") << (e.families.empty() ? "" : "  families") << "\n";
  }
  s << "  (also sphereN(n), triangular(n), so_pq(p,q), lc_random(n,seed))\n";
  r.report = {{"entries", list}};
  r.summary = s.str();
  return r;
}

CommandResult cmd_run(const RunConfig& config) {
  if (config.tasks.empty()) config_error("tasks must be nonempty");
  CommandResult r;
  r.report = {{"tasks", json::object()}};
  for (const auto& t : config.tasks) {
    CommandResult part;
    if (t == "holonomy") part = cmd_holonomy(config);
    else if (t == "algebra") part = cmd_algebra(config);
    else if (t == "verify") part = cmd_verify(config);
    else part = cmd_curvature(config);
    r.report["tasks"][t] = part.report;
    r.summary += "[" + t + "]\n" + part.summary;
    r.exit_code = std::max(r.exit_code, part.exit_code);
  }
  return r;
}

}  // namespace hololab::cli
