#include "tsneflow_cli/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tsneflow/dataset.hpp"
#include "tsneflow/diagnostics.hpp"
#include "tsneflow/error.hpp"
#include "tsneflow/high_affinity.hpp"
#include "tsneflow_checks/suite.hpp"

namespace tsneflow::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("bad number for '" + key + "': '" + v + "'");
  }
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("bad integer for '" + key + "': '" + v + "'");
  }
  return out;
}

// Runs `body`, mapping exceptions to exit codes and JSON on `err`.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    write_error_json(err, kExitConfig, "ConfigError", "cli-runner", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    const bool io = e.code() == Errc::kIo || e.code() == Errc::kParse;
    const int code = io ? kExitIo : kExitModule;
    write_error_json(err, code, to_string(e.code()), e.module(), e.what(), e.index(), e.index2());
    return code;
  } catch (const fs::filesystem_error& e) {
    write_error_json(err, kExitIo, "IoError", "cli-runner", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    write_error_json(err, kExitModule, "InternalError", "cli-runner", e.what());
    return kExitModule;
  }
}

ManifoldSpec manifold_spec(const RunConfig& cfg) {
  ManifoldSpec spec;
  spec.kind = *cfg.manifold;
  const bool flat = spec.kind == ManifoldKind::kCircle || spec.kind == ManifoldKind::kGaussianClusters;
  spec.ambient_dim = cfg.dim.value_or(flat ? 2 : 3);
  spec.seed = cfg.seed;
  return spec;
}

Dataset load_data(const RunConfig& cfg) {
  if (cfg.input) {
    if (!fs::exists(*cfg.input)) {
      throw Error(Errc::kIo, "cli-runner", "input file not found: " + cfg.input->string());
    }
    return read_csv_file(*cfg.input);
  }
  return sample(manifold_spec(cfg), cfg.n);
}

double resolve_perp(const RunConfig& cfg, std::size_t n) {
  return cfg.perp ? *cfg.perp : perplexity_from_zeta(n, *cfg.zeta);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::kIo, "cli-runner", "cannot write " + path.string());
  f << text;
  if (!f) throw Error(Errc::kIo, "cli-runner", "write failed for " + path.string());
}

}  // namespace

void write_error_json(std::ostream& err, int exit_code, std::string_view kind,
                      std::string_view module, const std::string& message,
                      std::optional<std::size_t> index, std::optional<std::size_t> index2) {
  nlohmann::json e;
  e["kind"] = kind;
  e["module"] = module;
  e["message"] = message;
  e["exit_code"] = exit_code;
  e["index"] = index ? nlohmann::json(*index) : nlohmann::json(nullptr);
  e["index2"] = index2 ? nlohmann::json(*index2) : nlohmann::json(nullptr);
  err << nlohmann::json{{"error", e}}.dump() << '\n';
}

void apply_config_text(std::istream& in, RunConfig& cfg) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key == "input") cfg.input = value;
    else if (key == "manifold") {
      try {
        cfg.manifold = parse_manifold_kind(value);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "n") cfg.n = parse_uint(key, value);
    else if (key == "dim") cfg.dim = parse_uint(key, value);
    else if (key == "perp") cfg.perp = parse_double(key, value);
    else if (key == "zeta") cfg.zeta = parse_double(key, value);
    else if (key == "t_end") cfg.flow.t_end = parse_double(key, value);
    else if (key == "step") cfg.flow.step = parse_double(key, value);
    else if (key == "record_every") cfg.flow.record_every = parse_uint(key, value);
    else if (key == "seed") cfg.seed = parse_uint(key, value);
    else if (key == "out") cfg.out = value;
    else if (key == "method") {
      try {
        cfg.flow.method = parse_flow_method(value);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    } else {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
}

void apply_config_file(const fs::path& path, RunConfig& cfg) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::kIo, "cli-runner", "cannot open config file " + path.string());
  apply_config_text(f, cfg);
}

void validate(const RunConfig& cfg, bool need_source) {
  if (cfg.input && cfg.manifold) throw ConfigError("give either --input or --manifold, not both");
  if (need_source && !cfg.input && !cfg.manifold) {
    throw ConfigError("no data: give --input PATH or --manifold KIND --n N");
  }
  if (cfg.manifold && cfg.n < 2) throw ConfigError("--manifold needs --n >= 2");
  if (cfg.perp && cfg.zeta) throw ConfigError("set exactly one of perp / zeta, not both");
  if (need_source && !cfg.perp && !cfg.zeta) throw ConfigError("set one of perp / zeta");
  try {
    cfg.flow.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::string embedding_svg(const EmbeddingState& state) {
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  for (const auto& p : state.y) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-300});
  const double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
  std::ostringstream os;
  os << std::fixed << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\" width=\"600\" height=\"600\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"1\" height=\"1\" fill=\"white\"/>\n";
  for (const auto& p : state.y) {
    const double x = 0.5 + 0.9 * (p.x - cx) / span;
    const double y = 0.5 - 0.9 * (p.y - cy) / span;
    os << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"0.004\" fill=\"#1f5f99\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg, true);
    const Dataset data = load_data(cfg);
    const double perp = resolve_perp(cfg, data.size());
    const CondAffinity cond = calibrate(data, perp);
    const SymAffinity p = symmetrize(cond);
    const FlowTrace trace = integrate(p, gaussian_init(data.size(), cfg.seed), cfg.flow);
    const TheoryReport report = build_theory_report(data, cond, p, trace);

    fs::create_directories(cfg.out);
    if (!cfg.input) write_csv_file(cfg.out / "dataset.csv", data);
    write_trace_csv_file(cfg.out / "trace.csv", trace);

    nlohmann::json j = to_json(report);
    nlohmann::json meta;
    meta["source"] = cfg.input ? "file:" + cfg.input->filename().string()
                               : std::string(to_string(*cfg.manifold));
    meta["n"] = data.size();
    meta["dim"] = data.dim();
    meta["perp"] = perp;
    meta["zeta"] = cfg.zeta ? nlohmann::json(*cfg.zeta) : nlohmann::json(nullptr);
    meta["seed"] = cfg.seed;
    meta["method"] = to_string(cfg.flow.method);
    meta["step"] = cfg.flow.step;
    meta["t_end"] = cfg.flow.t_end;
    meta["record_every"] = cfg.flow.record_every;
    meta["steps"] = trace.steps;
    meta["halvings"] = trace.halvings;
    j["run"] = meta;
    write_text(cfg.out / "report.json", j.dump(2) + "\n");
    write_text(cfg.out / "embedding.svg", embedding_svg(trace.final_state));

    out << "n=" << data.size() << " perp=" << perp << " steps=" << trace.steps
        << " KL " << trace.initial_kl << " -> " << report.final_kl << "\n"
        << "theorem_condition=" << (report.theorem_condition ? "true" : "false")
        << " log_C_p=" << report.log_c_p << " log_R_n=" << report.log_r_n << "\n"
        << "artifacts written to " << cfg.out.string() << "\n";
    return static_cast<int>(kExitOk);
  });
}

int verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg, false);
    checks::SuiteOptions opts;
    if (cfg.input || cfg.manifold) opts.data = load_data(cfg);
    opts.perp = cfg.perp;
    opts.zeta = cfg.zeta;
    opts.flow = cfg.flow;
    opts.seed = cfg.seed == 0 ? 1 : cfg.seed;
    opts.flip_gradient_sign = cfg.flip_gradient_sign;
    std::size_t failed = 0, skipped = 0, total = 0;
    checks::run_suite(opts, [&](const checks::CheckResult& r) {
      ++total;
      if (!r.passed) ++failed;
      if (r.skipped) ++skipped;
      out << checks::format_result(r) << std::endl;
    });
    out << total - failed - skipped << " passed, " << failed << " failed, " << skipped
        << " skipped\n";
    return failed == 0 ? static_cast<int>(kExitOk) : static_cast<int>(kExitVerifyFailed);
  });
}

}  // namespace tsneflow::cli
