#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rholab/rholab.hpp"

using namespace rholab;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;
constexpr int exit_numerical = 3;

// JSON given inline or as a path to a file.
json load_json(const std::string& text, const std::string& what) {
  std::string body = text;
  const auto first = text.find_first_not_of(" \t\n");
  if (first == std::string::npos || (text[first] != '{' && text[first] != '[')) {
    std::ifstream f(text);
    if (!f) throw Error(ErrorCode::config_error, "cannot read " + what + " file '" + text + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    body = ss.str();
  }
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config_error, what + " is not valid JSON: " + e.what());
  }
}

NormSpec load_norm(const std::string& text, std::size_t default_dim) {
  return norm_from_json(load_json(text, "norm"), default_dim);
}

DerivativeMethod parse_method(const std::string& s) {
  if (s == "auto") return DerivativeMethod::automatic;
  if (s == "exact") return DerivativeMethod::exact;
  if (s == "numerical") return DerivativeMethod::numerical;
  throw Error(ErrorCode::config_error, "unknown method '" + s + "'");
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("RHOLAB_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::config_error, std::string("RHOLAB_SEED is not an integer: '") + env + "'");
  }
  return 42;
}

json vec_json(const Vector& v) { return std::vector<double>(v.coords().begin(), v.coords().end()); }

void print(const json& j, bool as_json, const std::string& text) {
  if (as_json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

struct Common {
  std::string norm;
  std::string x;
  std::string y;
  std::string lambda = "1/2";
  std::string method = "auto";
  bool as_json = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Norm derivatives, orthogonality relations and their characterizations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "rholab 1.0");

  Common c;
  std::string relation = "B", relation_b, config_path, map_path, check_kind, norm2, kind = "unit_ball", out_path;
  std::vector<std::string> suites;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::size_t directions = 64, budget = 1000, resolution = 360, threads = 0;
  double tol = 1e-8, epsilon = 1.0;
  bool no_timing = false;
  std::string report_out;

  auto add_norm_xy = [&](CLI::App* s, bool need_y) {
    s->add_option("--norm", c.norm, "norm as JSON text or a JSON file")->required();
    s->add_option("--x", c.x, "vector, e.g. 1,1/3,-2")->required();
    if (need_y) s->add_option("--y", c.y, "vector")->required();
    s->add_option("--method", c.method, "auto | exact | numerical");
    s->add_flag("--json", c.as_json, "print JSON");
  };

  auto* compute = app.add_subcommand("compute", "rho-, rho+, rho, rho* and rho_lambda of a pair");
  add_norm_xy(compute, true);
  compute->add_option("--lambda", c.lambda, "lambda in [0,1]");

  auto* orth = app.add_subcommand("orth", "test an orthogonality relation");
  add_norm_xy(orth, true);
  orth->add_option("--relation", relation, "B, I, rho-, rho+, rho, rho*, rho_lambda:L");
  orth->add_option("--tol", tol, "relative tolerance");

  auto* orthz = app.add_subcommand("orthogonalize", "z = t x + y with rho_lambda(x, z) = 0");
  add_norm_xy(orthz, true);
  orthz->add_option("--lambda", c.lambda, "lambda in [0,1]");

  auto* smooth = app.add_subcommand("smooth", "smoothness of the norm at x");
  add_norm_xy(smooth, false);
  smooth->add_option("--directions", directions, "random directions for the numerical test");

  auto* interval = app.add_subcommand("interval", "all t with x Birkhoff-orthogonal to t x + y");
  add_norm_xy(interval, true);

  auto* verify = app.add_subcommand("verify", "run the property and characterization suites");
  verify->add_option("--config", config_path, "config JSON file (defaults when omitted)");
  verify->add_option("--suite", suites, "restrict to these suites");
  verify->add_option("--seed", seed, "seed (default 42 or RHOLAB_SEED)");
  verify->add_option("--trials", trials, "trials per check");
  verify->add_option("--threads", threads, "worker threads (0 = all cores)");
  verify->add_option("--out", report_out, "write the JSON report here");
  verify->add_flag("--no-timing", no_timing, "omit runtimes from the JSON report");
  verify->add_flag("--json", c.as_json, "print the JSON report instead of the table");

  auto* examples = app.add_subcommand("examples", "max-norm reference pairs");
  examples->add_option("--lambda", c.lambda, "lambda in [0,1]");
  examples->add_flag("--json", c.as_json, "print JSON");

  auto* search = app.add_subcommand("search", "look for x A y with not x B y");
  search->add_option("--norm", c.norm, "norm as JSON text or file")->required();
  search->add_option("--dim", directions, "dimension when the norm omits it");
  search->add_option("--a", relation, "relation that holds")->required();
  search->add_option("--b", relation_b, "relation that should fail")->required();
  search->add_option("--budget", budget, "tested pairs");
  search->add_option("--seed", seed, "seed");
  search->add_option("--tol", tol, "relative tolerance");
  search->add_flag("--json", c.as_json, "print JSON");

  auto* mapc = app.add_subcommand("map", "check a linear map against the preservation conditions");
  mapc->add_option("--map", map_path, "map JSON text or file")->required();
  mapc->add_option("--lambda", c.lambda, "lambda in [0,1]");
  mapc->add_option("--check", check_kind, "preserve | similarity | scaling | norm")->required();
  mapc->add_option("--trials", trials, "sampled pairs");
  mapc->add_option("--seed", seed, "seed");
  mapc->add_flag("--json", c.as_json, "print JSON");

  auto* ratio = app.add_subcommand("ratio", "extremes of |rho_l,2| / |rho_l,1|");
  ratio->add_option("--norm1", c.norm, "first norm")->required();
  ratio->add_option("--norm2", norm2, "second norm")->required();
  ratio->add_option("--dim", directions, "dimension when the norms omit it");
  ratio->add_option("--lambda", c.lambda, "lambda in [0,1]");
  ratio->add_option("--trials", trials, "sampled pairs");
  ratio->add_option("--seed", seed, "seed");
  ratio->add_flag("--json", c.as_json, "print JSON");

  auto* modulus = app.add_subcommand("modulus", "modulus of convexity estimate");
  modulus->add_option("--norm", c.norm, "norm")->required();
  modulus->add_option("--dim", directions, "dimension when the norm omits it");
  modulus->add_option("--epsilon", epsilon, "separation in (0,2]");
  modulus->add_option("--seed", seed, "seed");
  modulus->add_flag("--json", c.as_json, "print JSON");

  auto* plotc = app.add_subcommand("plot", "SVG and CSV of the unit ball or the orthogonality field");
  plotc->add_option("--norm", c.norm, "planar norm")->required();
  plotc->add_option("--kind", kind, "unit_ball | orthogonality_field");
  plotc->add_option("--x", c.x, "base point for the field");
  plotc->add_option("--lambda", c.lambda, "lambda in [0,1]");
  plotc->add_option("--resolution", resolution, "samples (>= 32)");
  plotc->add_option("--out", out_path, "SVG path; the CSV goes next to it")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    const DerivativeMethod method = parse_method(c.method);
    auto the_seed = [&] { return seed ? *seed : default_seed(); };

    if (*compute) {
      const Vector x = parse_vector(c.x), y = parse_vector(c.y);
      const NormSpec n = load_norm(c.norm, x.dim());
      const Lambda l(parse_scalar(c.lambda));
      const auto p = rho_pair(n, x, y, method);
      json j{{"norm", n.label()},
             {"rho_minus", p.rho_minus},
             {"rho_plus", p.rho_plus},
             {"rho", p.rho_mid()},
             {"rho_star", p.rho_star()},
             {"lambda", l.value()},
             {"rho_lambda", p.rho_lambda(l)},
             {"enclosure_radius", p.enclosure_radius},
             {"method", p.method == DerivativePair::Method::exact ? "exact" : "numerical"},
             {"converged", p.converged}};
      std::ostringstream os;
      os << "rho-       " << format_scalar(p.rho_minus) << "\nrho+       " << format_scalar(p.rho_plus)
         << "\nrho        " << format_scalar(p.rho_mid()) << "\nrho*       " << format_scalar(p.rho_star())
         << "\nrho_lambda " << format_scalar(p.rho_lambda(l)) << "  (lambda " << format_scalar(l.value())
         << ")\n";
      if (p.method == DerivativePair::Method::numerical)
        os << "enclosure  " << format_decimal(p.enclosure_radius) << (p.converged ? "" : "  NOT CONVERGED")
           << "\n";
      print(j, c.as_json, os.str());
      return p.converged ? exit_ok : exit_numerical;
    }

    if (*orth) {
      const Vector x = parse_vector(c.x), y = parse_vector(c.y);
      const NormSpec n = load_norm(c.norm, x.dim());
      const Relation rel = Relation::parse(relation);
      const auto r = check(rel, n, x, y, tol, method);
      json j{{"relation", rel.name()}, {"orthogonal", r.orthogonal}, {"residual", r.residual},
             {"scale", r.scale},       {"tol", r.tol_used},          {"uncertainty", r.uncertainty}};
      print(j, c.as_json,
            rel.name() + ": " + (r.orthogonal ? "orthogonal" : "not orthogonal") + " (residual " +
                format_scalar(r.residual) + ", scale " + format_scalar(r.scale) + ")\n");
      return exit_ok;
    }

    if (*orthz) {
      const Vector x = parse_vector(c.x), y = parse_vector(c.y);
      const NormSpec n = load_norm(c.norm, x.dim());
      const Lambda l(parse_scalar(c.lambda));
      const auto o = rho_lambda_orthogonalize(n, l, x, y, tol, method);
      json j{{"t", o.t}, {"z", vec_json(o.z)}, {"residual", o.residual}, {"verified", o.verified}};
      print(j, c.as_json,
            "t = " + format_scalar(o.t) + "\nz = " + format_vector(o.z) + "\nresidual " +
                format_scalar(o.residual) + (o.verified ? "" : "  NOT VERIFIED") + "\n");
      return o.verified ? exit_ok : exit_numerical;
    }

    if (*smooth) {
      const Vector x = parse_vector(c.x);
      const NormSpec n = load_norm(c.norm, x.dim());
      const auto s = is_smooth_at(n, x, directions, tol, method, default_seed());
      json j{{"smooth", s.smooth}, {"gap", s.gap}};
      std::string text = s.smooth ? "smooth at " + format_vector(x) + "\n"
                                  : "not smooth at " + format_vector(x) + ": direction " +
                                        format_vector(*s.witness) + " has rho+ - rho- = " +
                                        format_scalar(s.gap) + "\n";
      if (s.witness) j["witness"] = vec_json(*s.witness);
      if (s.smooth) {
        const auto g = gateaux_differential(n, x, tol, method);
        j["gateaux"] = vec_json(g.coefficients());
        text += "Gateaux differential " + format_vector(g.coefficients()) + "\n";
      }
      print(j, c.as_json, text);
      return exit_ok;
    }

    if (*interval) {
      const Vector x = parse_vector(c.x), y = parse_vector(c.y);
      const NormSpec n = load_norm(c.norm, x.dim());
      const auto iv = birkhoff_interval(n, x, y, method);
      json j{{"lo", iv.lo}, {"hi", iv.hi}};
      print(j, c.as_json, "[" + format_scalar(iv.lo) + ", " + format_scalar(iv.hi) + "]\n");
      return exit_ok;
    }

    if (*verify) {
      const json raw = config_path.empty() ? json::object() : load_json(config_path, "config");
      SuiteConfig cfg = config_from_json(raw);
      if (!raw.contains("seed")) cfg.seed = default_seed();
      if (seed) cfg.seed = *seed;
      if (trials) cfg.trials = *trials;
      if (!suites.empty()) {
        cfg.suites.clear();
        for (const auto& s : suites) cfg.suites.push_back(parse_suite(s));
      }
      cfg.threads = threads;
      cfg.validate();
      const auto rep = run_suite(cfg);
      const json j = report_to_json(rep, !no_timing);
      if (!report_out.empty()) {
        std::ofstream f(report_out);
        if (!f) throw Error(ErrorCode::io_error, "cannot write '" + report_out + "'");
        f << j.dump(2) << "\n";
      }
      print(j, c.as_json, render_table(j));
      return rep.exit_code();
    }

    if (*examples) {
      const Lambda l(parse_scalar(c.lambda));
      const auto rows = reference_examples(l);
      json arr = json::array();
      bool ok = true;
      for (const auto& r : rows) {
        json o{{"id", r.id}, {"x", vec_json(r.x)}, {"defined", r.defined}};
        if (r.defined) {
          o["y"] = vec_json(r.y);
          o["rho_minus"] = r.computed.rho_minus;
          o["rho_plus"] = r.computed.rho_plus;
          o["rho"] = r.computed.rho_mid();
          o["rho_lambda"] = r.computed.rho_lambda(l);
          o["birkhoff"] = r.birkhoff;
          o["rho_lambda_orthogonal"] = r.rho_lambda_orthogonal;
          o["max_error"] = r.max_error();
          ok = ok && r.max_error() <= 1e-12;
        } else {
          o["note"] = r.note;
        }
        arr.push_back(o);
      }
      print(json{{"lambda", l.value()}, {"rows", arr}}, c.as_json,
            "lambda = " + format_scalar(l.value()) + "\n" + format_examples(rows));
      return ok ? exit_ok : exit_fail;
    }

    if (*search) {
      const NormSpec n = load_norm(c.norm, directions == 64 ? 2 : directions);
      const Relation a = Relation::parse(relation), b = Relation::parse(relation_b);
      const auto s = search_counterexample(a, b, n, budget, the_seed(), tol);
      json j{{"found", s.found}, {"probes", s.probes}, {"structured", s.structured_hit}};
      if (s.witness) {
        j["x"] = vec_json((*s.witness)[0]);
        j["y"] = vec_json((*s.witness)[1]);
        j["residual_b"] = s.in_b.residual;
      }
      print(j, c.as_json,
            a.name() + " in " + b.name() + " on " + n.label() + ": " + s.witness_text() + " (" +
                std::to_string(s.probes) + " pairs" + (s.structured_hit ? ", structured" : "") + ")\n");
      return exit_ok;
    }

    if (*mapc) {
      const LinearMap t = map_from_json(load_json(map_path, "map"));
      const Lambda l(parse_scalar(c.lambda));
      const std::size_t n_trials = trials ? *trials : 10000;
      SearchOptions so;
      so.seed = the_seed();
      json j{{"check", check_kind}};
      std::string text;
      bool pass = true;
      if (check_kind == "preserve") {
        const auto p = preserves_rho_lambda(t, l, n_trials, the_seed(), tol);
        j["status"] = to_string(p.status);
        j["trials"] = p.trials;
        text = std::string("preserve: ") + to_string(p.status);
        if (p.witness) {
          j["x"] = vec_json(p.witness->first);
          j["z"] = vec_json(p.witness->second);
          j["residual"] = p.residual;
          text += " x = " + format_vector(p.witness->first) + ", z = " + format_vector(p.witness->second);
        }
        pass = p.status == PreservationResult::Status::pass;
      } else if (check_kind == "similarity") {
        const auto s = similarity_defect(t, so);
        j["ratio_max"] = s.ratio_max;
        j["ratio_min"] = s.ratio_min;
        j["defect"] = s.defect();
        j["similarity"] = s.is_similarity();
        j["degenerate"] = s.degenerate;
        text = "ratio_max " + format_decimal(s.ratio_max) + ", ratio_min " + format_decimal(s.ratio_min) +
               (s.is_similarity() ? ": similarity" : ": not a similarity");
        pass = s.is_similarity();
      } else if (check_kind == "scaling") {
        const auto s = scaling_identity_residual(t, l, n_trials, the_seed(), so);
        j["max_residual"] = s.max_residual;
        j["operator_norm"] = s.op_norm;
        j["degenerate"] = s.degenerate;
        text = "operator norm " + format_decimal(s.op_norm) + ", max residual " + format_decimal(s.max_residual);
        pass = !s.degenerate && s.max_residual <= 1e-6;
      } else if (check_kind == "norm") {
        const auto e = operator_norm(t, so);
        j["value"] = e.value;
        j["exact"] = e.is_exact;
        j["witness"] = vec_json(e.witness);
        text = "operator norm " + format_decimal(e.value) + (e.is_exact ? " (exact)" : " (lower bound)") +
               " at " + format_vector(e.witness);
      } else {
        throw Error(ErrorCode::config_error, "unknown check '" + check_kind + "'");
      }
      j["pass"] = pass;
      print(j, c.as_json, text + "\n");
      return exit_ok;
    }

    if (*ratio) {
      const std::size_t d = directions == 64 ? 2 : directions;
      const NormSpec n1 = load_norm(c.norm, d), n2 = load_norm(norm2, d);
      const Lambda l(parse_scalar(c.lambda));
      const auto r = two_norm_rho_ratio(n1, n2, l, trials ? *trials : 10000, the_seed(), 1e-3, tol);
      json j{{"m_hat", r.m_hat}, {"M_hat", r.M_hat}, {"pairs", r.pairs_used}};
      std::string text = "m = " + format_decimal(r.m_hat) + ", M = " + format_decimal(r.M_hat) + " over " +
                         std::to_string(r.pairs_used) + " pairs\n";
      if (r.breaking) {
        j["breaking_x"] = vec_json(r.breaking->first);
        j["breaking_y"] = vec_json(r.breaking->second);
        text += "orthogonal in the first norm only: x = " + format_vector(r.breaking->first) +
                ", y = " + format_vector(r.breaking->second) + "\n";
      }
      print(j, c.as_json, text);
      return exit_ok;
    }

    if (*modulus) {
      const NormSpec n = load_norm(c.norm, directions == 64 ? 2 : directions);
      ModulusOptions mo;
      mo.seed = the_seed();
      const auto m = convexity_modulus(n, epsilon, mo);
      json j{{"epsilon", m.epsilon}, {"delta_hat", m.delta_hat}, {"x", vec_json(m.x)}, {"y", vec_json(m.y)}};
      print(j, c.as_json,
            "delta(" + format_scalar(epsilon) + ") <= " + format_decimal(m.delta_hat) + " at x = " +
                format_vector(m.x) + ", y = " + format_vector(m.y) + "\n");
      return exit_ok;
    }

    if (*plotc) {
      const NormSpec n = load_norm(c.norm, 2);
      PlotOptions po;
      po.kind = parse_plot_kind(kind);
      po.resolution = resolution;
      po.lambda = Lambda(parse_scalar(c.lambda));
      if (!c.x.empty()) po.x = parse_vector(c.x);
      const auto f = plot(n, po, out_path);
      std::cout << "wrote " << f.svg.string() << " and " << f.csv.string() << "\n";
      if (po.kind == PlotKind::orthogonality_field) {
        std::cout << "zero crossings (deg):";
        for (double d : f.data.zero_crossings) std::cout << " " << format_decimal(std::round(d * 1e6) / 1e6);
        std::cout << "\n";
      }
      return exit_ok;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::io_error ? exit_fail : exit_usage;
  }
  return exit_usage;
}
