#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flatsat/io.hpp"
#include "flatsat/lemmas.hpp"

using namespace flatsat;

namespace {

enum Exit { kOk = 0, kInput = 2, kBudget = 3, kInvariant = 4 };

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::BudgetExceeded: return kBudget;
    case ErrorKind::ParseError:
    case ErrorKind::BadParams:
    case ErrorKind::NotPrimePower:
    case ErrorKind::BadDimension:
    case ErrorKind::BadPoint:
    case ErrorKind::EmptySet:
    case ErrorKind::BadJ:
    case ErrorKind::ProbabilityOverflow:
    case ErrorKind::MixedFields: return kInput;
    default: return kInvariant;
  }
}

struct Globals {
  std::uint64_t seed = 0;
  std::uint64_t budget = Budget{}.enumeration;
  std::uint64_t node_budget = Budget{}.search_nodes;
  std::string eps_text = "3/10";
  std::optional<long long> eps_num, eps_den;
  std::string manifest;
  int threads_seen = 0;
};

Rational resolve_eps(const Globals& g) {
  if (g.eps_num || g.eps_den) {
    if (!g.eps_num || !g.eps_den) fail(ErrorKind::BadParams, "--eps-num and --eps-den go together");
    if (*g.eps_den == 0) fail(ErrorKind::BadParams, "--eps-den must be nonzero");
    return Rational(*g.eps_num, *g.eps_den);
  }
  return parse_rational(g.eps_text);
}

std::vector<Rational> parse_list(const std::string& s) {
  std::vector<Rational> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto c = s.find(',', pos);
    std::string item = s.substr(pos, c == std::string::npos ? std::string::npos : c - pos);
    if (!item.empty()) out.push_back(parse_rational(item));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  return out;
}

// Output goes to a file or, for "-" / empty, to stdout.
void emit(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-")
    std::cout << body;
  else
    write_file(path, body);
}

EpsilonParams epsilon_params(const Globals& g, const std::string& hierarchy, const std::string& c_text, int d) {
  EpsilonParams p;
  p.eps = resolve_eps(g);
  p.C = parse_rational(c_text);
  if (!hierarchy.empty()) p.hierarchy = Hierarchy::unflatten(parse_list(hierarchy), d);
  p.validate(d);
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flatsat: coplanar supersaturation and general-position experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--budget", g.budget, "enumeration budget (subsets or candidates per stage)");
  app.add_option("--node-budget", g.node_budget, "backtracking node budget");
  app.add_option("--eps", g.eps_text, "eps as a rational, e.g. 3/10 or 0.3");
  app.add_option("--eps-num", g.eps_num, "eps numerator");
  app.add_option("--eps-den", g.eps_den, "eps denominator");
  app.add_option("--manifest", g.manifest, "manifest path (default: <out>.manifest.json, else one JSON line on stderr)");

  std::string input, out, report, family, hierarchy, c_text = "1", bound_c = "100";
  bool audit = false, timing = false;
  auto* classify_cmd = app.add_subcommand("classify", "classify a point set");
  classify_cmd->add_option("--input", input, "point-set JSON")->required();
  classify_cmd->add_option("--out", out, "outcome JSON (default stdout)");
  classify_cmd->add_option("--hierarchy", hierarchy, "gamma,beta_0..beta_{d-1},eps_1..eps_d as rationals");
  classify_cmd->add_option("--C", c_text, "size constant C");

  auto* construct_cmd = app.add_subcommand("construct", "build a coplanar family");
  construct_cmd->add_option("--input", input, "point-set JSON")->required();
  construct_cmd->add_option("--out", out, "family JSONL (default stdout)");
  construct_cmd->add_option("--report", report, "run report JSON");
  construct_cmd->add_option("--hierarchy", hierarchy, "gamma,beta_0..beta_{d-1},eps_1..eps_d as rationals");
  construct_cmd->add_option("--C", c_text, "size constant C");
  construct_cmd->add_option("--bound-C", bound_c, "constant for the pass/fail bound checks");
  construct_cmd->add_flag("--audit-aux", audit, "build and check H_F on every balanced witness flat");

  auto* verify_cmd = app.add_subcommand("verify", "check a family against its point set");
  verify_cmd->add_option("--input", input, "point-set JSON")->required();
  verify_cmd->add_option("--family", family, "family JSONL")->required();
  verify_cmd->add_option("--out", out, "bounds report JSON (default stdout)");
  verify_cmd->add_option("--bound-C", bound_c, "constant for the pass/fail bound checks");

  std::uint32_t q = 0;
  int d = 0, k = 0, trials = 1;
  std::string grid = "auto", mode = "auto";
  auto* sweep_cmd = app.add_subcommand("alpha-sweep", "estimate alpha(F_q^d, p) over a p grid");
  sweep_cmd->add_option("--q", q)->required();
  sweep_cmd->add_option("--d", d)->required();
  sweep_cmd->add_option("--grid", grid, "'auto' or a comma list of rationals");
  sweep_cmd->add_option("--trials", trials);
  sweep_cmd->add_option("--mode", mode, "exact | greedy | both | auto");
  sweep_cmd->add_option("--out", out, "CSV (default stdout)");
  sweep_cmd->add_flag("--timing", timing, "record wall-clock millis (breaks byte determinism)");

  auto* count_cmd = app.add_subcommand("count-igp", "count k-sets in general position in F_q^d");
  count_cmd->add_option("--q", q)->required();
  count_cmd->add_option("--d", d)->required();
  count_cmd->add_option("--k", k)->required();

  std::uint64_t st_trials = 500;
  std::optional<std::uint64_t> inject;
  auto* self_cmd = app.add_subcommand("selftest", "run the lemma property suites");
  self_cmd->add_option("--trials", st_trials, "trials per suite");
  self_cmd->add_option("--inject-fault", inject, "flip the n-th is_igp answer (0-based)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  RunManifest man;
  man.started = std::chrono::system_clock::now();
  man.seed = g.seed;
  const CLI::App* sub = app.get_subcommands().front();
  man.command = sub->get_name();
  for (const auto* opt : app.get_options())
    if (opt->count() && opt->get_name() != "--help") man.parameters[opt->get_name()] = opt->as<std::string>();
  for (const auto* opt : sub->get_options())
    if (opt->count() && opt->get_name() != "--help") man.parameters[opt->get_name()] = opt->as<std::string>();

  auto finish = [&](int code) {
    man.finished = std::chrono::system_clock::now();
    man.exit_code = code;
    std::string path = g.manifest;
    if (path.empty() && !out.empty() && out != "-") path = out + ".manifest.json";
    try {
      if (path.empty())
        std::cerr << man.to_json().dump() << "\n";
      else
        write_file(path, man.to_json().dump(2) + "\n");
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      if (code == kOk) code = kInput;
    }
    return code;
  };

  Budget budget{g.budget, g.node_budget};
  try {
    if (sub == classify_cmd || sub == construct_cmd || sub == verify_cmd) {
      std::string text = read_file(input);
      man.input_digest = sha256_hex(text);
      PointSet x = [&] {
        try {
          return parse_point_set(text);
        } catch (const Error& e) {
          fail(e.kind(), input + ": " + std::string(e.what()).substr(std::string(to_string(e.kind())).size() + 2));
        }
      }();
      if (sub == classify_cmd) {
        auto params = epsilon_params(g, hierarchy, c_text, x.dim());
        auto o = classify(x, params, budget, g.seed);
        emit(out, outcome_json(o).dump(2) + "\n");
      } else if (sub == construct_cmd) {
        auto params = epsilon_params(g, hierarchy, c_text, x.dim());
        ConstructOptions opt{budget, audit};
        auto r = construct(x, params, g.seed, opt);
        auto b = verify_bounds(r.family, x.field().q(), x.dim(), parse_rational(bound_c));
        emit(out, family_jsonl(r.family));
        if (!report.empty()) write_file(report, construct_report_json(r, b, g.seed).dump(2) + "\n");
      } else {
        std::string ftext = read_file(family);
        auto fam = parse_family_jsonl(ftext, x.size(), x.dim());
        std::size_t bad = 0;
        for (const auto& m : fam.members)
          if (!is_coplanar_kset(x, m)) ++bad;
        auto b = verify_bounds(fam, x.field().q(), x.dim(), parse_rational(bound_c));
        Json j;
        j["members"] = fam.members.size();
        j["non_coplanar"] = bad;
        j["bounds"] = bounds_json(b);
        emit(out, j.dump(2) + "\n");
        if (bad) {
          std::cerr << "error: " << bad << " member(s) are not coplanar\n";
          return finish(kInvariant);
        }
      }
    } else if (sub == sweep_cmd) {
      SweepConfig cfg;
      cfg.q = q;
      cfg.d = d;
      cfg.trials = trials;
      cfg.seed = g.seed;
      cfg.mode = parse_solver_mode(mode);
      cfg.node_budget = app.get_option("--node-budget")->count() ? g.node_budget : SweepConfig{}.node_budget;
      cfg.timing = timing;
      cfg.grid = grid == "auto" ? auto_grid(q, d) : parse_list(grid);
      auto rows = alpha_sweep(cfg);
      emit(out, sweep_csv(cfg, rows));
    } else if (sub == count_cmd) {
      std::cout << count_igp_ksets(q, d, k, g.budget).str() << "\n";
    } else if (sub == self_cmd) {
      lemmas::Hooks hooks = inject ? lemmas::flip_igp_call(*inject) : lemmas::Hooks{};
      auto start = std::chrono::steady_clock::now();
      bool all = true;
      for (const auto& s : lemmas::all_suites()) {
        auto r = s.run(st_trials, g.seed, hooks);
        all &= r.passed();
        std::cout << (r.passed() ? "PASS " : "FAIL ") << r.label << " trials=" << r.trials << " checks=" << r.checks << " failures=" << r.failures;
        if (!r.passed()) std::cout << " first: " << r.first_failure;
        std::cout << "\n";
      }
      auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cout << (all ? "selftest passed" : "selftest FAILED") << " in " << secs << " s\n";
      if (!all) return finish(kInvariant);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return finish(exit_code_for(e.kind()));
  }
  return finish(kOk);
}
