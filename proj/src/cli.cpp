#include "mst/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "mst/eval.hpp"
#include "mst/parser.hpp"
#include "mst/pretty.hpp"
#include "mst/typecheck.hpp"

namespace mst::cli {

StateDomain make_oktmp_domain(std::size_t n) {
  StateDomain dom;
  dom.name = "oktmp";
  // ok{i} first, then tmp{i}_{j}; the lifted preorder compares the first
  // component (the Ok value, or the Tmp snapshot).
  std::vector<std::size_t> first;
  for (std::size_t i = 0; i <= n; ++i) {
    dom.constants.push_back("ok" + std::to_string(i));
    first.push_back(i);
  }
  std::size_t tmp_base = dom.constants.size();
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= n; ++j) {
      dom.constants.push_back("tmp" + std::to_string(i) + "_" +
                              std::to_string(j));
      first.push_back(i);
    }
  dom.exhaustive = true;
  dom.leq = [first](std::size_t a, std::size_t b) {
    return first[a] <= first[b];
  };

  auto is_ok = [n, tmp_base](std::size_t s) { return s < tmp_base; };
  auto tmp_of = [n, tmp_base](std::size_t snap, std::size_t act) {
    return tmp_base + snap * (n + 1) + act;
  };
  auto snap_of = [n, tmp_base](std::size_t s) {
    return (s - tmp_base) / (n + 1);
  };
  auto act_of = [n, tmp_base](std::size_t s) {
    return (s - tmp_base) % (n + 1);
  };
  auto axiom_for = [](const Name& prim) {
    return f_forall("s", type_state(),
                    f_rel(v_var("s"), v_prim(prim, v_var("s"))));
  };

  dom.prims.push_back({"brk",
                       [=](std::size_t s) {
                         if (!is_ok(s)) return s;
                         return tmp_of(s, s);
                       },
                       axiom_for("brk")});
  dom.prims.push_back({"bump",
                       [=](std::size_t s) {
                         if (is_ok(s)) return s;
                         std::size_t a = act_of(s);
                         return tmp_of(snap_of(s), a < n ? a + 1 : n);
                       },
                       axiom_for("bump")});
  dom.prims.push_back({"drop",
                       [=](std::size_t s) {
                         if (is_ok(s)) return s;
                         return tmp_of(snap_of(s), 0);
                       },
                       axiom_for("drop")});
  dom.prims.push_back({"restore",
                       [=](std::size_t s) {
                         if (is_ok(s)) return s;
                         std::size_t sn = snap_of(s), a = act_of(s);
                         if (sn <= a) return a;  // Ok(actual)
                         return s;               // not restorable yet
                       },
                       axiom_for("restore")});
  return dom;
}

DomainRegistry corpus_registry() {
  DomainRegistry reg = builtin_registry();
  auto err = reg.add(make_oktmp_domain());
  (void)err;
  return reg;
}

namespace {

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t env_depth_or(std::size_t fallback) {
  if (const char* v = std::getenv("MST_PROVER_DEPTH")) {
    try {
      return std::stoul(v);
    } catch (...) {
    }
  }
  return fallback;
}

struct LoadedProgram {
  SourceProgram prog;
  const StateDomain* dom;
};

// Returns the exit code on failure via `code`.
std::optional<LoadedProgram> load_program(const std::string& path,
                                          const DomainRegistry& reg,
                                          std::ostream& err, int& code) {
  auto text = slurp(path);
  if (!text) {
    err << "error: cannot read '" << path << "'\n";
    code = kUsage;
    return std::nullopt;
  }
  try {
    SourceProgram prog = parse_program(*text, reg);
    const StateDomain* dom = reg.find(prog.domain_name);
    return LoadedProgram{std::move(prog), dom};
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    code = kUsage;
    return std::nullopt;
  }
}

int cmd_check(const std::string& path, std::size_t depth,
              const std::string& format, bool verdicts, std::ostream& out,
              std::ostream& err) {
  DomainRegistry reg = corpus_registry();
  int code = kOk;
  auto loaded = load_program(path, reg, err, code);
  if (!loaded) return code;
  logic::ProverOptions popts;
  popts.max_depth = depth;
  tc::Checker checker(*loaded->dom, popts);
  try {
    tc::CheckReport report = checker.check_comp(
        Context{}, loaded->prog.main, loaded->prog.ascription,
        /*discharge=*/verdicts && depth > 0);
    if (format == "machine")
      out << report.render_machine();
    else
      out << report.render_text();
    if (!verdicts || depth == 0) return kOk;
    return report.accepted ? kOk : kReject;
  } catch (const tc::TypeError& e) {
    err << "type error";
    if (e.pos.known()) err << " at " << e.pos.line << ":" << e.pos.col;
    err << ": " << e.what() << "\n";
    return kReject;
  } catch (const logic::ResourceLimitError& e) {
    err << "resource limit: " << e.what() << "\n";
    return kResourceLimit;
  }
}

int cmd_run(const std::string& path, std::string state_name, std::size_t fuel,
            const std::string& trace_path, bool harness, std::size_t depth,
            std::ostream& out, std::ostream& err) {
  DomainRegistry reg = corpus_registry();
  int code = kOk;
  auto loaded = load_program(path, reg, err, code);
  if (!loaded) return code;
  const StateDomain& dom = *loaded->dom;
  if (state_name.empty()) state_name = dom.constants.front();
  if (!dom.has_constant(state_name)) {
    err << "error: '" << state_name << "' is not a state of domain '"
        << dom.name << "'\n";
    return kUsage;
  }

  interp::Trace trace = interp::run(loaded->prog.main, v_const(state_name),
                                    dom, fuel);
  trace.ascription = loaded->prog.ascription;

  if (!trace_path.empty()) {
    std::ofstream tf(trace_path, std::ios::binary);
    if (!tf) {
      err << "error: cannot write '" << trace_path << "'\n";
      return kUsage;
    }
    tf << interp::trace_to_text(trace);
  }

  switch (trace.end) {
    case interp::Trace::End::Stuck:
      err << "stuck: " << trace.diagnostic << "\n";
      return kReject;
    case interp::Trace::End::FuelExhausted:
      err << "fuel exhausted after " << fuel << " steps\n";
      return kResourceLimit;
    case interp::Trace::End::Done:
      break;
  }
  const interp::Configuration& last = trace.configs.back();
  out << "result: " << pretty(trace.result) << "\n";
  out << "final state: " << pretty(last.state) << "\n";
  out << "log size: " << last.log.size() << "\n";
  out << "steps: " << trace.rules.size() << "\n";

  int status = kOk;
  if (harness) {
    interp::HarnessReport rep = interp::harness_check(trace, dom, depth);
    out << rep.render() << "\n";
    if (!rep.ok()) status = kReject;
  }
  if (loaded->prog.expect) {
    auto res = interp::eval_formula(
        dom, apply_pred(*loaded->prog.expect, trace.result), &last.log,
        last.state, depth);
    if (const auto* r = std::get_if<EvalResult>(&res); r && r->value) {
      out << "expect: pass\n";
    } else {
      out << "expect: fail\n";
      status = kReject;
    }
  }
  return status;
}

int cmd_prove(const std::string& path, std::size_t depth, std::ostream& out,
              std::ostream& err) {
  auto text = slurp(path);
  if (!text) {
    err << "error: cannot read '" << path << "'\n";
    return kUsage;
  }
  DomainRegistry reg = corpus_registry();
  try {
    ParsedSequent ps = parse_sequent(*text, reg);
    logic::ProverOptions opts;
    opts.max_depth = depth;
    opts.constants = reg.find(ps.domain_name)->constants;
    logic::ProveOutcome o = logic::sc_prove(ps.sequent, opts);
    if (const auto* p = std::get_if<logic::Proved>(&o)) {
      auto cr = logic::check_proof(p->proof);
      out << "proved (" << logic::proof_size(p->proof) << " proof nodes, "
          << (cr.ok ? "checked" : "CHECK FAILED: " + cr.diagnostic) << ")\n";
      return cr.ok ? kOk : kReject;
    }
    out << "unknown: search exhausted at depth "
        << std::get<logic::Unknown>(o).depth_exhausted << "\n";
    return kReject;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const logic::ResourceLimitError& e) {
    err << "resource limit: " << e.what() << "\n";
    return kResourceLimit;
  }
}

int cmd_replay(const std::string& path, const std::string& domain_name,
               bool harness, std::ostream& out, std::ostream& err) {
  auto text = slurp(path);
  if (!text) {
    err << "error: cannot read '" << path << "'\n";
    return kUsage;
  }
  DomainRegistry reg = corpus_registry();
  const StateDomain* dom = reg.find(domain_name);
  if (!dom) {
    err << "error: unknown domain '" << domain_name << "'\n";
    return kUsage;
  }
  if (!harness) {
    out << "replay: harness off, trace accepted unchecked\n";
    return kOk;
  }
  if (auto diag = interp::replay_check(*text, *dom)) {
    err << "replay violation: " << *diag << "\n";
    return kReject;
  }
  out << "replay: ok\n";
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"monotonic-state calculus toolkit"};
  app.require_subcommand(1);
  unsigned seed = 0;
  app.add_option("--seed", seed,
                 "seed for randomized generators (reproducibility)");

  std::string file, format = "text", state, trace_path, domain = "counter";
  std::size_t depth_check = env_depth_or(10);
  std::size_t depth_prove = env_depth_or(8);
  std::size_t fuel = 100000;
  bool harness = true;
  std::string harness_str = "on";

  CLI::App* check = app.add_subcommand("check", "typecheck a program");
  check->add_option("file", file)->required();
  check->add_option("--depth", depth_check, "prover depth bound");
  check->add_option("--format", format, "text|machine")
      ->check(CLI::IsMember({"text", "machine"}));

  CLI::App* runc = app.add_subcommand("run", "run a program under the harness");
  runc->add_option("file", file)->required();
  runc->add_option("--state", state, "initial state constant");
  runc->add_option("--fuel", fuel, "maximum steps");
  runc->add_option("--trace", trace_path, "write the trace to a file");
  runc->add_option("--harness", harness_str, "on|off")
      ->check(CLI::IsMember({"on", "off"}));

  CLI::App* prove = app.add_subcommand("prove", "prove a sequent file");
  prove->add_option("file", file)->required();
  prove->add_option("--depth", depth_prove, "prover depth bound");

  CLI::App* obl =
      app.add_subcommand("obligations", "list a program's obligations");
  obl->add_option("file", file)->required();
  std::size_t depth_obl = env_depth_or(10);
  obl->add_option("--depth", depth_obl,
                  "prover depth bound (0: list without verdicts)");

  CLI::App* replay = app.add_subcommand("trace-replay", "replay a trace file");
  replay->add_option("file", file)->required();
  replay->add_option("--domain", domain, "state domain of the trace");
  replay->add_option("--harness", harness_str, "on|off")
      ->check(CLI::IsMember({"on", "off"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }
  harness = harness_str != "off";

  if (check->parsed())
    return cmd_check(file, depth_check, format, true, out, err);
  if (runc->parsed())
    return cmd_run(file, state, fuel, trace_path, harness, env_depth_or(6),
                   out, err);
  if (prove->parsed()) return cmd_prove(file, depth_prove, out, err);
  if (obl->parsed())
    return cmd_check(file, depth_obl, "text", depth_obl > 0, out, err);
  if (replay->parsed()) return cmd_replay(file, domain, harness, out, err);
  err << "usage error: no command\n";
  return kUsage;
}

}  // namespace mst::cli
