#pragma once

// The `episteme` command line. Every subcommand writes one JSON report (or
// DOT text) to `out`; exit codes: 0 success, 3 misaligned or speculative
// trade found, 2 usage error, 1 model or input error.

#include "reproduce.hpp"
#include "report.hpp"

#include <episteme/episteme.hpp>

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <variant>
#include <string>
#include <vector>

namespace episteme::cli {

constexpr int kOk = 0;
constexpr int kModelError = 1;
constexpr int kUsage = 2;
constexpr int kFlagged = 3;

// ---- JSON views of library results ----

inline json types_json(const AmbientStructure& s, std::size_t agent, const TypeSet& t) {
  json out = json::array();
  for (auto k = t.find_first(); k != TypeSet::npos; k = t.find_next(k)) out.push_back(s.type_label({agent, k}));
  return out;
}

inline json witness_json(const AmbientStructure& s, const MisalignmentWitness& w) {
  return {{"agent_i", s.agent_name(w.agent_i)},
          {"type_i", s.type_label(w.type_i)},
          {"order_m", w.order_m},
          {"agent_j", s.agent_name(w.agent_j)},
          {"offending", s.type_label(w.offending)}};
}

inline json violation_json(const AmbientStructure& s, const SupportViolation& v) {
  return {{"agent_i", s.agent_name(v.type.agent)},
          {"type_i", s.type_label(v.type)},
          {"agent_j", s.agent_name(v.offending.agent)},
          {"offending", s.type_label(v.offending)}};
}

inline json profile_json(const std::vector<AgentDependentStructure>& profile) {
  json out = json::array();
  for (const auto& c : profile) {
    const auto& s = c.space.ambient();
    out.push_back({{"owner", s.agent_name(c.owner)},
                   {"real", types_json(s, c.owner, c.real_types)},
                   {"imaginary", types_json(s, c.owner, c.imaginary_types())},
                   {"space", space_to_json(c.space)}});
  }
  return out;
}

inline json certificate_json(const Certificate& c) {
  json j{{"kind", c.kind}, {"rank", c.rank.rank}, {"augmented_rank", c.rank.augmented_rank}};
  if (!c.conflict_row.empty()) j["conflict_row"] = c.conflict_row;
  if (!c.forced_zero.empty()) j["forced_zero"] = c.forced_zero;
  return j;
}

inline json feasibility_json(const FeasibilityResult& r) {
  json j{{"feasible", r.feasible}, {"slack", to_string(r.slack)}};
  j["prior"] = r.prior ? prior_to_json(*r.prior) : json(nullptr);
  j["certificate"] = r.certificate ? certificate_json(*r.certificate) : json(nullptr);
  return j;
}

// ---- command context ----

struct Context {
  std::string model_path;
  bool allow_redundant = false;
  std::string out_format = "json";
  std::optional<Model> model;
  std::vector<Input> inputs;

  const Model& load() {
    if (!model) {
      if (model_path.empty()) throw UsageError("--model FILE is required");
      model = load_model(read_input(inputs, "model", model_path), {!allow_redundant});
    }
    return *model;
  }
  const AmbientStructure& ambient() { return *load().ambient; }

  /// A space declared in the model; "full" names the whole product when the
  /// model does not declare a space of that name.
  StateSpace space(const std::string& name) {
    const auto& m = load();
    auto it = m.spaces.find(name);
    if (it != m.spaces.end()) return it->second;
    if (name == "full") return StateSpace::full(m.ambient);
    throw ModelError(ModelError::Kind::undeclared_name, "no space named '" + name + "' in the model");
  }

  std::size_t agent(const std::string& name) {
    auto a = ambient().find_agent(name);
    if (!a) throw ModelError(ModelError::Kind::undeclared_name, "no agent named '" + name + "'");
    return *a;
  }

  /// minimal | definition | space:NAME (every agent's structure is NAME).
  std::vector<AgentDependentStructure> profile(const std::string& spec, const StateSpace& w) {
    if (spec == "minimal") return closure_profile(w, ClosureMode::minimal);
    if (spec == "definition") return closure_profile(w, ClosureMode::definition);
    if (spec.rfind("space:", 0) == 0) {
      const StateSpace shared = space(spec.substr(6));
      std::vector<AgentDependentStructure> out;
      for (std::size_t i = 0; i < w.ambient().agent_count(); ++i) out.push_back(make_structure(i, w.types(i), shared));
      return out;
    }
    throw UsageError("--profile must be minimal, definition or space:NAME, got '" + spec + "'");
  }

  Event event(const std::string& path) { return parse_event(read_input(inputs, "event", path), load().ambient); }

  RunReport report(std::string command, std::string verdict, json result) {
    return RunReport{std::move(command), inputs, std::move(verdict), std::move(result), std::nullopt};
  }
};

inline ClosureMode closure_mode(const std::string& s) {
  if (s == "minimal") return ClosureMode::minimal;
  if (s == "definition") return ClosureMode::definition;
  throw UsageError("--mode must be minimal or definition");
}

inline Order parse_order(const std::string& s) {
  if (s == "inf") return std::nullopt;
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 9)
    throw UsageError("--m must be a non-negative integer or 'inf'");
  return static_cast<std::size_t>(std::stoul(s));
}

inline TradeSemantics semantics(const std::string& sem, const std::string& threshold) {
  TradeSemantics out;
  if (sem == "s1") out.mode = TradeMode::s1;
  else if (sem == "s2") out.mode = TradeMode::s2;
  else throw UsageError("--sem must be s1 or s2");
  if (threshold == "strict") out.threshold = Threshold::strict;
  else if (threshold == "weak") out.threshold = Threshold::weak;
  else throw UsageError("--threshold must be strict or weak");
  return out;
}

inline json trade_report_json(const AmbientStructure& s, const AcceptanceReport& rep) {
  json structures = json::array();
  for (const auto& sr : rep.structures) {
    json gains = json::array();
    for (const auto& g : sr.gains)
      gains.push_back({{"type", s.type_label(g.type)}, {"gain", to_string(g.gain)}, {"accept", g.accept}, {"real", g.real}});
    structures.push_back({{"owner", s.agent_name(sr.owner)},
                          {"covered", sr.covered},
                          {"common_acceptance", types_json(s, sr.owner, sr.common_acceptance)},
                          {"gains", std::move(gains)}});
  }
  return {{"semantics",
           {{"mode", rep.semantics.mode == TradeMode::s1 ? "s1" : "s2"},
            {"threshold", rep.semantics.threshold == Threshold::strict ? "strict" : "weak"}}},
          {"verdict", to_string(rep.verdict)},
          {"structures", std::move(structures)}};
}

/// Profile priors for the trade commands: a common prior per structure, or
/// the name of the first structure without one.
inline std::variant<std::vector<Prior>, std::string> structure_priors(const std::vector<AgentDependentStructure>& profile) {
  std::vector<Prior> out;
  for (const auto& c : profile) {
    auto r = find_common_prior(c.space);
    if (!r.feasible) return "structure of " + c.space.ambient().agent_name(c.owner) + " has no common prior";
    out.push_back(*r.prior);
  }
  return out;
}

// ---- entry point ----

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Belief-hierarchy misalignment, agent-dependent structures, priors and trade", "episteme"};
  app.require_subcommand(1);
  Context ctx;
  std::string seed;
  app.add_option("--model", ctx.model_path, "model file (JSON)");
  app.add_option("--out", ctx.out_format, "json | dot")->check(CLI::IsMember({"json", "dot"}));
  app.add_option("--seed", seed, "reserved; every operation is deterministic");
  app.add_flag("--allow-redundant", ctx.allow_redundant, "load models with duplicate belief hierarchies");

  // Each subcommand fills `action`; it runs after parsing succeeds.
  std::function<int()> action;
  auto emit = [&](const RunReport& r, int code) {
    out << r.dump();
    return code;
  };

  std::string space_name, agent_name, mode, profile_spec = "minimal", event_path, order = "inf", pi_path, trade_path,
                                            sem = "s1", threshold = "strict", real_name, nodes_path, fixture_dir;
  bool trace = false, update = false, timings = false;

  auto* misalign = app.add_subcommand("misalign", "misalignment verdict and witness");
  misalign->add_option("--space", space_name)->required();
  misalign->add_option("--mode", mode, "def | closure | both")->check(CLI::IsMember({"def", "closure", "both"}));
  misalign->callback([&] {
    action = [&] {
      const auto w = ctx.space(space_name);
      const auto& s = ctx.ambient();
      const std::string m = mode.empty() ? "both" : mode;
      json res{{"space", space_name}, {"mode", m}};
      bool flagged = false;
      std::optional<bool> by_def, by_closure;
      if (m != "closure") {
        auto wit = misaligned_by_definition(w);
        by_def = wit.has_value();
        res["definition"] = {{"misaligned", *by_def}, {"witness", wit ? witness_json(s, *wit) : json(nullptr)}};
      }
      if (m != "def") {
        auto v = misaligned_by_closure(w);
        by_closure = v.has_value();
        res["closure"] = {{"misaligned", *by_closure}, {"witness", v ? violation_json(s, *v) : json(nullptr)}};
      }
      flagged = by_def.value_or(false) || by_closure.value_or(false);
      if (by_def && by_closure) res["agree"] = *by_def == *by_closure;
      return emit(ctx.report("misalign", flagged ? "misaligned" : "aligned", std::move(res)), flagged ? kFlagged : kOk);
    };
  });

  auto* closure = app.add_subcommand("closure", "agent closure of a space");
  closure->add_option("--space", space_name)->required();
  closure->add_option("--agent", agent_name)->required();
  closure->add_option("--mode", mode, "minimal | definition");
  closure->callback([&] {
    action = [&] {
      const auto w = ctx.space(space_name);
      const auto i = ctx.agent(agent_name);
      const auto cm = closure_mode(mode.empty() ? "minimal" : mode);
      auto r = agent_closure_traced(i, w, cm);
      json chain = json::array();
      for (const auto& step : r.chain) chain.push_back(space_to_json(step));
      json res{{"space", space_name},
               {"agent", agent_name},
               {"mode", to_string(cm)},
               {"closure", space_to_json(r.space)},
               {"chain", std::move(chain)}};
      return emit(ctx.report("closure", "ok", std::move(res)), kOk);
    };
  });

  auto* classify = app.add_subcommand("classify", "degenerate/common classification of a profile");
  classify->add_option("--space", space_name)->required();
  classify->add_option("--profile", profile_spec, "minimal | definition | space:NAME");
  classify->callback([&] {
    action = [&] {
      const auto w = ctx.space(space_name);
      const auto profile = ctx.profile(profile_spec, w);
      const auto tax = classify_profile(profile, w);
      json per = json::array();
      for (std::size_t i = 0; i < tax.per_agent.size(); ++i)
        per.push_back({{"agent", ctx.ambient().agent_name(i)},
                       {"new_states_introduced", tax.per_agent[i].new_states_introduced},
                       {"space", space_to_json(tax.per_agent[i].space)}});
      const auto cell = taxonomy_cell(tax.degenerate, tax.common);
      json res{{"space", space_name},
               {"profile", profile_spec},
               {"degenerate", tax.degenerate},
               {"common", tax.common},
               {"cell", cell},
               {"trade_cell", trade_cell(tax.degenerate, tax.common)},
               {"structures", profile_json(profile)},
               {"per_agent", std::move(per)}};
      return emit(ctx.report("classify", cell, std::move(res)), kOk);
    };
  });

  auto* cb = app.add_subcommand("cb", "common correct belief of an event");
  cb->add_option("--space", space_name)->required();
  cb->add_option("--event", event_path)->required();
  cb->add_option("--m", order, "order K or inf");
  cb->add_flag("--trace", trace, "include the stage list");
  cb->callback([&] {
    action = [&] {
      const auto w = ctx.space(space_name);
      const auto e = ctx.event(event_path);
      const auto m = parse_order(order);
      auto r = common_correct_belief(e, w, m);
      json res{{"space", space_name}, {"m", order}, {"result", event_to_json(r.result)}};
      res["fixpoint_depth"] = r.trace.fixpoint_depth ? json(*r.trace.fixpoint_depth) : json(nullptr);
      if (trace) {
        json stages = json::array();
        for (const auto& st : r.trace.stages) stages.push_back(event_to_json(st));
        res["stages"] = std::move(stages);
      }
      return emit(ctx.report("cb", r.result.empty() ? "empty" : "nonempty", std::move(res)), kOk);
    };
  });

  auto* rcb = app.add_subcommand("real-cb", "real common correct belief inside an agent's structure");
  rcb->add_option("--space", space_name)->required();
  rcb->add_option("--agent", agent_name)->required();
  rcb->add_option("--profile", profile_spec, "minimal | definition | space:NAME");
  rcb->add_option("--event", event_path)->required();
  rcb->add_option("--m", order, "order K or inf");
  rcb->callback([&] {
    action = [&] {
      const auto w = ctx.space(space_name);
      const auto i = ctx.agent(agent_name);
      const auto profile = ctx.profile(profile_spec, w);
      const auto e = ctx.event(event_path);
      const auto& c = profile.at(i);
      const auto t = real_cb(i, e, c, parse_order(order));
      json res{{"space", space_name},
               {"agent", agent_name},
               {"profile", profile_spec},
               {"m", order},
               {"structure", space_to_json(c.space)},
               {"types", types_json(ctx.ambient(), i, t)}};
      return emit(ctx.report("real-cb", t.none() ? "empty" : "nonempty", std::move(res)), kOk);
    };
  });

  auto* prior = app.add_subcommand("prior", "common and consistent priors");
  prior->require_subcommand(1);
  auto* common = prior->add_subcommand("common", "common prior on a belief-closed space");
  common->add_option("--space", space_name)->required();
  common->callback([&] {
    action = [&] {
      const auto w = ctx.space(space_name);
      auto r = find_common_prior(w);
      json res = feasibility_json(r);
      res["space"] = space_name;
      return emit(ctx.report("prior common", r.feasible ? "feasible" : "infeasible", std::move(res)), kOk);
    };
  });
  auto* consistent = prior->add_subcommand("consistent", "consistent prior for a profile");
  consistent->add_option("--space", space_name)->required();
  consistent->add_option("--profile", profile_spec, "minimal | definition | space:NAME");
  consistent->add_option("--pi", pi_path, "check this prior instead of searching");
  consistent->callback([&] {
    action = [&] {
      const auto w = ctx.space(space_name);
      const auto profile = ctx.profile(profile_spec, w);
      json res{{"space", space_name}, {"profile", profile_spec}};
      auto priors = structure_priors(profile);
      if (auto* why = std::get_if<std::string>(&priors)) {
        res["reason"] = *why;
        return emit(ctx.report("prior consistent", "no-profile-priors", std::move(res)), kOk);
      }
      const auto& pis = std::get<std::vector<Prior>>(priors);
      json pj = json::array();
      for (const auto& p : pis) pj.push_back(prior_to_json(p));
      res["profile_priors"] = std::move(pj);
      if (!pi_path.empty()) {
        const auto pi = parse_prior(read_input(ctx.inputs, "pi", pi_path), w);
        auto v = check_consistent_prior(pi, pis);
        res["pi"] = prior_to_json(pi);
        res["consistent"] = !v;
        if (v) {
          const auto& s = ctx.ambient();
          json vj{{"kind", to_string(v->kind)}};
          if (v->state) vj["state"] = s.state_name(*v->state);
          if (v->other_state) vj["other_state"] = s.state_name(*v->other_state);
          if (v->agent) vj["agent"] = s.agent_name(*v->agent);
          res["violation"] = std::move(vj);
        }
        return emit(ctx.report("prior consistent", v ? "inconsistent" : "consistent", std::move(res)), kOk);
      }
      auto r = find_consistent_prior(w, pis);
      res.update(feasibility_json(r));
      return emit(ctx.report("prior consistent", r.feasible ? "feasible" : "infeasible", std::move(res)), kOk);
    };
  });

  auto* trade = app.add_subcommand("trade", "speculative trade");
  trade->require_subcommand(1);
  auto add_trade_flags = [&](CLI::App* sub) {
    sub->add_option("--space", space_name)->required();
    sub->add_option("--profile", profile_spec, "minimal | definition | space:NAME");
    sub->add_option("--sem", sem, "s1 | s2");
    sub->add_option("--threshold", threshold, "strict | weak");
  };
  auto* check = trade->add_subcommand("check", "evaluate a trade file");
  add_trade_flags(check);
  check->add_option("--trade", trade_path)->required();
  check->callback([&] {
    action = [&] {
      const auto w = ctx.space(space_name);
      const auto profile = ctx.profile(profile_spec, w);
      const auto ts = semantics(sem, threshold);
      const auto x = parse_trade(read_input(ctx.inputs, "trade", trade_path), ctx.load().ambient);
      auto rep = evaluate_trade(x, profile, ts);
      const auto tax = classify_profile(profile, w);
      json res{{"space", space_name},
               {"profile", profile_spec},
               {"trade_cell", trade_cell(tax.degenerate, tax.common)},
               {"report", trade_report_json(ctx.ambient(), rep)}};
      const bool spec = rep.verdict == Verdict::speculative;
      return emit(ctx.report("trade check", to_string(rep.verdict), std::move(res)), spec ? kFlagged : kOk);
    };
  });
  auto* find = trade->add_subcommand("find", "search for a speculative trade");
  add_trade_flags(find);
  find->callback([&] {
    action = [&] {
      const auto w = ctx.space(space_name);
      const auto profile = ctx.profile(profile_spec, w);
      const auto ts = semantics(sem, threshold);
      auto x = find_speculative_trade(profile, ts);
      const auto tax = classify_profile(profile, w);
      json res{{"space", space_name}, {"profile", profile_spec}, {"trade_cell", trade_cell(tax.degenerate, tax.common)}};
      res["trade"] = x ? trade_to_json(*x) : json(nullptr);
      res["report"] = x ? trade_report_json(ctx.ambient(), evaluate_trade(*x, profile, ts)) : json(nullptr);
      return emit(ctx.report("trade find", x ? "speculative" : "none", std::move(res)), x ? kFlagged : kOk);
    };
  });
  auto* nt = trade->add_subcommand("no-trade-theorem", "check the no-trade result on a profile");
  nt->add_option("--space", space_name)->required();
  nt->add_option("--profile", profile_spec, "minimal | definition | space:NAME (default space:<--space>)");
  nt->add_option("--pi", pi_path)->required();
  nt->callback([&] {
    action = [&] {
      const auto w = ctx.space(space_name);
      const std::string spec = nt->count("--profile") ? profile_spec : "space:" + space_name;
      const auto profile = ctx.profile(spec, w);
      const auto pi = parse_prior(read_input(ctx.inputs, "pi", pi_path), w);
      const auto tax = classify_profile(profile, w);
      json res{{"space", space_name}, {"profile", spec}, {"trade_cell", trade_cell(tax.degenerate, tax.common)}};
      NoTradeResult r;
      auto priors = structure_priors(profile);
      if (auto* why = std::get_if<std::string>(&priors))
        r = {NoTradeResult::Status::hypothesis_not_met, *why, std::nullopt};
      else
        r = verify_no_trade_theorem(w, profile, std::get<std::vector<Prior>>(priors), pi);
      res["status"] = to_string(r.status);
      if (!r.reason.empty()) res["reason"] = r.reason;
      res["counterexample"] = r.counterexample ? trade_to_json(*r.counterexample) : json(nullptr);
      const bool found = r.status == NoTradeResult::Status::counterexample;
      return emit(ctx.report("trade no-trade-theorem", to_string(r.status), std::move(res)), found ? kFlagged : kOk);
    };
  });

  auto* dot = app.add_subcommand("dot", "Graphviz diagram of a space's belief arrows");
  dot->add_option("--space", space_name)->required();
  dot->add_option("--real", real_name, "space whose type sets are the real types");
  dot->add_option("--nodes", nodes_path, "event file restricting the drawn states");
  dot->callback([&] {
    action = [&] {
      const auto w = ctx.space(space_name);
      DotOptions opt;
      if (!real_name.empty()) {
        const auto r = ctx.space(real_name);
        opt.real = std::vector<TypeSet>();
        for (std::size_t a = 0; a < ctx.ambient().agent_count(); ++a) opt.real->push_back(r.types(a));
      }
      if (!nodes_path.empty()) opt.nodes = ctx.event(nodes_path);
      const auto text = export_dot(w, opt);
      if (ctx.out_format == "dot") {
        out << text;
        return kOk;
      }
      return emit(ctx.report("dot", "ok", {{"space", space_name}, {"dot", text}}), kOk);
    };
  });

  auto* repro = app.add_subcommand("reproduce", "run the worked examples against golden outputs");
  repro->add_option("--fixtures", fixture_dir, "fixture directory (default: the bundled one)");
  repro->add_flag("--update", update, "rewrite the golden files instead of comparing");
  repro->add_flag("--timings", timings, "add wall-clock timings to the report");
  repro->callback([&] {
    action = [&] {
      ReproduceOptions opt{fixture_dir.empty() ? std::string(EPISTEME_FIXTURE_DIR) : fixture_dir, update, timings};
      auto r = reproduce(opt);
      out << r.report.dump();
      return r.ok ? kOk : kModelError;
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    out << error_json("usage", e.what());
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }
  if (ctx.out_format == "dot" && !dot->parsed()) {
    out << error_json("usage", "--out dot is only available for the dot command");
    return kUsage;
  }
  if (dot->parsed() && !app.count("--out")) ctx.out_format = "dot";
  try {
    return action();
  } catch (const UsageError& e) {
    out << error_json("usage", e.what());
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ModelError& e) {
    out << error_json(to_string(e.kind()), e.what());
    err << "model error: " << e.what() << "\n";
    return kModelError;
  } catch (const InputError& e) {
    out << error_json("io", e.what());
    err << "input error: " << e.what() << "\n";
    return kModelError;
  } catch (const SearchTooLarge& e) {
    out << error_json("search-too-large", e.what());
    err << "search too large: " << e.what() << "\n";
    return kModelError;
  } catch (const std::invalid_argument& e) {
    out << error_json("invalid-input", e.what());
    err << "invalid input: " << e.what() << "\n";
    return kModelError;
  }
}

}  // namespace episteme::cli
