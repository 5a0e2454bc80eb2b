#pragma once

// Command dispatch over parsed documents and the reports it produces.
// Each command walks every section of the kinds it needs, in name order,
// with a fresh budget per section; a blown budget marks that section as
// bounded and never as passed.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tck/classifier.hpp"
#include "tck/document.hpp"
#include "tck/site.hpp"
#include "tck/stacks.hpp"

namespace tck::cli {

enum class Outcome { pass, fail, bounded };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::fail: return "fail";
    case Outcome::bounded: return "bounded-pass";
  }
  return "unknown";
}

inline constexpr int exit_pass = 0;
inline constexpr int exit_fail = 1;
inline constexpr int exit_bounded = 2;
inline constexpr int exit_usage = 3;

struct Finding {
  std::string subject;
  std::string detail;
  bool operator<(const Finding& o) const { return std::tie(subject, detail) < std::tie(o.subject, o.detail); }
};

struct Report {
  std::string command;
  std::string file;
  std::vector<Finding> witnesses;
  std::vector<Finding> counterexamples;
  std::vector<Finding> bounded;
  std::vector<std::string> table;
  std::uint64_t bound = default_bound;
  double elapsed_ms = 0;
  std::string output;  // sections produced by the command

  Outcome verdict() const {
    if (!counterexamples.empty()) return Outcome::fail;
    if (!bounded.empty()) return Outcome::bounded;
    return Outcome::pass;
  }
  int exit_code() const {
    switch (verdict()) {
      case Outcome::pass: return exit_pass;
      case Outcome::fail: return exit_fail;
      case Outcome::bounded: return exit_bounded;
    }
    return exit_fail;
  }

  void sort() {
    std::sort(witnesses.begin(), witnesses.end());
    std::sort(counterexamples.begin(), counterexamples.end());
    std::sort(bounded.begin(), bounded.end());
    std::sort(table.begin(), table.end());
  }

  nlohmann::json to_json() const {
    auto rows = [](const std::vector<Finding>& v) {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& f : v) a.push_back({{"subject", f.subject}, {"detail", f.detail}});
      return a;
    };
    return {{"command", command},
            {"file", file},
            {"verdict", std::string(to_string(verdict()))},
            {"exit_code", exit_code()},
            {"bound", bound},
            {"elapsed_ms", elapsed_ms},
            {"witnesses", rows(witnesses)},
            {"counterexamples", rows(counterexamples)},
            {"bounded", rows(bounded)},
            {"table", table},
            {"output", output}};
  }

  // `with_output` appends the produced sections after the findings.
  std::string to_text(bool with_output = true) const {
    std::ostringstream out;
    out << "command: " << command << "\n";
    out << "file: " << file << "\n";
    out << "verdict: " << to_string(verdict()) << "\n";
    out << "bound: " << bound << "\n";
    for (const auto& f : counterexamples) out << "counterexample " << f.subject << ": " << f.detail << "\n";
    for (const auto& f : bounded) out << "bounded " << f.subject << ": " << f.detail << "\n";
    for (const auto& f : witnesses) out << "witness " << f.subject << ": " << f.detail << "\n";
    for (const auto& row : table) out << "table " << row << "\n";
    out << "time: " << static_cast<long long>(elapsed_ms) << " ms\n";
    if (with_output && !output.empty()) out << "\n" << output;
    return out.str();
  }
};

struct Options {
  std::uint64_t bound = default_bound;
  bool attest = false;  // char-stacks: take endpoints as stacks without certification
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"validate", "classify", "char", "char-stacks", "sheafify", "check-sheaf",
                                              "check-stack", "check-site", "roundtrip", "ff-check", "probe-omega-j"};
  return names;
}

inline bool is_command(const std::string& c) { return std::find(commands().begin(), commands().end(), c) != commands().end(); }

namespace detail {

class Run {
 public:
  Run(const Document& doc, const Options& opt, Report& r) : doc_(doc), opt_(opt), r_(r) {}

  // Runs `body` for one subject, turning errors into findings.
  template <typename Body>
  void subject(const std::string& name, Body&& body) {
    try {
      body();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SizeBound) r_.bounded.push_back({name, cat("bound of ", opt_.bound, " reached: ", e.detail())});
      else r_.counterexamples.push_back({name, cat(tck::to_string(e.kind()), ": ", e.detail())});
    }
  }

  void pass(const std::string& name, const std::string& detail) { r_.witnesses.push_back({name, detail}); }
  void fail(const std::string& name, const std::string& detail) { r_.counterexamples.push_back({name, detail}); }
  void row(const std::string& text) { r_.table.push_back(text); }

  template <typename Map>
  void need(const Map& m, const char* kind) const {
    if (m.empty()) tck::fail(ErrorKind::MissingSection, "command '", r_.command, "' needs at least one ", kind, " section");
  }

  // The first topology, by name, on a site.
  const TopologyEntry* topology_on(const std::string& site) const {
    for (const auto& [n, t] : doc_.topologies)
      if (t.site == site) return &t;
    return nullptr;
  }
  std::string topology_name(const std::string& site) const {
    for (const auto& [n, t] : doc_.topologies)
      if (t.site == site) return n;
    return {};
  }

  Document& out() { return out_; }

  // Seeds the output with a site under its input name.
  void site(const std::string& name) {
    if (!out_.categories.count(name) && !out_.kind_of(name)) {
      out_.categories.emplace(name, doc_.categories.at(name));
      out_.claim(name, "category");
    }
  }

  void finish() {
    if (!out_.categories.empty()) r_.output = serialize(out_);
  }

  void validate();
  void classify();
  void characteristic();
  void char_stacks();
  void sheafify();
  void check_sheaf();
  void check_stack();
  void check_site();
  void roundtrip();
  void ff_check();
  void probe();

 private:
  const Document& doc_;
  const Options& opt_;
  Report& r_;
  Document out_;
};

inline std::string sizes(const FinCat& C, const SetPresheaf& Z) {
  std::vector<std::string> parts;
  for (std::size_t c = 0; c < C.object_count(); ++c) parts.push_back(cat(C.object_name(static_cast<Obj>(c)), "=", Z.elements[c].size()));
  std::sort(parts.begin(), parts.end());
  std::string s;
  for (const auto& p : parts) s += (s.empty() ? "" : " ") + p;
  return s;
}

inline std::string join(const std::vector<std::string>& v, const std::string& sep = " ") {
  std::string s;
  for (const auto& p : v) s += (s.empty() ? "" : sep) + p;
  return s;
}

inline void Run::validate() {
  for (const auto& [n, C] : doc_.categories) pass(n, cat("category with ", C->object_count(), " objects and ", C->arrow_count(), " arrows"));
  for (const auto& [n, e] : doc_.functors) pass(n, cat("functor ", e.source, " -> ", e.target));
  for (const auto& [n, e] : doc_.presheaves) pass(n, cat("presheaf of categories on ", e.site));
  for (const auto& [n, e] : doc_.set_presheaves)
    pass(n, e.over ? cat("presheaf of sets on ", e.site, "/", doc_.categories.at(e.site)->object_name(*e.over)) : cat("presheaf of sets on ", e.site));
  for (const auto& [n, e] : doc_.nats) pass(n, cat("natural transformation ", e.source, " -> ", e.target));
  for (const auto& [n, e] : doc_.two_nats) pass(n, cat("2-natural transformation ", e.source, " -> ", e.target));
  for (const auto& [n, e] : doc_.maps) pass(n, cat("map from ", e.source, " into the prestack classifier"));
  for (const auto& [n, e] : doc_.topologies) {
    std::size_t total = 0;
    for (const auto& v : e.value.covers) total += v.size();
    pass(n, e.exact ? cat(total, " covering sieves, taken as given") : cat(total, " covering sieves, ", e.added, " added by saturation"));
  }
  for (const auto& [n, e] : doc_.sieves) pass(n, cat("sieve with ", e.value.arrows.size(), " arrows"));
  for (const auto& [n, e] : doc_.descents) pass(n, "descent datum satisfying the cocycle condition");
  for (const auto& [n, e] : doc_.omega_descents) pass(n, "descent datum of sheaves satisfying the cocycle condition");
}

inline void Run::classify() {
  need(doc_.maps, "map");
  for (const auto& [n, e] : doc_.maps)
    subject(n, [&] {
      const DiscOpfibPre phi = tck::classify(e.value);
      const FinCat& C = *e.value.site();
      site(doc_.presheaves.at(e.source).site);
      out_.put(phi.s, n + ".classified");
      std::size_t total = 0;
      for (std::size_t c = 0; c < C.object_count(); ++c) {
        const FinCat& Fc = e.value.source->at(static_cast<Obj>(c));
        for (std::size_t X = 0; X < Fc.object_count(); ++X) {
          const std::size_t k = phi.fibre(static_cast<Obj>(c), static_cast<Obj>(X)).size();
          total += k;
          row(cat(n, " fibre at (", C.object_name(static_cast<Obj>(c)), ", ", Fc.object_name(static_cast<Obj>(X)), "): ", k));
        }
      }
      pass(n, cat("discrete opfibration with ", total, " objects over ", e.source));
    });
}

inline void Run::characteristic() {
  need(doc_.two_nats, "two-nat");
  for (const auto& [n, e] : doc_.two_nats)
    subject(n, [&] {
      const DiscOpfibPre phi = certify_dopf_pre(e.value);
      const std::string s = doc_.presheaves.at(e.target).site;
      const MapToOmega z = tck::characteristic(doc_.slices(s), phi);
      site(s);
      out_.put(z, n + ".char");
      const FinCat& C = *z.site();
      if (C.object_count() == 1 && C.arrow_count() == 1) {
        // over the point the map is a functor into finite sets
        const FinSetFunctor w = set_functor_over_point(z);
        const FinCat& B = *w.base;
        for (std::size_t x = 0; x < B.object_count(); ++x) row(cat(n, " fibre ", B.object_name(static_cast<Obj>(x)), ": {", join(w.elements[x], ", "), "}"));
        for (std::size_t f = 0; f < B.arrow_count(); ++f) {
          const Arr fa = static_cast<Arr>(f);
          if (B.is_identity(fa)) continue;
          std::vector<std::string> maps;
          for (std::size_t i = 0; i < w.action[f].size(); ++i)
            maps.push_back(cat(w.label(B.dom(fa), static_cast<int>(i)), "->", w.label(B.cod(fa), w.action[f][i])));
          row(cat(n, " arrow ", B.arrow_name(fa), ": ", B.object_name(B.dom(fa)), " -> ", B.object_name(B.cod(fa)), ": {", join(maps, ", "), "}"));
        }
      }
      pass(n, cat("characteristic map ", e.target, " -> prestack classifier"));
    });
}

inline void Run::char_stacks() {
  need(doc_.two_nats, "two-nat");
  need(doc_.topologies, "topology");
  for (const auto& [n, e] : doc_.two_nats)
    subject(n, [&] {
      const std::string s = doc_.presheaves.at(e.target).site;
      const TopologyEntry* J = topology_on(s);
      if (!J) tck::fail(ErrorKind::MissingSection, "no topology on '", s, "'");
      const DiscOpfibPre phi = certify_dopf_pre(e.value);
      const MapToOmegaJ z = tck::char_stacks(doc_.slices(s), phi, J->value, opt_.attest, opt_.bound);
      site(s);
      out_.put(z.map, n + ".char");
      pass(n, cat("characteristic map factors through sheaves for '", topology_name(s), "'", z.attested ? " (endpoints attested)" : ""));
    });
}

inline void Run::sheafify() {
  bool any = false;
  for (const auto& [n, e] : doc_.set_presheaves) {
    if (e.over) continue;
    const TopologyEntry* J = topology_on(e.site);
    if (!J) continue;
    any = true;
    subject(n, [&] {
      Budget budget(opt_.bound);
      const PlusResult p = tck::sheafify(e.value, J->value, budget);
      site(e.site);
      out_.put(p.presheaf, n + ".sheaf");
      const FinCat& C = *e.value.base;
      for (std::size_t c = 0; c < C.object_count(); ++c)
        row(cat(n, ".sheaf at ", C.object_name(static_cast<Obj>(c)), ": {", join(p.presheaf.elements[c], ", "), "}"));
      pass(n, cat("sheafified for '", topology_name(e.site), "', sizes ", sizes(C, p.presheaf), is_set_iso(p.unit) ? "; already a sheaf" : ""));
    });
  }
  if (!any) tck::fail(ErrorKind::MissingSection, "command 'sheafify' needs a set-presheaf on a site with a topology");
}

inline void Run::check_sheaf() {
  bool any = false;
  for (const auto& [n, e] : doc_.set_presheaves) {
    const TopologyEntry* J = topology_on(e.site);
    if (!J) continue;
    any = true;
    subject(n, [&] {
      Budget budget(opt_.bound);
      const GrothTopology T = e.over ? slice_topology(J->value, doc_.slices(e.site)->at(*e.over)) : J->value;
      const SheafReport s = is_sheaf(e.value, T, budget);
      if (s.holds) pass(n, cat("sheaf for '", topology_name(e.site), "' (", s.families_checked, " matching families)"));
      else fail(n, s.witness);
    });
  }
  if (!any) tck::fail(ErrorKind::MissingSection, "command 'check-sheaf' needs a set-presheaf on a site with a topology");
}

inline void Run::check_stack() {
  bool any = false;
  for (const auto& [n, e] : doc_.presheaves) {
    const TopologyEntry* J = topology_on(e.site);
    if (!J) continue;
    any = true;
    subject(n, [&] {
      const StackReport s = tck::check_stack(e.value, J->value, opt_.bound);
      const std::pair<const char*, const ConditionReport*> parts[] = {{"objects glue", &s.objects}, {"morphisms glue", &s.morphisms}, {"gluings unique", &s.uniqueness}};
      for (const auto& [label, c] : parts) {
        if (c->verdict == Verdict::fails) fail(n, cat(label, ": ", c->witness));
        else if (c->verdict == Verdict::bounded) r_.bounded.push_back({n, cat(label, ": ", c->witness)});
      }
      if (s.holds())
        pass(n, cat("stack for '", topology_name(e.site), "' (", s.objects.checked, " descent data, ", s.morphisms.checked, " morphism families, ",
                    s.uniqueness.checked, " uniqueness checks)"));
    });
  }
  if (!any) tck::fail(ErrorKind::MissingSection, "command 'check-stack' needs a presheaf on a site with a topology");
}

inline void Run::check_site() {
  need(doc_.topologies, "topology");
  for (const auto& [n, e] : doc_.topologies)
    subject(n, [&] {
      Budget budget(opt_.bound);
      if (auto v = validate_topology(e.value, budget)) {
        fail(n, cat("AxiomViolation: ", v->axiom, ": ", v->witness));
        return;
      }
      const SubcanonicalReport s = subcanonical_check(e.value, budget);
      if (!s.holds) {
        fail(n, cat("NotSubcanonical: ", s.witness));
        return;
      }
      pass(n, "Grothendieck topology (maximality, stability, transitivity) and subcanonical");
    });
}

inline void Run::roundtrip() {
  subject("document", [&] {
    const std::string once = serialize(doc_);
    const Document again = parse_text(once, "<canonical>");
    const std::string twice = serialize(again);
    if (once != twice) fail("document", "canonical text changes on a second pass");
    else if (!(again == doc_)) fail("document", "parsing the canonical text gives a different document");
    else pass("document", cat("canonical text is stable (", once.size(), " bytes)"));
  });
  for (const auto& [n, e] : doc_.two_nats)
    subject(n, [&] {
      std::optional<DiscOpfibPre> phi;
      try {
        phi = certify_dopf_pre(e.value);
      } catch (const Error& x) {
        if (x.kind() != ErrorKind::NotOpfibration && x.kind() != ErrorKind::NotOpfibrationAt) throw;
        pass(n, "not a discrete opfibration; text round-trip only");
        return;
      }
      Budget budget(opt_.bound);
      roundtrip_opfib(doc_.slices(doc_.presheaves.at(e.target).site), *phi, budget);
      pass(n, "classify(char(phi)) is isomorphic to phi over its base");
    });
  for (const auto& [n, e] : doc_.maps)
    subject(n, [&] {
      Budget budget(opt_.bound);
      roundtrip_map(std::make_shared<const MapToOmega>(e.value), budget);
      pass(n, "char(classify(z)) is isomorphic to z");
    });
}

inline void Run::ff_check() {
  need(doc_.maps, "map");
  std::map<std::string, std::shared_ptr<const MapToOmega>> shared;
  for (const auto& [n, e] : doc_.maps) shared.emplace(n, std::make_shared<const MapToOmega>(e.value));
  for (const auto& [a, e] : doc_.maps)
    for (const auto& [b, f] : doc_.maps) {
      if (e.source != f.source) continue;
      const std::string name = a + "," + b;
      subject(name, [&] {
        Budget budget(opt_.bound);
        const FFReport r = tck::ff_check(shared.at(a), shared.at(b), budget);
        if (r.bijective()) pass(name, cat(r.modifications, " modifications match ", r.morphisms, " morphisms of opfibrations"));
        else fail(name, cat(tck::to_string(*r.failure), ": ", r.detail));
      });
    }
}

inline void Run::probe() {
  need(doc_.omega_descents, "omega-descent");
  for (const auto& [n, e] : doc_.omega_descents)
    subject(n, [&] {
      Budget budget(opt_.bound);
      const TopologyEntry& J = doc_.topologies.at(e.topology);
      const OmegaProbeResult p = omega_J_probe(e.value, J.value, budget);
      if (!p.ok) {
        fail(n, p.failure);
        return;
      }
      const FinCat& C = *e.value.slices->site;
      site(J.site);
      out_.put(*p.M, n + ".glued", std::pair{J.site, e.value.sieve.at});
      pass(n, cat("effective: glued sheaf on ", J.site, "/", C.object_name(e.value.sieve.at), " with ", p.psi.size(), " compatible isos"));
    });
}

}  // namespace detail

// Runs one command. Throws UnknownCommand or MissingSection for usage errors.
inline Report run(const std::string& command, const Document& doc, const Options& opt = {}, const std::string& file = "") {
  if (!is_command(command)) fail(ErrorKind::UnknownCommand, "unknown command '", command, "'");
  Report r;
  r.command = command;
  r.file = file;
  r.bound = opt.bound;
  const auto start = std::chrono::steady_clock::now();
  detail::Run x(doc, opt, r);
  if (command == "validate") x.validate();
  else if (command == "classify") x.classify();
  else if (command == "char") x.characteristic();
  else if (command == "char-stacks") x.char_stacks();
  else if (command == "sheafify") x.sheafify();
  else if (command == "check-sheaf") x.check_sheaf();
  else if (command == "check-stack") x.check_stack();
  else if (command == "check-site") x.check_site();
  else if (command == "roundtrip") x.roundtrip();
  else if (command == "ff-check") x.ff_check();
  else x.probe();
  x.finish();
  r.sort();
  r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

struct Invocation {
  std::string command;
  std::string file;
  Options options;
  bool json = false;
  std::optional<std::string> out;  // where the produced sections go
};

struct Execution {
  int code = exit_usage;
  std::string stdout_text;
  std::string stderr_text;
};

// Parse, run, render. The produced sections go to `out` when given and are
// otherwise part of the report.
inline Execution execute(const Invocation& inv) {
  Execution res;
  if (!is_command(inv.command)) {
    res.stderr_text = cat("UnknownCommand: unknown command '", inv.command, "'\n");
    return res;
  }
  if (!std::filesystem::is_regular_file(inv.file)) {
    res.stderr_text = cat("cannot read '", inv.file, "'\n");
    return res;
  }
  Report r;
  try {
    const Document doc = parse_file(inv.file);
    r = run(inv.command, doc, inv.options, inv.file);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::MissingSection || e.kind() == ErrorKind::UnknownCommand) {
      res.stderr_text = cat(e.what(), "\n");
      return res;
    }
    // the document itself is rejected
    r = Report{};
    r.command = inv.command;
    r.file = inv.file;
    r.bound = inv.options.bound;
    r.counterexamples.push_back({"document", e.what()});
  }
  if (inv.out && !r.output.empty()) {
    std::ofstream f(*inv.out, std::ios::binary);
    if (!f) {
      res.stderr_text = cat("cannot write '", *inv.out, "'\n");
      return res;
    }
    f << r.output;
  }
  if (inv.json) {
    nlohmann::json j = r.to_json();
    if (inv.out) j["output"] = *inv.out;
    res.stdout_text = j.dump(2) + "\n";
  } else {
    res.stdout_text = r.to_text(!inv.out);
  }
  res.code = r.exit_code();
  return res;
}

}  // namespace tck::cli
