// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "tck/document.hpp"

using namespace tck;

namespace {

struct Result {
  bool ok = true;
  std::string detail;
  std::vector<std::string> failures;

  void check(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (failures.size() < 5) failures.push_back(what);
  }
};

using MapRef = std::shared_ptr<const MapToOmega>;

const std::string corpus_dir = TCK_CORPUS_DIR;

// A functor between finite categories that is a bijection on objects and on
// arrows.
bool bijective(const FinFunctor& F) {
  return std::set<Obj>(F.on_objects.begin(), F.on_objects.end()).size() == F.target->object_count() && F.on_objects.size() == F.target->object_count() &&
         std::set<Arr>(F.on_arrows.begin(), F.on_arrows.end()).size() == F.target->arrow_count() && F.on_arrows.size() == F.target->arrow_count();
}

// An iso of opfibrations over the same base: every component is bijective
// and commutes with the projections.
bool iso_over_base(const TwoNat& k, const DiscOpfibPre& from, const DiscOpfibPre& to) {
  check_two_nat(k);
  for (std::size_t c = 0; c < k.components.size(); ++c) {
    const Obj co = static_cast<Obj>(c);
    if (!bijective(k[co])) return false;
    for (std::size_t e = 0; e < k[co].source->object_count(); ++e)
      if (to.s[co](k[co](static_cast<Obj>(e))) != from.s[co](static_cast<Obj>(e))) return false;
  }
  return true;
}

// Assignments of elements to the arrows of S, kept when compatible.
std::vector<std::map<Arr, int>> brute_families(const SetPresheaf& Z, const Sieve& S) {
  const FinCat& C = *Z.base;
  std::size_t total = 1;
  for (Arr f : S.arrows) total *= Z.size(C.dom(f));
  std::vector<std::map<Arr, int>> out;
  for (std::size_t code = 0; code < total; ++code) {
    std::map<Arr, int> x;
    std::size_t rest = code;
    for (Arr f : S.arrows) {
      x[f] = static_cast<int>(rest % Z.size(C.dom(f)));
      rest /= Z.size(C.dom(f));
    }
    bool ok = true;
    for (Arr f : S.arrows)
      for (std::size_t g = 0; g < C.arrow_count(); ++g)
        if (C.cod(static_cast<Arr>(g)) == C.dom(f) && x.at(C.compose(f, static_cast<Arr>(g))) != Z.apply(static_cast<Arr>(g), x.at(f))) ok = false;
    if (ok) out.push_back(std::move(x));
  }
  return out;
}

// Z is a sheaf when restriction to every covering sieve is a bijection onto
// the brute-force matching families.
bool brute_sheaf(const SetPresheaf& Z, const GrothTopology& J) {
  for (std::size_t c = 0; c < J.covers.size(); ++c)
    for (const Sieve& S : J.covers[c]) {
      const auto fams = brute_families(Z, S);
      std::set<std::map<Arr, int>> hit;
      for (std::size_t x = 0; x < Z.size(static_cast<Obj>(c)); ++x) {
        std::map<Arr, int> r;
        for (Arr f : S.arrows) r[f] = Z.apply(f, static_cast<int>(x));
        hit.insert(r);
      }
      if (hit.size() != Z.size(static_cast<Obj>(c)) || hit.size() != fams.size()) return false;
    }
  return true;
}

// On the discrete space {1,2} a sheaf has one section over the empty open
// and pairs of point sections over {1,2}.
bool discrete_sheaf_oracle(const SetPresheaf& Z) {
  const FinCat& C = *Z.base;
  if (Z.size(C.object("0")) != 1) return false;
  std::set<std::pair<int, int>> seen;
  for (std::size_t x = 0; x < Z.size(C.object("12")); ++x)
    seen.insert({Z.apply(C.arrow("1<12"), static_cast<int>(x)), Z.apply(C.arrow("2<12"), static_cast<int>(x))});
  return seen.size() == Z.size(C.object("12")) && seen.size() == Z.size(C.object("1")) * Z.size(C.object("2"));
}

// At least twenty presheaves on the slice over c. A one-object slice only
// has sets, so take sizes 0 to 23; otherwise the size cap grows until the
// enumeration is big enough.
std::vector<SetPresheaf> twenty_on_slice(const SlicesRef& S, Obj c) {
  const CatRef& Sc = S->at(c).category;
  if (Sc->object_count() == 1) {
    std::vector<SetPresheaf> out;
    for (int n = 0; n < 24; ++n) {
      std::vector<std::string> el;
      std::vector<int> id;
      for (int i = 0; i < n; ++i) {
        el.push_back(cat(i < 10 ? "0" : "", i));
        id.push_back(i);
      }
      out.push_back(make_set_functor<Variance::contravariant>(Sc, {el}, std::vector<std::vector<int>>(Sc->arrow_count(), id)));
    }
    return out;
  }
  for (std::size_t n = 2;; ++n) {
    Budget budget;
    auto all = enumerate_set_functors<Variance::contravariant>(Sc, n, budget);
    if (all.size() >= 20) return corpus::thin(all, 24);
  }
}

std::vector<MapRef> maps_over_representable(const SlicesRef& S, Obj c) {
  std::vector<MapToOmega> zs;
  // the smallest fixtures, since hom-sets grow like n^n
  auto Zs = twenty_on_slice(S, c);
  Zs.resize(S->at(c).category->object_count() == 1 ? 5 : Zs.size());
  for (const auto& Z : corpus::thin(Zs, 5)) zs.push_back(map_from_slice_presheaf(S, c, Z));
  zs.push_back(omega_point(S, representable(S->site, c)));
  return corpus::shared_maps(zs);
}

bool all_ff(const std::vector<MapRef>& maps, Result& r, const std::string& where) {
  bool ok = true;
  for (std::size_t i = 0; i < maps.size(); ++i)
    for (std::size_t j = 0; j < maps.size(); ++j) {
      const FFReport f = ff_check(maps[i], maps[j]);
      if (f.bijective() && f.modifications == f.morphisms) continue;
      ok = false;
      r.check(false, cat(where, " pair ", i, ",", j, ": ", f.detail));
    }
  return ok;
}

struct Item4 {
  PresheafRef F;
  SlicesRef S;
  std::vector<DiscOpfibPre> phis;
};

std::vector<Item4> item4_corpus() {
  std::vector<Item4> out;
  for (const auto& F : corpus::nonrepresentable()) {
    Item4 it{F, slice_system(F->site), {}};
    it.phis = corpus::opfibrations_over(it.S, F, 8);
    it.phis.push_back(identity_dopf_pre(F));
    out.push_back(std::move(it));
  }
  return out;
}

// Every sheaf on the opens with at most two sections per open.
std::vector<SetPresheaf> open_sheaves(const GrothTopology& J) {
  std::vector<SetPresheaf> out;
  for (const auto& Z : corpus::open_presheaves(1000))
    if (is_sheaf(Z, J).holds) out.push_back(Z);
  return out;
}

std::vector<DiscOpfibPre> stack_corpus(const GrothTopology& J) {
  std::vector<DiscOpfibPre> out;
  const auto sheaves = open_sheaves(J);
  for (const auto& A : sheaves)
    for (const auto& B : sheaves)
      for (const auto& t : corpus::thin(enumerate_set_nats(A, B), 1)) out.push_back(certify_dopf_pre(discrete_two_nat(t)));
  return out;
}

Result cat_case() {
  Result r;
  const auto ps = corpus::cat_opfibrations();
  std::size_t bases = 0, maxfibre = 0;
  std::vector<CatRef> seen;
  for (const auto& p : ps) {
    if (std::none_of(seen.begin(), seen.end(), [&](const CatRef& B) { return shared_equal(B, p.base()); })) {
      seen.push_back(p.base());
      ++bases;
    }
    const FinSetFunctor z = fiber_functor(p);
    for (std::size_t b = 0; b < z.elements.size(); ++b) maxfibre = std::max(maxfibre, z.elements[b].size());
    r.check(opfib_iso(elements_of(z), p).has_value(), "elements_of(fiber_functor(p)) not iso to p");
    r.check(set_natural_iso(fiber_functor(elements_of(z)), z).has_value(), "fiber_functor(elements_of(z)) not iso to z");
  }
  r.check(ps.size() >= 50, cat("only ", ps.size(), " opfibrations"));
  r.check(maxfibre <= 3, cat("fibre of size ", maxfibre));
  r.check(bases == corpus::shipped_bases().size(), cat(bases, " bases"));
  r.detail = cat(ps.size(), " opfibrations over ", bases, " bases, fibres <= ", maxfibre);
  return r;
}

Result fibre_formula() {
  Result r;
  std::size_t maps = 0, cells = 0;
  for (const auto& C : {sites::point(), sites::walking_arrow(), sites::open_site()}) {
    auto S = slice_system(C);
    for (const auto& z : corpus::maps_over(S, 4)) {
      const DiscOpfibPre p = classify(z);
      ++maps;
      for (std::size_t c = 0; c < C->object_count(); ++c) {
        const Obj co = static_cast<Obj>(c);
        const Obj id = S->at(co).terminal();
        const FinCat& Gc = p.total()->at(co);
        for (std::size_t X = 0; X < z.source->at(co).object_count(); ++X) {
          std::size_t scan = 0;
          for (std::size_t e = 0; e < Gc.object_count(); ++e) scan += p.s[co](static_cast<Obj>(e)) == static_cast<Obj>(X);
          r.check(scan == z.at(co, static_cast<Obj>(X)).size(id), cat("fibre at (", C->object_name(co), ", ", X, ")"));
          ++cells;
        }
      }
    }
  }
  r.detail = cat(maps, " maps, ", cells, " (c, X) cells");
  return r;
}

Result representables() {
  Result r;
  std::size_t slices = 0, fixtures = 0, pairs = 0;
  for (const auto& [name, C] : corpus::shipped_bases()) {
    auto S = slice_system(C);
    for (std::size_t c = 0; c < C->object_count(); ++c) {
      const Obj co = static_cast<Obj>(c);
      const auto Zs = twenty_on_slice(S, co);
      r.check(Zs.size() >= 20, cat(name, "/", C->object_name(co), ": ", Zs.size(), " fixtures"));
      for (const auto& Z : Zs) {
        const DiscOpfibPre psi = j_forward(S, co, Z);
        r.check(set_natural_iso(j_inverse(S, co, psi), Z).has_value(), cat(name, ": j_inverse(j_forward(Z)) not iso to Z"));
        const DiscOpfibPre phi = classify(map_from_slice_presheaf(S, co, Z));
        r.check(fib_iso(j_forward(S, co, j_inverse(S, co, phi)), phi).has_value(), cat(name, ": j_forward(j_inverse(phi)) not iso to phi"));
      }
      fixtures += Zs.size();
      const auto maps = maps_over_representable(S, co);
      r.check(maps.size() >= 5, "fewer than 5 maps");
      all_ff(maps, r, cat(name, "/", C->object_name(co)));
      pairs += maps.size() * maps.size();
      ++slices;
    }
  }
  r.detail = cat(slices, " slices, ", fixtures, " presheaves, ", pairs, " ff pairs");
  return r;
}

Result prestacks(const std::vector<Item4>& items) {
  Result r;
  std::size_t n = 0, pairs = 0;
  for (const auto& it : items) {
    std::vector<MapToOmega> chars;
    for (const auto& phi : it.phis) {
      Budget budget;
      try {
        const TwoNat k = roundtrip_opfib(it.S, phi, budget);
        r.check(iso_over_base(k, classify(characteristic(it.S, phi)), phi), "roundtrip_opfib witness is not an iso over the base");
        const MapToOmega z = characteristic(it.S, phi);
        const OmegaModification m = roundtrip_map(std::make_shared<const MapToOmega>(z), budget);
        r.check(!omega_modification_defect(m).has_value(), "roundtrip_map witness is not a modification");
        chars.push_back(z);
      } catch (const Error& e) {
        r.check(false, e.what());
      }
      ++n;
    }
    const auto maps = corpus::shared_maps(chars);
    all_ff(maps, r, "char outputs");
    pairs += maps.size() * maps.size();
  }
  r.check(n >= 30, cat("only ", n, " opfibrations"));
  r.detail = cat(n, " opfibrations over ", items.size(), " non-representable presheaves, ", pairs, " ff pairs");
  return r;
}

Result sheafification() {
  Result r;
  auto C = sites::open_site();
  const GrothTopology J = open_cover_topology(C);
  auto zs = corpus::open_presheaves();
  for (const auto& Z : open_sheaves(J))
    if (std::none_of(zs.begin(), zs.end(), [&](const SetPresheaf& W) { return W.elements == Z.elements && W.action == Z.action; })) zs.push_back(Z);
  std::size_t sheaves = 0;
  for (const auto& Z : zs) {
    const PlusResult s = sheafify(Z, J);
    const bool sheaf = discrete_sheaf_oracle(Z);
    sheaves += sheaf;
    r.check(is_sheaf(s.presheaf, J).holds && brute_sheaf(s.presheaf, J), "sheafify output is not a sheaf");
    r.check(is_set_iso(s.unit) == sheaf, "unit iso does not match the sheaf oracle");
    const std::size_t n1 = Z.size(C->object("1")), n2 = Z.size(C->object("2"));
    r.check(s.presheaf.size(C->object("12")) == n1 * n2, "sections over {1,2} are not pairs of point sections");
  }
  r.check(zs.size() >= 30, cat("only ", zs.size(), " presheaves"));
  // the non-separated fixture
  const Document d = parse_file(corpus_dir + "/OpenSite.site");
  const SetPresheaf& Z = d.set_presheaves.at("Z").value;
  const FinCat& D = *Z.base;
  const Sieve joint = sieve_generate(D, D.object("12"), {D.arrow("1<12"), D.arrow("2<12")});
  const std::size_t oracle = brute_families(Z, joint).size();
  const std::size_t got = sheafify(Z, d.topologies.at("Opens").value).presheaf.size(D.object("12"));
  r.check(Z.size(D.object("12")) == 2 && got == 1 && oracle == 1, cat("non-separated fixture: ", got, " sections, oracle ", oracle));
  r.detail = cat(zs.size(), " presheaves (", sheaves, " sheaves); non-separated Z: 2 -> ", got, " section(s) over {1,2}, oracle ", oracle);
  return r;
}

Result site_axioms() {
  Result r;
  auto check_valid = [&](const GrothTopology& J, const std::string& what) {
    const auto v = validate_topology(J);
    r.check(!v, cat(what, ": ", v ? v->witness : ""));
    r.check(subcanonical_check(J).holds, what + ": not subcanonical");
  };
  check_valid(open_cover_topology(sites::open_site()), "OpenSite");
  const Document site = parse_file(corpus_dir + "/OpenSite.site");
  check_valid(site.topologies.at("Opens").value, "OpenSite.site");
  for (const auto& [name, C] : corpus::shipped_bases()) check_valid(trivial_topology(C), name + " trivial");
  const Document broken = parse_file(corpus_dir + "/BrokenTopologies.site");
  const std::map<std::string, std::string> expect{{"no_maximal", "maximality"}, {"unstable", "stability"}, {"not_transitive", "transitivity"}};
  std::string named;
  for (const auto& [name, axiom] : expect) {
    const auto v = validate_topology(broken.topologies.at(name).value);
    r.check(v && v->axiom == axiom, cat(name, " should fail ", axiom));
    named += cat(named.empty() ? "" : ", ", name, ": ", v ? v->axiom : "none");
  }
  r.detail = cat("OpenSite and ", corpus::shipped_bases().size(), " trivial topologies valid and subcanonical; ", named);
  return r;
}

Result factorization(const std::vector<DiscOpfibPre>& stacks, const GrothTopology& J) {
  Result r;
  auto C = J.cat;
  auto S = slice_system(C);
  std::set<const CatPresheaf*> ends;
  for (const auto& phi : stacks) {
    r.check(ell_factors(characteristic(S, phi), J).factor.has_value(), "ell_factors failed on a stack opfibration");
    ends.insert(phi.s.source.get());
    ends.insert(phi.s.target.get());
  }
  for (const auto& phi : stacks)
    for (const PresheafRef& F : {phi.s.source, phi.s.target})
      if (ends.erase(F.get())) r.check(check_stack(F, J).holds(), "an endpoint is not a stack");
  r.check(stacks.size() >= 20, cat("only ", stacks.size(), " stack opfibrations"));
  // the shipped counterexample
  const Document d = parse_file(corpus_dir + "/NonStack.site");
  const MapToOmega z = characteristic(S, certify_dopf_pre(d.two_nats.at("bad").value));
  const auto tops = slice_topologies(J, *S);
  std::string first;
  for (std::size_t c = 0; c < C->object_count() && first.empty(); ++c)
    for (std::size_t X = 0; X < z.source->at(static_cast<Obj>(c)).object_count() && first.empty(); ++X)
      if (!brute_sheaf(z.at(static_cast<Obj>(c), static_cast<Obj>(X)), tops[c]))
        first = cat("('", C->object_name(static_cast<Obj>(c)), "', '", z.source->at(static_cast<Obj>(c)).object_name(static_cast<Obj>(X)), "')");
  const EllReport e = ell_factors(z, J);
  r.check(!e.factor && !first.empty() && e.witness.find(first) != std::string::npos, cat("counterexample reported as '", e.witness, "', oracle ", first));
  r.detail = cat(stacks.size(), " stack opfibrations factor; NonStack fails at ", first);
  return r;
}

Result stack_roundtrip(const std::vector<DiscOpfibPre>& stacks, const GrothTopology& J) {
  Result r;
  auto S = slice_system(J.cat);
  for (const auto& phi : stacks) {
    const MapToOmegaJ z = char_stacks(S, phi, J);
    const auto k = fib_iso(classify(z.map), phi);
    r.check(k && iso_over_base(*k, classify(z.map), phi), "classify(char_stacks(phi)) not iso to phi");
    r.check(!z.attested, "char_stacks took an attested path");
  }
  r.detail = cat(stacks.size(), " stack opfibrations recovered");
  return r;
}

Result omega_probe() {
  Result r;
  auto C = sites::open_site();
  auto S = slice_system(C);
  const GrothTopology J = open_cover_topology(C);
  const auto data = corpus::omega_descent_data(S, J);
  const auto tops = slice_topologies(J, *S);
  std::size_t squares = 0;
  for (const auto& d : data) {
    r.check(!omega_descent_defect(d, J), "datum fails the cocycle condition");
    const OmegaProbeResult p = omega_J_probe(d, J);
    r.check(p.ok, p.failure);
    if (!p.ok) continue;
    r.check(brute_sheaf(*p.M, tops[static_cast<std::size_t>(d.sieve.at)]), "glued object is not a sheaf");
    for (const auto& [f, t] : p.psi) r.check(is_set_iso(t), "psi is not an iso");
    for (auto [f, g] : descent_pairs(*C, d.sieve)) {
      r.check(vertical(d.iso(f, g), S->reindex(p.psi.at(f), g)).components == p.psi.at(C->compose(f, g)).components, "compatibility square fails");
      ++squares;
    }
  }
  r.check(data.size() >= 10, cat("only ", data.size(), " descent data"));
  r.detail = cat(data.size(), " descent data effective, ", squares, " compatibility squares");
  return r;
}

Result reduction(const std::vector<Item4>& items) {
  Result r;
  std::vector<std::pair<CatRef, bool>> on_reps;
  for (const auto& it : items) {
    auto known = std::find_if(on_reps.begin(), on_reps.end(), [&](const auto& e) { return shared_equal(e.first, it.F->site); });
    if (known == on_reps.end()) {
      Result scratch;
      bool ok = true;
      for (std::size_t c = 0; c < it.F->site->object_count(); ++c) ok = all_ff(maps_over_representable(it.S, static_cast<Obj>(c)), scratch, "") && ok;
      on_reps.push_back({it.F->site, ok});
      known = on_reps.end() - 1;
    }
    std::vector<MapToOmega> chars;
    for (const auto& phi : it.phis) chars.push_back(characteristic(it.S, phi));
    Result scratch;
    const bool on_F = all_ff(corpus::shared_maps(chars), scratch, "");
    r.check(!(known->second && !on_F), "ff over representables but not over F");
    r.check(known->second == on_F, "ff over representables and over F disagree");
  }
  std::size_t rep_ok = 0;
  for (const auto& e : on_reps) rep_ok += e.second;
  r.detail = cat(items.size(), " presheaves F on ", on_reps.size(), " sites; ff over representables at ", rep_ok, "/", on_reps.size(),
                 " sites and over every F");
  return r;
}

}  // namespace

int main() {
  const GrothTopology J = open_cover_topology(sites::open_site());
  std::optional<std::vector<Item4>> items;
  std::optional<std::vector<DiscOpfibPre>> stacks;
  auto item4 = [&]() -> const std::vector<Item4>& {
    if (!items) items = item4_corpus();
    return *items;
  };
  auto stack = [&]() -> const std::vector<DiscOpfibPre>& {
    if (!stacks) stacks = stack_corpus(J);
    return *stacks;
  };
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Result()> run;
  };
  const std::vector<Criterion> criteria{
      {"cat-case equivalence", 10, cat_case},
      {"fibre formula", 10, fibre_formula},
      {"classifier over representables", 10, representables},
      {"prestack classification", 10, [&] { return prestacks(item4()); }},
      {"sheafification", 10, sheafification},
      {"site axioms and subcanonicity", 10, site_axioms},
      {"factorization through ell", 10, [&] { return factorization(stack(), J); }},
      {"stack classifier round-trip", 10, [&] { return stack_roundtrip(stack(), J); }},
      {"omega_J stack probe", 60, omega_probe},
      {"reduction to representables", 10, [&] { return reduction(item4()); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Result r;
    try {
      r = criteria[i].run();
    } catch (const std::exception& e) {
      r.check(false, cat("threw: ", e.what()));
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.check(s <= criteria[i].limit_s, cat("took ", s, " s, limit ", criteria[i].limit_s, " s"));
    failed += !r.ok;
    std::printf("%s %2zu. %s: %s (%.2f s)\n", r.ok ? "PASS" : "FAIL", i + 1, criteria[i].name, r.detail.c_str(), s);
    for (const auto& f : r.failures) std::printf("       %s\n", f.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed ? 1 : 0;
}
