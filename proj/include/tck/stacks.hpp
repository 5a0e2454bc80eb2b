#pragma once

// Descent data for strict presheaves of categories, effectiveness, the three
// stack conditions, the factorization of characteristic maps through sheaves
// on slices, and a probe of the gluing property of Ω_J that runs the Z / Z^{++}
// construction on explicit descent data of sheaves.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tck/classifier.hpp"
#include "tck/core.hpp"
#include "tck/prestack.hpp"
#include "tck/setfunctor.hpp"
#include "tck/site.hpp"
#include "tck/slice.hpp"

namespace tck {

// (f, g) with f ∈ S and g composable before f.
inline std::vector<std::pair<Arr, Arr>> descent_pairs(const FinCat& C, const Sieve& S) {
  std::vector<std::pair<Arr, Arr>> out;
  for (Arr f : S.arrows)
    for (Arr g : C.arrows_into(C.dom(f))) out.push_back({f, g});
  return out;
}

inline std::vector<Arr> isos_between(const FinCat& A, Obj x, Obj y) {
  std::vector<Arr> out;
  for (Arr a : A.hom(x, y))
    if (A.is_iso(a)) out.push_back(a);
  return out;
}

struct DescentDatum {
  PresheafRef presheaf;
  Sieve sieve;
  std::map<Arr, Obj> objects;                 // M_f ∈ F(dom f)
  std::map<std::pair<Arr, Arr>, Arr> isos;    // φ^{f,g}: F(g)(M_f) → M_{f∘g} in F(dom g)

  Obj object(Arr f) const { return objects.at(f); }
  Arr iso(Arr f, Arr g) const { return isos.at({f, g}); }
  bool operator==(const DescentDatum& o) const {
    return shared_equal(presheaf, o.presheaf) && sieve == o.sieve && objects == o.objects && isos == o.isos;
  }
};

struct DescentDefect {
  ErrorKind kind;
  std::string detail;
};

inline std::optional<DescentDefect> descent_defect(const DescentDatum& d) {
  const CatPresheaf& F = *d.presheaf;
  const FinCat& C = *F.site;
  if (auto e = sieve_defect(C, d.sieve)) return DescentDefect{ErrorKind::InvariantViolation, *e};
  for (Arr f : d.sieve.arrows) {
    auto it = d.objects.find(f);
    if (it == d.objects.end()) return DescentDefect{ErrorKind::MissingSection, cat("no object over '", C.arrow_name(f), "'")};
    if (it->second < 0 || static_cast<std::size_t>(it->second) >= F.at(C.dom(f)).object_count())
      return DescentDefect{ErrorKind::UnknownObject, cat("object over '", C.arrow_name(f), "' is out of range")};
  }
  if (d.objects.size() != d.sieve.arrows.size()) return DescentDefect{ErrorKind::InvariantViolation, "objects given over arrows outside the sieve"};
  const auto pairs = descent_pairs(C, d.sieve);
  if (d.isos.size() != pairs.size()) return DescentDefect{ErrorKind::InvariantViolation, "iso table does not match the sieve"};
  for (auto [f, g] : pairs) {
    auto it = d.isos.find({f, g});
    if (it == d.isos.end()) return DescentDefect{ErrorKind::MissingSection, cat("no iso for '", C.arrow_name(f), "', '", C.arrow_name(g), "'")};
    const FinCat& Fd = F.at(C.dom(g));
    const Arr phi = it->second;
    if (phi < 0 || static_cast<std::size_t>(phi) >= Fd.arrow_count())
      return DescentDefect{ErrorKind::UnknownArrow, cat("iso for '", C.arrow_name(f), "', '", C.arrow_name(g), "' is out of range")};
    if (Fd.dom(phi) != F.restrict(g)(d.object(f)) || Fd.cod(phi) != d.object(C.compose(f, g)) || !Fd.is_iso(phi))
      return DescentDefect{ErrorKind::InvariantViolation, cat("'", Fd.arrow_name(phi), "' is not an iso from the restriction of M_", C.arrow_name(f), " to M_", C.arrow_name(C.compose(f, g)))};
  }
  for (auto [f, g] : pairs)
    for (Arr h : C.arrows_into(C.dom(g))) {
      const Arr fg = C.compose(f, g), gh = C.compose(g, h);
      const FinCat& Fe = F.at(C.dom(h));
      const Arr lhs = Fe.compose(d.iso(fg, h), F.restrict(h).arrow(d.iso(f, g)));
      if (lhs != d.iso(f, gh))
        return DescentDefect{ErrorKind::CocycleViolation, cat("cocycle fails at f='", C.arrow_name(f), "', g='", C.arrow_name(g), "', h='", C.arrow_name(h), "'")};
    }
  return std::nullopt;
}

inline void validate_descent(const DescentDatum& d) {
  if (auto e = descent_defect(d)) fail(e->kind, e->detail);
}

// M_f = F(f)(M) with identity isos.
inline DescentDatum induced_datum(const PresheafRef& F, const Sieve& S, Obj M) {
  const FinCat& C = *F->site;
  DescentDatum d{F, S, {}, {}};
  for (Arr f : S.arrows) d.objects[f] = F->restrict(f)(M);
  for (auto [f, g] : descent_pairs(C, S)) d.isos[{f, g}] = F->at(C.dom(g)).identity(F->restrict(C.compose(f, g))(M));
  return d;
}

// Every descent datum on S, objects first, then isos under the cocycle.
inline std::vector<DescentDatum> enumerate_descent_data(const PresheafRef& F, const Sieve& S, Budget& budget) {
  const FinCat& C = *F->site;
  const auto pairs = descent_pairs(C, S);
  const std::size_t n = S.arrows.size();
  std::map<Arr, std::size_t> slot_of;
  for (std::size_t i = 0; i < n; ++i) slot_of[S.arrows[i]] = i;
  std::map<std::pair<Arr, Arr>, std::size_t> pair_slot;
  for (std::size_t k = 0; k < pairs.size(); ++k) pair_slot[pairs[k]] = n + k;
  // cocycle triples, checked once their three isos are placed
  std::vector<std::vector<std::array<std::size_t, 4>>> triples(n + pairs.size());
  for (auto [f, g] : pairs)
    for (Arr h : C.arrows_into(C.dom(g))) {
      const std::size_t a = pair_slot.at({f, g}), b = pair_slot.at({C.compose(f, g), h}), c = pair_slot.at({f, C.compose(g, h)});
      triples[std::max({a, b, c})].push_back({a, b, c, static_cast<std::size_t>(h)});
    }
  std::vector<DescentDatum> out;
  depth_first<int>(
      n + pairs.size(),
      [&](std::size_t i, const std::vector<int>& x) {
        std::vector<int> v;
        if (i < n) {
          for (std::size_t o = 0; o < F->at(C.dom(S.arrows[i])).object_count(); ++o) v.push_back(static_cast<int>(o));
          return v;
        }
        const auto [f, g] = pairs[i - n];
        const Obj src = F->restrict(g)(x[slot_of.at(f)]);
        const Obj dst = x[slot_of.at(C.compose(f, g))];
        for (Arr a : isos_between(F->at(C.dom(g)), src, dst)) v.push_back(a);
        return v;
      },
      [&](std::size_t i, const std::vector<int>& x) {
        for (const auto& t : triples[i]) {
          const Arr h = static_cast<Arr>(t[3]);
          const FinCat& Fe = F->at(C.dom(h));
          if (Fe.compose(x[t[1]], F->restrict(h).arrow(x[t[0]])) != x[t[2]]) return false;
        }
        return true;
      },
      [&](const std::vector<int>& x) {
        DescentDatum d{F, S, {}, {}};
        for (std::size_t i = 0; i < n; ++i) d.objects[S.arrows[i]] = x[i];
        for (std::size_t k = 0; k < pairs.size(); ++k) d.isos[pairs[k]] = x[n + k];
        out.push_back(std::move(d));
        return true;
      },
      budget);
  return out;
}

struct EffectivenessWitness {
  Obj object = none;       // M ∈ F(c)
  std::map<Arr, Arr> psi;  // ψ^f: F(f)(M) → M_f

  bool operator==(const EffectivenessWitness&) const = default;
};

inline std::optional<std::string> witness_defect(const DescentDatum& d, const EffectivenessWitness& w) {
  const CatPresheaf& F = *d.presheaf;
  const FinCat& C = *F.site;
  for (Arr f : d.sieve.arrows) {
    const FinCat& Fd = F.at(C.dom(f));
    auto it = w.psi.find(f);
    if (it == w.psi.end()) return cat("no iso over '", C.arrow_name(f), "'");
    if (Fd.dom(it->second) != F.restrict(f)(w.object) || Fd.cod(it->second) != d.object(f) || !Fd.is_iso(it->second))
      return cat("iso over '", C.arrow_name(f), "' has the wrong endpoints");
  }
  for (auto [f, g] : descent_pairs(C, d.sieve)) {
    const FinCat& Fe = F.at(C.dom(g));
    if (Fe.compose(d.iso(f, g), F.restrict(g).arrow(w.psi.at(f))) != w.psi.at(C.compose(f, g)))
      return cat("compatibility square fails at '", C.arrow_name(f), "', '", C.arrow_name(g), "'");
  }
  return std::nullopt;
}

namespace detail {

inline std::vector<EffectivenessWitness> search_witnesses(const DescentDatum& d, Budget& budget, bool first_only) {
  const CatPresheaf& F = *d.presheaf;
  const FinCat& C = *F.site;
  const Sieve& S = d.sieve;
  const std::size_t n = S.arrows.size();
  std::map<Arr, std::size_t> slot_of;
  for (std::size_t i = 0; i < n; ++i) slot_of[S.arrows[i]] = i;
  std::vector<std::vector<std::pair<Arr, Arr>>> checks(n);
  for (auto [f, g] : descent_pairs(C, S)) checks[std::max(slot_of.at(f), slot_of.at(C.compose(f, g)))].push_back({f, g});
  std::vector<EffectivenessWitness> out;
  for (std::size_t M = 0; M < F.at(S.at).object_count(); ++M) {
    bool stop = false;
    depth_first<int>(
        n,
        [&](std::size_t i, const std::vector<int>&) {
          const Arr f = S.arrows[i];
          std::vector<int> v;
          for (Arr a : isos_between(F.at(C.dom(f)), F.restrict(f)(static_cast<Obj>(M)), d.object(f))) v.push_back(a);
          return v;
        },
        [&](std::size_t i, const std::vector<int>& x) {
          for (auto [f, g] : checks[i]) {
            const FinCat& Fe = F.at(C.dom(g));
            if (Fe.compose(d.iso(f, g), F.restrict(g).arrow(x[slot_of.at(f)])) != x[slot_of.at(C.compose(f, g))]) return false;
          }
          return true;
        },
        [&](const std::vector<int>& x) {
          EffectivenessWitness w{static_cast<Obj>(M), {}};
          for (std::size_t i = 0; i < n; ++i) w.psi[S.arrows[i]] = x[i];
          out.push_back(std::move(w));
          stop = first_only;
          return !first_only;
        },
        budget);
    if (stop) break;
  }
  return out;
}

}  // namespace detail

inline std::vector<EffectivenessWitness> effectiveness(const DescentDatum& d, Budget& budget) {
  validate_descent(d);
  return detail::search_witnesses(d, budget, false);
}

inline std::vector<EffectivenessWitness> effectiveness(const DescentDatum& d) {
  Budget budget;
  return effectiveness(d, budget);
}

enum class Verdict { holds, fails, bounded };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::bounded: return "bounded";
  }
  return "unknown";
}

struct ConditionReport {
  Verdict verdict = Verdict::holds;
  std::size_t checked = 0;
  std::string witness;  // failure witness, or the stratum where the bound hit
};

struct StackReport {
  ConditionReport objects;     // gluing of objects
  ConditionReport morphisms;   // gluing of morphisms
  ConditionReport uniqueness;  // uniqueness of gluings

  bool fails() const {
    return objects.verdict == Verdict::fails || morphisms.verdict == Verdict::fails || uniqueness.verdict == Verdict::fails;
  }
  bool bounded() const {
    return !fails() && (objects.verdict == Verdict::bounded || morphisms.verdict == Verdict::bounded || uniqueness.verdict == Verdict::bounded);
  }
  bool holds() const { return !fails() && !bounded(); }
};

namespace detail {

// Runs `scan(c, S, budget)` over every covering sieve, stopping at the first
// failure; a blown budget turns into a bounded verdict at that stratum.
template <typename Scan>
ConditionReport scan_covers(const GrothTopology& J, std::uint64_t bound, Scan&& scan) {
  const FinCat& C = *J.cat;
  ConditionReport r;
  Budget budget(bound);
  for (std::size_t c = 0; c < C.object_count(); ++c)
    for (const Sieve& S : J.covers[c]) {
      try {
        if (auto w = scan(S, budget, r.checked)) {
          r.verdict = Verdict::fails;
          r.witness = *w;
          return r;
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SizeBound) throw;
        r.verdict = Verdict::bounded;
        r.witness = cat("bound of ", bound, " reached at ", describe(C, S));
        return r;
      }
    }
  return r;
}

}  // namespace detail

inline StackReport check_stack(const PresheafRef& F, const GrothTopology& J, std::uint64_t bound = default_bound) {
  check_presheaf(*F);
  const FinCat& C = *F->site;
  if (!shared_equal(F->site, J.cat)) fail(ErrorKind::InvariantViolation, "presheaf and topology live over different sites");
  StackReport out;
  out.uniqueness = detail::scan_covers(J, bound, [&](const Sieve& S, Budget& budget, std::size_t& checked) -> std::optional<std::string> {
    const FinCat& Fc = F->at(S.at);
    for (std::size_t h = 0; h < Fc.arrow_count(); ++h)
      for (std::size_t k = h + 1; k < Fc.arrow_count(); ++k) {
        budget.spend();
        const Arr ha = static_cast<Arr>(h), ka = static_cast<Arr>(k);
        if (Fc.dom(ha) != Fc.dom(ka) || Fc.cod(ha) != Fc.cod(ka)) continue;
        ++checked;
        bool same = true;
        for (Arr f : S.arrows) same = same && F->restrict(f).arrow(ha) == F->restrict(f).arrow(ka);
        if (same)
          return cat("'", Fc.arrow_name(ha), "' and '", Fc.arrow_name(ka), "' in F('", C.object_name(S.at), "') agree on ", describe(C, S));
      }
    return std::nullopt;
  });
  out.morphisms = detail::scan_covers(J, bound, [&](const Sieve& S, Budget& budget, std::size_t& checked) -> std::optional<std::string> {
    const FinCat& Fc = F->at(S.at);
    const std::size_t n = S.arrows.size();
    std::map<Arr, std::size_t> slot_of;
    for (std::size_t i = 0; i < n; ++i) slot_of[S.arrows[i]] = i;
    std::vector<std::vector<std::pair<Arr, Arr>>> checks(n);
    for (auto [f, g] : descent_pairs(C, S)) checks[std::max(slot_of.at(f), slot_of.at(C.compose(f, g)))].push_back({f, g});
    for (std::size_t X = 0; X < Fc.object_count(); ++X)
      for (std::size_t Y = 0; Y < Fc.object_count(); ++Y) {
        std::optional<std::string> found;
        depth_first<int>(
            n,
            [&](std::size_t i, const std::vector<int>&) {
              const Arr f = S.arrows[i];
              std::vector<int> v;
              for (Arr a : F->at(C.dom(f)).hom(F->restrict(f)(static_cast<Obj>(X)), F->restrict(f)(static_cast<Obj>(Y)))) v.push_back(a);
              return v;
            },
            [&](std::size_t i, const std::vector<int>& x) {
              for (auto [f, g] : checks[i])
                if (F->restrict(g).arrow(x[slot_of.at(f)]) != x[slot_of.at(C.compose(f, g))]) return false;
              return true;
            },
            [&](const std::vector<int>& x) {
              ++checked;
              for (Arr h : Fc.hom(static_cast<Obj>(X), static_cast<Obj>(Y))) {
                bool glues = true;
                for (std::size_t i = 0; i < n; ++i) glues = glues && F->restrict(S.arrows[i]).arrow(h) == x[i];
                if (glues) return true;
              }
              std::string fam;
              for (std::size_t i = 0; i < n; ++i)
                fam += cat(i ? ", " : "", C.arrow_name(S.arrows[i]), " ↦ ", F->at(C.dom(S.arrows[i])).arrow_name(x[i]));
              found = cat("family [", fam, "] from '", Fc.object_name(static_cast<Obj>(X)), "' to '", Fc.object_name(static_cast<Obj>(Y)),
                          "' on ", describe(C, S), " has no gluing");
              return false;
            },
            budget);
        if (found) return found;
      }
    return std::nullopt;
  });
  out.objects = detail::scan_covers(J, bound, [&](const Sieve& S, Budget& budget, std::size_t& checked) -> std::optional<std::string> {
    for (const DescentDatum& d : enumerate_descent_data(F, S, budget)) {
      ++checked;
      if (detail::search_witnesses(d, budget, true).empty()) {
        std::string objs;
        for (Arr f : S.arrows) objs += cat(objs.empty() ? "" : ", ", C.arrow_name(f), " ↦ ", F->at(C.dom(f)).object_name(d.object(f)));
        return cat("descent datum [", objs, "] on ", describe(C, S), " is not effective");
      }
    }
    return std::nullopt;
  });
  return out;
}

// A map into Ω̃ whose values are all sheaves for the induced slice topologies.
struct MapToOmegaJ {
  MapToOmega map;
  std::vector<GrothTopology> slice_topologies;
  bool attested = false;  // endpoints taken as stacks without certification
};

struct EllReport {
  std::optional<MapToOmegaJ> factor;
  std::string witness;  // set when some value is not a sheaf
};

inline EllReport ell_factors(const MapToOmega& z, const GrothTopology& J, Budget& budget) {
  const FinCat& C = *z.site();
  const CatPresheaf& F = *z.source;
  std::vector<GrothTopology> tops = slice_topologies(J, *z.slices);
  for (std::size_t c = 0; c < C.object_count(); ++c)
    for (std::size_t X = 0; X < F.at(static_cast<Obj>(c)).object_count(); ++X) {
      const SheafReport r = is_sheaf(z.at(static_cast<Obj>(c), static_cast<Obj>(X)), tops[c], budget);
      if (!r.holds)
        return EllReport{std::nullopt, cat("value at ('", C.object_name(static_cast<Obj>(c)), "', '", F.at(static_cast<Obj>(c)).object_name(static_cast<Obj>(X)),
                                            "') is not a sheaf: ", r.witness)};
    }
  return EllReport{MapToOmegaJ{z, std::move(tops), false}, {}};
}

inline EllReport ell_factors(const MapToOmega& z, const GrothTopology& J) {
  Budget budget;
  return ell_factors(z, J, budget);
}

// The characteristic map of φ, factored through the sheaves on slices.
inline MapToOmegaJ char_stacks(const SlicesRef& slices, const DiscOpfibPre& phi, const GrothTopology& J, bool attest = false,
                               std::uint64_t bound = default_bound) {
  if (!attest) {
    for (const auto& [role, P] : {std::pair{"total", phi.total()}, std::pair{"base", phi.base()}}) {
      const StackReport r = check_stack(P, J, bound);
      if (r.fails()) {
        const ConditionReport& bad = r.objects.verdict == Verdict::fails ? r.objects : r.morphisms.verdict == Verdict::fails ? r.morphisms : r.uniqueness;
        fail(ErrorKind::FactorizationFailed, role, " is not a stack: ", bad.witness);
      }
      if (r.bounded()) fail(ErrorKind::SizeBound, role, " could not be certified as a stack within the bound; attest it instead");
    }
  }
  Budget budget(bound);
  EllReport e = ell_factors(characteristic(slices, phi), J, budget);
  if (!e.factor) fail(ErrorKind::FactorizationFailed, e.witness);
  e.factor->attested = attest;
  return std::move(*e.factor);
}

// Descent data for Ω_J: sheaves M_f on C/dom f with isos g*M_f → M_{f∘g}.
struct OmegaDescentDatum {
  SlicesRef slices;
  Sieve sieve;
  std::map<Arr, SetPresheaf> objects;
  std::map<std::pair<Arr, Arr>, PresheafNat> isos;

  const SetPresheaf& object(Arr f) const { return objects.at(f); }
  const PresheafNat& iso(Arr f, Arr g) const { return isos.at({f, g}); }
};

inline std::optional<DescentDefect> omega_descent_defect(const OmegaDescentDatum& d, const GrothTopology& J) {
  const FinCat& C = *d.slices->site;
  if (auto e = sieve_defect(C, d.sieve)) return DescentDefect{ErrorKind::InvariantViolation, *e};
  for (Arr f : d.sieve.arrows) {
    auto it = d.objects.find(f);
    if (it == d.objects.end()) return DescentDefect{ErrorKind::MissingSection, cat("no sheaf over '", C.arrow_name(f), "'")};
    if (!shared_equal(it->second.base, d.slices->at(C.dom(f)).category))
      return DescentDefect{ErrorKind::InvariantViolation, cat("value over '", C.arrow_name(f), "' is not on the slice")};
    if (auto e = set_functor_defect(it->second)) return DescentDefect{ErrorKind::InvariantViolation, *e};
    const SheafReport r = is_sheaf(it->second, slice_topology(J, d.slices->at(C.dom(f))));
    if (!r.holds) return DescentDefect{ErrorKind::InvariantViolation, cat("value over '", C.arrow_name(f), "' is not a sheaf: ", r.witness)};
  }
  for (auto [f, g] : descent_pairs(C, d.sieve)) {
    auto it = d.isos.find({f, g});
    if (it == d.isos.end()) return DescentDefect{ErrorKind::MissingSection, cat("no iso for '", C.arrow_name(f), "', '", C.arrow_name(g), "'")};
    const PresheafNat& phi = it->second;
    if (!(phi.source == d.slices->reindex(d.object(f), g)) || !(phi.target == d.object(C.compose(f, g))) || set_nat_defect(phi) || !is_set_iso(phi))
      return DescentDefect{ErrorKind::InvariantViolation, cat("iso for '", C.arrow_name(f), "', '", C.arrow_name(g), "' is not a natural iso between the right sheaves")};
  }
  for (auto [f, g] : descent_pairs(C, d.sieve))
    for (Arr h : C.arrows_into(C.dom(g))) {
      const PresheafNat lhs = vertical(d.iso(C.compose(f, g), h), d.slices->reindex(d.iso(f, g), h));
      if (lhs.components != d.iso(f, C.compose(g, h)).components)
        return DescentDefect{ErrorKind::CocycleViolation, cat("cocycle fails at f='", C.arrow_name(f), "', g='", C.arrow_name(g), "', h='", C.arrow_name(h), "'")};
    }
  return std::nullopt;
}

inline void validate_omega_descent(const OmegaDescentDatum& d, const GrothTopology& J) {
  if (auto e = omega_descent_defect(d, J)) fail(e->kind, e->detail);
}

inline OmegaDescentDatum induced_omega_datum(const SlicesRef& slices, const Sieve& S, const SetPresheaf& M) {
  const FinCat& C = *slices->site;
  OmegaDescentDatum d{slices, S, {}, {}};
  for (Arr f : S.arrows) d.objects.emplace(f, slices->reindex(M, f));
  for (auto [f, g] : descent_pairs(C, S)) d.isos.emplace(std::pair{f, g}, identity_set_nat(slices->reindex(d.object(f), g)));
  return d;
}

// Moves a datum along isos u_f: M_f → N_f.
inline OmegaDescentDatum transport_omega_datum(const OmegaDescentDatum& d, const std::map<Arr, PresheafNat>& u) {
  const FinCat& C = *d.slices->site;
  OmegaDescentDatum out{d.slices, d.sieve, {}, {}};
  for (Arr f : d.sieve.arrows) out.objects.emplace(f, u.at(f).target);
  for (auto [f, g] : descent_pairs(C, d.sieve)) {
    const PresheafNat back = d.slices->reindex(inverse(u.at(f)), g);
    out.isos.emplace(std::pair{f, g}, vertical(u.at(C.compose(f, g)), vertical(d.iso(f, g), back)));
  }
  return out;
}

struct OmegaProbeResult {
  bool ok = false;
  std::string failure;
  std::optional<SetPresheaf> Z;        // the presheaf built from the datum
  std::optional<SetPresheaf> M;        // Z^{++}
  std::map<Arr, PresheafNat> psi;      // ψ^f: f*M → M_f
};

// Z(e) = M_e(id) for e ∈ S and ∅ otherwise, Z(h) = φ^{e,h}_{id} ∘ M_e(h); then
// M = Z^{++} and ψ^f = θ^f ∘ (f*η)^{-1} where θ^f_g = (φ^{f,g}_{id})^{-1}.
inline OmegaProbeResult omega_J_probe(const OmegaDescentDatum& d, const GrothTopology& J, Budget& budget) {
  OmegaProbeResult out;
  const FinCat& C = *d.slices->site;
  const Sieve& S = d.sieve;
  const Obj c = S.at;
  const Slice& sc = d.slices->at(c);
  const FinCat& Sc = *sc.category;
  if (auto e = omega_descent_defect(d, J)) {
    out.failure = cat("invalid descent datum: ", e->detail);
    return out;
  }
  std::vector<std::vector<std::string>> elements(Sc.object_count());
  std::vector<std::vector<int>> action(Sc.arrow_count());
  for (std::size_t x = 0; x < Sc.object_count(); ++x) {
    const Arr e = sc.arrow_at(static_cast<Obj>(x));
    if (S.contains(e)) elements[x] = d.object(e).elements[static_cast<std::size_t>(d.slices->at(C.dom(e)).terminal())];
  }
  for (std::size_t a = 0; a < Sc.arrow_count(); ++a) {
    const Arr aa = static_cast<Arr>(a);
    const Arr e = sc.arrow_at(Sc.cod(aa));
    if (!S.contains(e)) continue;
    const Arr h = sc.dom.arrow(aa);
    const Slice& sd = d.slices->at(C.dom(e));
    const SetPresheaf& Me = d.object(e);
    const Arr under = sd.arrow_for(h, C.identity(C.dom(e)));
    const PresheafNat& phi = d.iso(e, h);
    const Obj top = d.slices->at(C.dom(h)).terminal();
    for (std::size_t y = 0; y < Me.size(sd.terminal()); ++y) action[a].push_back(phi(top, Me.apply(under, static_cast<int>(y))));
  }
  try {
    out.Z = make_set_functor<Variance::contravariant>(sc.category, std::move(elements), std::move(action));
  } catch (const Error& e) {
    out.failure = cat("Z is not a presheaf: ", e.detail());
    return out;
  }
  const GrothTopology Jc = slice_topology(J, sc);
  const PlusResult plus2 = sheafify(*out.Z, Jc, budget);
  out.M = plus2.presheaf;
  if (const SheafReport r = is_sheaf(*out.M, Jc, budget); !r.holds) {
    out.failure = cat("Z^{++} is not a sheaf: ", r.witness);
    return out;
  }
  for (Arr f : S.arrows) {
    const Slice& sd = d.slices->at(C.dom(f));
    const PresheafNat eta = d.slices->reindex(plus2.unit, f);
    const SetPresheaf& Mf = d.object(f);
    PresheafNat psi{d.slices->reindex(*out.M, f), Mf, {}};
    for (std::size_t x = 0; x < sd.category->object_count(); ++x) {
      const Arr g = sd.arrow_at(static_cast<Obj>(x));
      const std::vector<int>& phi_top = d.iso(f, g).components[static_cast<std::size_t>(d.slices->at(C.dom(g)).terminal())];
      const std::vector<int>& eta_x = eta.components[x];
      std::vector<int> comp(psi.source.size(static_cast<Obj>(x)), -1);
      for (std::size_t i = 0; i < eta_x.size(); ++i) {
        // θ maps i ∈ M_{f∘g}(id) to its preimage under φ^{f,g}_{id}
        const int theta = static_cast<int>(std::find(phi_top.begin(), phi_top.end(), static_cast<int>(i)) - phi_top.begin());
        int& slot = comp[static_cast<std::size_t>(eta_x[i])];
        if (slot != -1) {
          out.failure = cat("unit of Z^{++} is not injective over '", C.arrow_name(f), "'");
          return out;
        }
        slot = theta;
      }
      if (std::find(comp.begin(), comp.end(), -1) != comp.end()) {
        out.failure = cat("unit of Z^{++} is not surjective over '", C.arrow_name(f), "'");
        return out;
      }
      psi.components.push_back(std::move(comp));
    }
    if (auto e = set_nat_defect(psi); e || !is_set_iso(psi)) {
      out.failure = cat("ψ over '", C.arrow_name(f), "' is not a natural iso");
      return out;
    }
    out.psi.emplace(f, std::move(psi));
  }
  for (auto [f, g] : descent_pairs(C, S)) {
    const PresheafNat lhs = vertical(d.iso(f, g), d.slices->reindex(out.psi.at(f), g));
    if (lhs.components != out.psi.at(C.compose(f, g)).components) {
      out.failure = cat("compatibility square fails at '", C.arrow_name(f), "', '", C.arrow_name(g), "'");
      return out;
    }
  }
  out.ok = true;
  return out;
}

inline OmegaProbeResult omega_J_probe(const OmegaDescentDatum& d, const GrothTopology& J) {
  Budget budget;
  return omega_J_probe(d, J, budget);
}

// λ: M → N with f*λ = α_f for f ∈ S: λ_g sends x to the amalgamation of
// h ↦ (α_{g∘h})_{id}(M(h@g)(x)) over g*S. Empty when N fails to amalgamate.
inline std::optional<PresheafNat> omega_glue_morphisms(const SlicesRef& slices, const Sieve& S, const SetPresheaf& M, const SetPresheaf& N,
                                                       const std::map<Arr, PresheafNat>& alpha) {
  const FinCat& C = *slices->site;
  const Slice& sc = slices->at(S.at);
  const FinCat& Sc = *sc.category;
  PresheafNat lambda{M, N, {}};
  for (std::size_t x = 0; x < Sc.object_count(); ++x) {
    const Arr g = sc.arrow_at(static_cast<Obj>(x));
    const Sieve gS = pullback_sieve(C, g, S);
    Sieve lifted{static_cast<Obj>(x), {}};
    for (Arr h : gS.arrows) lifted.arrows.push_back(sc.arrow_for(h, g));
    std::sort(lifted.arrows.begin(), lifted.arrows.end());
    std::vector<int> comp;
    for (std::size_t i = 0; i < M.size(static_cast<Obj>(x)); ++i) {
      MatchingFamily m{lifted, {}};
      for (Arr a : lifted.arrows) {
        const Arr h = sc.dom.arrow(a);
        const Arr gh = C.compose(g, h);
        const Obj top = slices->at(C.dom(h)).terminal();
        m.values.push_back(alpha.at(gh)(top, M.apply(a, static_cast<int>(i))));
      }
      const auto am = amalgamations(N, m);
      if (am.size() != 1) return std::nullopt;
      comp.push_back(am.front());
    }
    lambda.components.push_back(std::move(comp));
  }
  if (set_nat_defect(lambda)) return std::nullopt;
  for (Arr f : S.arrows)
    if (slices->reindex(lambda, f).components != alpha.at(f).components) return std::nullopt;
  return lambda;
}

// A presheaf natural transformation between Set-valued presheaves, seen
// between the corresponding discrete presheaves of categories.
inline TwoNat discrete_two_nat(const PresheafNat& t) {
  PresheafRef A = discrete_presheaf(t.source);
  PresheafRef B = discrete_presheaf(t.target);
  TwoNat s{A, B, {}};
  for (std::size_t c = 0; c < A->values.size(); ++c) {
    const FinCat& Ac = *A->values[c];
    const FinCat& Bc = *B->values[c];
    FinFunctor K{A->values[c], B->values[c], {}, {}};
    for (int v : t.components[c]) K.on_objects.push_back(v);
    for (std::size_t a = 0; a < Ac.arrow_count(); ++a) K.on_arrows.push_back(Bc.identity(K(Ac.dom(static_cast<Arr>(a)))));
    s.components.push_back(std::move(K));
  }
  check_two_nat(s);
  return s;
}

}  // namespace tck
