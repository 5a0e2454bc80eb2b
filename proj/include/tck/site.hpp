#pragma once

// Sieves and Grothendieck topologies on a finite category, the topology
// induced on slices, matching families and amalgamations, sheaf conditions
// and the plus construction.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tck/core.hpp"
#include "tck/fincat.hpp"
#include "tck/setfunctor.hpp"
#include "tck/slice.hpp"

namespace tck {

struct Sieve {
  Obj at = none;
  std::vector<Arr> arrows;  // sorted

  bool contains(Arr f) const { return std::binary_search(arrows.begin(), arrows.end(), f); }
  bool operator==(const Sieve&) const = default;
  auto operator<=>(const Sieve&) const = default;
};

inline std::string describe(const FinCat& C, const Sieve& S) {
  std::string out = "{";
  for (std::size_t i = 0; i < S.arrows.size(); ++i) out += (i ? "," : "") + C.arrow_name(S.arrows[i]);
  return out + "} on '" + C.object_name(S.at) + "'";
}

inline std::optional<std::string> sieve_defect(const FinCat& C, const Sieve& S) {
  for (Arr f : S.arrows) {
    if (C.cod(f) != S.at) return cat("arrow '", C.arrow_name(f), "' does not land in '", C.object_name(S.at), "'");
    for (Arr g : C.arrows_into(C.dom(f)))
      if (!S.contains(C.compose(f, g))) return cat("not closed under precomposition: '", C.arrow_name(f), "' then '", C.arrow_name(g), "'");
  }
  return std::nullopt;
}

// Closure of a family of arrows into c under precomposition.
inline Sieve sieve_generate(const FinCat& C, Obj c, const std::vector<Arr>& family) {
  std::set<Arr> out;
  for (Arr f : family) {
    if (C.cod(f) != c) fail(ErrorKind::MixedCodomain, "arrow '", C.arrow_name(f), "' does not land in '", C.object_name(c), "'");
    for (Arr g : C.arrows_into(C.dom(f))) out.insert(C.compose(f, g));
  }
  return Sieve{c, std::vector<Arr>(out.begin(), out.end())};
}

inline Sieve maximal_sieve(const FinCat& C, Obj c) { return sieve_generate(C, c, {C.identity(c)}); }

inline bool is_maximal(const FinCat& C, const Sieve& S) { return S.contains(C.identity(S.at)); }

// g*S = {h | g∘h ∈ S}
inline Sieve pullback_sieve(const FinCat& C, Arr g, const Sieve& S) {
  if (C.cod(g) != S.at) fail(ErrorKind::InvariantViolation, "pullback of a sieve along an arrow into another object");
  Sieve out{C.dom(g), {}};
  for (Arr h : C.arrows_into(C.dom(g)))
    if (S.contains(C.compose(g, h))) out.arrows.push_back(h);
  std::sort(out.arrows.begin(), out.arrows.end());
  return out;
}

inline Sieve intersect(const Sieve& S, const Sieve& R) {
  Sieve out{S.at, {}};
  std::set_intersection(S.arrows.begin(), S.arrows.end(), R.arrows.begin(), R.arrows.end(), std::back_inserter(out.arrows));
  return out;
}

inline bool is_subsieve(const Sieve& S, const Sieve& R) { return std::includes(R.arrows.begin(), R.arrows.end(), S.arrows.begin(), S.arrows.end()); }

// Every sieve on c, in increasing order.
inline std::vector<Sieve> all_sieves(const FinCat& C, Obj c, Budget& budget) {
  const std::vector<Arr> into = C.arrows_into(c);
  if (into.size() > 20) fail(ErrorKind::SizeBound, "too many arrows into '", C.object_name(c), "' to list its sieves");
  std::vector<Sieve> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << into.size()); ++mask) {
    budget.spend();
    Sieve S{c, {}};
    for (std::size_t i = 0; i < into.size(); ++i)
      if (mask >> i & 1) S.arrows.push_back(into[i]);
    std::sort(S.arrows.begin(), S.arrows.end());
    if (!sieve_defect(C, S)) out.push_back(std::move(S));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Sieve> all_sieves(const FinCat& C, Obj c) {
  Budget budget;
  return all_sieves(C, c, budget);
}

struct GrothTopology {
  CatRef cat;
  std::vector<std::vector<Sieve>> covers;  // per object, sorted

  bool covering(const Sieve& S) const {
    const auto& J = covers[static_cast<std::size_t>(S.at)];
    return std::binary_search(J.begin(), J.end(), S);
  }
  bool operator==(const GrothTopology& o) const { return shared_equal(cat, o.cat) && covers == o.covers; }
};

// Takes the covering sieves as given, without any closure.
inline GrothTopology topology_from_sieves(const CatRef& C, std::vector<std::vector<Sieve>> covers) {
  if (covers.size() != C->object_count()) fail(ErrorKind::InvariantViolation, "topology table does not match the category");
  for (std::size_t c = 0; c < covers.size(); ++c) {
    for (const Sieve& S : covers[c]) {
      if (S.at != static_cast<Obj>(c)) fail(ErrorKind::MixedCodomain, "sieve listed under the wrong object: ", describe(*C, S));
      if (auto d = sieve_defect(*C, S)) fail(ErrorKind::InvariantViolation, "not a sieve: ", *d);
    }
    std::sort(covers[c].begin(), covers[c].end());
    covers[c].erase(std::unique(covers[c].begin(), covers[c].end()), covers[c].end());
  }
  return GrothTopology{C, std::move(covers)};
}

// The trivial topology: only maximal sieves cover.
inline GrothTopology trivial_topology(const CatRef& C) {
  std::vector<std::vector<Sieve>> covers;
  for (std::size_t c = 0; c < C->object_count(); ++c) covers.push_back({maximal_sieve(*C, static_cast<Obj>(c))});
  return topology_from_sieves(C, std::move(covers));
}

struct Saturation {
  GrothTopology topology;
  std::size_t generated = 0;  // sieves generated from the input families
  std::size_t added = 0;      // sieves added by the closure
};

// Smallest topology in which every generated sieve covers.
inline Saturation generate_topology(const CatRef& C, const std::vector<std::pair<Obj, std::vector<Arr>>>& families, Budget& budget) {
  std::vector<std::set<Sieve>> J(C->object_count());
  for (std::size_t c = 0; c < C->object_count(); ++c) J[c].insert(maximal_sieve(*C, static_cast<Obj>(c)));
  for (const auto& [c, fam] : families) J[static_cast<std::size_t>(c)].insert(sieve_generate(*C, c, fam));
  std::size_t start = 0;
  for (const auto& s : J) start += s.size();
  std::vector<std::vector<Sieve>> sieves;
  for (std::size_t c = 0; c < C->object_count(); ++c) sieves.push_back(all_sieves(*C, static_cast<Obj>(c), budget));
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t c = 0; c < C->object_count(); ++c) {
      const std::vector<Sieve> current(J[c].begin(), J[c].end());
      for (const Sieve& S : current)
        for (std::size_t g = 0; g < C->arrow_count(); ++g) {
          if (C->cod(static_cast<Arr>(g)) != static_cast<Obj>(c)) continue;
          budget.spend();
          grew = J[static_cast<std::size_t>(C->dom(static_cast<Arr>(g)))].insert(pullback_sieve(*C, static_cast<Arr>(g), S)).second || grew;
        }
      for (const Sieve& R : sieves[c]) {
        if (J[c].count(R)) continue;
        for (const Sieve& S : current) {
          budget.spend();
          bool local = true;
          for (Arr f : S.arrows)
            if (!J[static_cast<std::size_t>(C->dom(f))].count(pullback_sieve(*C, f, R))) {
              local = false;
              break;
            }
          if (local) {
            J[c].insert(R);
            grew = true;
            break;
          }
        }
      }
    }
  }
  std::vector<std::vector<Sieve>> covers;
  std::size_t total = 0;
  for (const auto& s : J) {
    covers.emplace_back(s.begin(), s.end());
    total += s.size();
  }
  Saturation out{topology_from_sieves(C, std::move(covers)), start, total - start};
  return out;
}

inline Saturation generate_topology(const CatRef& C, const std::vector<std::pair<Obj, std::vector<Arr>>>& families) {
  Budget budget;
  return generate_topology(C, families, budget);
}

// Open-cover topology on the opens of {1,2}: "12" is covered by "1" and
// "2" jointly, and the empty open by the empty family.
inline GrothTopology open_cover_topology(const CatRef& C) {
  return generate_topology(C, {{C->object("12"), {C->arrow("1<12"), C->arrow("2<12")}}, {C->object("0"), {}}}).topology;
}

struct AxiomViolation {
  std::string axiom;  // maximality, stability or transitivity
  std::string witness;
};

inline std::optional<AxiomViolation> validate_topology(const GrothTopology& J, Budget& budget) {
  const FinCat& C = *J.cat;
  for (std::size_t c = 0; c < C.object_count(); ++c)
    if (!J.covering(maximal_sieve(C, static_cast<Obj>(c))))
      return AxiomViolation{"maximality", cat("the maximal sieve on '", C.object_name(static_cast<Obj>(c)), "' does not cover")};
  for (std::size_t c = 0; c < C.object_count(); ++c)
    for (const Sieve& S : J.covers[c])
      for (Arr g : C.arrows_into(static_cast<Obj>(c))) {
        budget.spend();
        const Sieve P = pullback_sieve(C, g, S);
        if (!J.covering(P))
          return AxiomViolation{"stability", cat("pulling back ", describe(C, S), " along '", C.arrow_name(g), "' gives ", describe(C, P))};
      }
  for (std::size_t c = 0; c < C.object_count(); ++c)
    for (const Sieve& R : all_sieves(C, static_cast<Obj>(c), budget)) {
      if (J.covering(R)) continue;
      for (const Sieve& S : J.covers[c]) {
        budget.spend();
        bool local = true;
        for (Arr f : S.arrows) local = local && J.covering(pullback_sieve(C, f, R));
        if (local) return AxiomViolation{"transitivity", cat(describe(C, R), " is locally covering along ", describe(C, S), " but does not cover")};
      }
    }
  return std::nullopt;
}

inline std::optional<AxiomViolation> validate_topology(const GrothTopology& J) {
  Budget budget;
  return validate_topology(J, budget);
}

// A sieve on the slice object f: d → c covers iff its image under dom covers d.
inline GrothTopology slice_topology(const GrothTopology& J, const Slice& s) {
  const FinCat& C = *J.cat;
  const FinCat& S = *s.category;
  std::vector<std::vector<Sieve>> covers(S.object_count());
  for (std::size_t x = 0; x < S.object_count(); ++x) {
    const Arr f = s.arrow_at(static_cast<Obj>(x));
    for (const Sieve& R : J.covers[static_cast<std::size_t>(C.dom(f))]) {
      Sieve lifted{static_cast<Obj>(x), {}};
      for (Arr g : R.arrows) lifted.arrows.push_back(s.arrow_for(g, f));
      std::sort(lifted.arrows.begin(), lifted.arrows.end());
      covers[x].push_back(std::move(lifted));
    }
  }
  return topology_from_sieves(s.category, std::move(covers));
}

inline std::vector<GrothTopology> slice_topologies(const GrothTopology& J, const SliceSystem& slices) {
  std::vector<GrothTopology> out;
  for (const Slice& s : slices.slices) out.push_back(slice_topology(J, s));
  return out;
}

struct MatchingFamily {
  Sieve sieve;
  std::vector<int> values;  // element of Z(dom f) for each f in sieve.arrows

  bool operator==(const MatchingFamily&) const = default;
  auto operator<=>(const MatchingFamily&) const = default;
};

inline std::vector<MatchingFamily> matching_families(const SetPresheaf& Z, const Sieve& S, Budget& budget) {
  const FinCat& C = *Z.base;
  const std::size_t n = S.arrows.size();
  std::vector<std::size_t> slot(C.arrow_count(), n);
  for (std::size_t i = 0; i < n; ++i) slot[static_cast<std::size_t>(S.arrows[i])] = i;
  // (f, g) with f ∈ S: x_{f∘g} = Z(g)(x_f), checked at the later slot
  std::vector<std::vector<std::pair<std::size_t, Arr>>> checks(n);
  for (std::size_t i = 0; i < n; ++i)
    for (Arr g : C.arrows_into(C.dom(S.arrows[i]))) {
      const std::size_t j = slot[static_cast<std::size_t>(C.compose(S.arrows[i], g))];
      checks[std::max(i, j)].push_back({i, g});
    }
  std::vector<MatchingFamily> out;
  depth_first<int>(
      n,
      [&](std::size_t i, const std::vector<int>&) {
        std::vector<int> v(Z.size(C.dom(S.arrows[i])));
        std::iota(v.begin(), v.end(), 0);
        return v;
      },
      [&](std::size_t k, const std::vector<int>& x) {
        for (auto [i, g] : checks[k]) {
          const std::size_t j = slot[static_cast<std::size_t>(C.compose(S.arrows[i], g))];
          if (x[j] != Z.apply(g, x[i])) return false;
        }
        return true;
      },
      [&](const std::vector<int>& x) {
        out.push_back(MatchingFamily{S, x});
        return true;
      },
      budget);
  return out;
}

inline std::vector<MatchingFamily> matching_families(const SetPresheaf& Z, const Sieve& S) {
  Budget budget;
  return matching_families(Z, S, budget);
}

// The family (f ↦ Z(f)(x)) on S.
inline MatchingFamily restrict_element(const SetPresheaf& Z, const Sieve& S, int x) {
  MatchingFamily m{S, {}};
  for (Arr f : S.arrows) m.values.push_back(Z.apply(f, x));
  return m;
}

// Every x ∈ Z(c) restricting to m.
inline std::vector<int> amalgamations(const SetPresheaf& Z, const MatchingFamily& m) {
  std::vector<int> out;
  for (std::size_t x = 0; x < Z.size(m.sieve.at); ++x)
    if (restrict_element(Z, m.sieve, static_cast<int>(x)) == m) out.push_back(static_cast<int>(x));
  return out;
}

// m restricted along g: (g*m)_h = m_{g∘h}.
inline MatchingFamily pullback_family(const FinCat& C, Arr g, const MatchingFamily& m) {
  MatchingFamily out{pullback_sieve(C, g, m.sieve), {}};
  for (Arr h : out.sieve.arrows) {
    const auto it = std::lower_bound(m.sieve.arrows.begin(), m.sieve.arrows.end(), C.compose(g, h));
    out.values.push_back(m.values[static_cast<std::size_t>(it - m.sieve.arrows.begin())]);
  }
  return out;
}

// Restriction of m to a smaller sieve T ⊆ m.sieve.
inline MatchingFamily restrict_family(const MatchingFamily& m, const Sieve& T) {
  MatchingFamily out{T, {}};
  for (Arr f : T.arrows) {
    const auto it = std::lower_bound(m.sieve.arrows.begin(), m.sieve.arrows.end(), f);
    out.values.push_back(m.values[static_cast<std::size_t>(it - m.sieve.arrows.begin())]);
  }
  return out;
}

struct SheafReport {
  bool holds = true;
  std::size_t families_checked = 0;
  std::string witness;  // set when the condition fails
};

namespace detail {

inline SheafReport amalgamation_scan(const SetPresheaf& Z, const GrothTopology& J, Budget& budget, bool require_existence) {
  const FinCat& C = *Z.base;
  SheafReport r;
  for (std::size_t c = 0; c < C.object_count(); ++c)
    for (const Sieve& S : J.covers[c])
      for (const MatchingFamily& m : matching_families(Z, S, budget)) {
        ++r.families_checked;
        const std::size_t n = amalgamations(Z, m).size();
        if (n > 1 || (require_existence && n == 0)) {
          r.holds = false;
          std::string fam;
          for (std::size_t i = 0; i < m.values.size(); ++i)
            fam += cat(i ? ", " : "", C.arrow_name(S.arrows[i]), " ↦ ", Z.label(C.dom(S.arrows[i]), m.values[i]));
          r.witness = cat("matching family [", fam, "] on ", describe(C, S), " has ", n, " amalgamations");
          return r;
        }
      }
  return r;
}

}  // namespace detail

inline SheafReport is_sheaf(const SetPresheaf& Z, const GrothTopology& J, Budget& budget) {
  return detail::amalgamation_scan(Z, J, budget, true);
}
inline SheafReport is_sheaf(const SetPresheaf& Z, const GrothTopology& J) {
  Budget budget;
  return is_sheaf(Z, J, budget);
}
inline SheafReport is_separated(const SetPresheaf& Z, const GrothTopology& J, Budget& budget) {
  return detail::amalgamation_scan(Z, J, budget, false);
}
inline SheafReport is_separated(const SetPresheaf& Z, const GrothTopology& J) {
  Budget budget;
  return is_separated(Z, J, budget);
}

struct SubcanonicalReport {
  bool holds = true;
  std::string witness;
};

// Every representable Hom(-, c) is a sheaf.
inline SubcanonicalReport subcanonical_check(const GrothTopology& J, Budget& budget) {
  for (std::size_t c = 0; c < J.cat->object_count(); ++c) {
    const SheafReport r = is_sheaf(hom_presheaf(J.cat, static_cast<Obj>(c)), J, budget);
    if (!r.holds) return {false, cat("Hom(-, '", J.cat->object_name(static_cast<Obj>(c)), "'): ", r.witness)};
  }
  return {};
}

inline SubcanonicalReport subcanonical_check(const GrothTopology& J) {
  Budget budget;
  return subcanonical_check(J, budget);
}

struct PlusResult {
  SetPresheaf presheaf;
  PresheafNat unit;  // Z → Z^+
};

// Z^+(c): pairs (R covering c, matching family on R) modulo the equivalence
// generated by agreeing on R ∩ R'. A class containing the family of some x
// ∈ Z(c) on the maximal sieve is labelled by the least such x; the others by
// their least family.
inline PlusResult plus(const SetPresheaf& Z, const GrothTopology& J, Budget& budget) {
  const FinCat& C = *Z.base;
  struct Level {
    std::vector<MatchingFamily> pairs;
    std::map<MatchingFamily, std::size_t> index;
    std::vector<std::size_t> parent;
    std::vector<std::size_t> class_of;  // pair → class
    std::vector<std::string> labels;     // class labels before sorting
    std::size_t find(std::size_t i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    }
  };
  std::vector<Level> levels(C.object_count());
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    Level& L = levels[c];
    for (const Sieve& R : J.covers[c])
      for (auto& m : matching_families(Z, R, budget)) {
        L.index.emplace(m, L.pairs.size());
        L.pairs.push_back(std::move(m));
      }
    L.parent.resize(L.pairs.size());
    std::iota(L.parent.begin(), L.parent.end(), 0);
    for (std::size_t i = 0; i < L.pairs.size(); ++i)
      for (std::size_t j = i + 1; j < L.pairs.size(); ++j) {
        budget.spend();
        const Sieve T = intersect(L.pairs[i].sieve, L.pairs[j].sieve);
        if (restrict_family(L.pairs[i], T) == restrict_family(L.pairs[j], T)) L.parent[L.find(i)] = L.find(j);
      }
    // label each class
    std::map<std::size_t, std::string> label_of_root;
    const Sieve top = maximal_sieve(C, static_cast<Obj>(c));
    for (std::size_t x = 0; x < Z.size(static_cast<Obj>(c)); ++x) {
      const std::size_t root = L.find(L.index.at(restrict_element(Z, top, static_cast<int>(x))));
      label_of_root.emplace(root, Z.label(static_cast<Obj>(c), static_cast<int>(x)));
    }
    for (std::size_t i = 0; i < L.pairs.size(); ++i) {
      const std::size_t root = L.find(i);
      if (label_of_root.count(root)) continue;
      std::string fam = "[";
      for (std::size_t k = 0; k < L.pairs[i].values.size(); ++k) {
        const Arr f = L.pairs[i].sieve.arrows[k];
        fam += cat(k ? ";" : "", C.arrow_name(f), "=", Z.label(C.dom(f), L.pairs[i].values[k]));
      }
      label_of_root.emplace(root, fam + "]");
    }
    std::map<std::size_t, std::size_t> class_index;
    for (const auto& [root, label] : label_of_root) {
      class_index.emplace(root, L.labels.size());
      L.labels.push_back(label);
    }
    for (std::size_t i = 0; i < L.pairs.size(); ++i) L.class_of.push_back(class_index.at(L.find(i)));
  }
  std::vector<std::vector<std::string>> elements;
  for (const auto& L : levels) elements.push_back(L.labels);
  std::vector<std::vector<int>> action(C.arrow_count());
  for (std::size_t g = 0; g < C.arrow_count(); ++g) {
    const Arr ga = static_cast<Arr>(g);
    const Level& from = levels[static_cast<std::size_t>(C.cod(ga))];
    const Level& to = levels[static_cast<std::size_t>(C.dom(ga))];
    action[g].assign(from.labels.size(), -1);
    for (std::size_t i = 0; i < from.pairs.size(); ++i) {
      const std::size_t k = to.class_of[to.index.at(pullback_family(C, ga, from.pairs[i]))];
      int& slot = action[g][from.class_of[i]];
      if (slot != -1 && slot != static_cast<int>(k)) fail(ErrorKind::InvariantViolation, "plus construction: restriction is not well defined");
      slot = static_cast<int>(k);
    }
  }
  PlusResult out{make_set_functor<Variance::contravariant>(Z.base, elements, action), {}};
  // make_set_functor sorted the labels; map unit through them
  out.unit = PresheafNat{Z, out.presheaf, {}};
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const Level& L = levels[c];
    const Sieve top = maximal_sieve(C, static_cast<Obj>(c));
    std::vector<int> comp;
    for (std::size_t x = 0; x < Z.size(static_cast<Obj>(c)); ++x) {
      const std::size_t k = L.class_of[L.index.at(restrict_element(Z, top, static_cast<int>(x)))];
      comp.push_back(out.presheaf.find(static_cast<Obj>(c), L.labels[k]));
    }
    out.unit.components.push_back(std::move(comp));
  }
  check_set_nat(out.unit);
  return out;
}

inline PlusResult plus(const SetPresheaf& Z, const GrothTopology& J) {
  Budget budget;
  return plus(Z, J, budget);
}

inline PlusResult sheafify(const SetPresheaf& Z, const GrothTopology& J, Budget& budget) {
  PlusResult once = plus(Z, J, budget);
  PlusResult twice = plus(once.presheaf, J, budget);
  return PlusResult{twice.presheaf, vertical(twice.unit, once.unit)};
}

inline PlusResult sheafify(const SetPresheaf& Z, const GrothTopology& J) {
  Budget budget;
  return sheafify(Z, J, budget);
}

}  // namespace tck
