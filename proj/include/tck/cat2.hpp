#pragma once

// The 2-category Cat at desk scale: discrete opfibrations with their unique
// liftings, chosen pullbacks, comma objects, the lax limit of an arrow out of
// the terminal category, and the category of elements with its inverse.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tck/core.hpp"
#include "tck/fincat.hpp"
#include "tck/functor.hpp"
#include "tck/setfunctor.hpp"

namespace tck {

struct DiscOpfibCat {
  FinFunctor p;                             // E → B
  std::vector<std::vector<Obj>> fibres;     // per object of B
  std::vector<Arr> lifts;                   // [e * |arrows B| + f], none unless dom f = p(e)

  const CatRef& total() const { return p.source; }
  const CatRef& base() const { return p.target; }

  // The unique arrow out of e over f.
  Arr lift(Obj e, Arr f) const {
    return lifts[static_cast<std::size_t>(e) * p.target->arrow_count() + static_cast<std::size_t>(f)];
  }
  const std::vector<Obj>& fibre(Obj b) const { return fibres[static_cast<std::size_t>(b)]; }

  bool operator==(const DiscOpfibCat& o) const { return p == o.p; }
};

struct LiftDefect {
  Obj object;
  Arr arrow;
  std::size_t lifts;
};

// The first (object, arrow) pair whose lift count is not exactly one.
inline std::optional<LiftDefect> lifting_defect(const FinFunctor& p) {
  const FinCat& E = *p.source;
  const FinCat& B = *p.target;
  for (std::size_t e = 0; e < E.object_count(); ++e) {
    for (Arr f : B.arrows_from(p(static_cast<Obj>(e)))) {
      std::size_t count = 0;
      for (Arr g : E.arrows_from(static_cast<Obj>(e)))
        if (p.arrow(g) == f) ++count;
      if (count != 1) return LiftDefect{static_cast<Obj>(e), f, count};
    }
  }
  return std::nullopt;
}

inline DiscOpfibCat certify_dopf(const FinFunctor& p) {
  check_functor(p);
  const FinCat& E = *p.source;
  const FinCat& B = *p.target;
  if (auto d = lifting_defect(p))
    fail(ErrorKind::NotOpfibration, "object '", E.object_name(d->object), "' has ", d->lifts, " lifts of '",
         B.arrow_name(d->arrow), "'");
  DiscOpfibCat out{p, std::vector<std::vector<Obj>>(B.object_count()),
                   std::vector<Arr>(E.object_count() * B.arrow_count(), none)};
  for (std::size_t e = 0; e < E.object_count(); ++e) {
    out.fibres[static_cast<std::size_t>(p(static_cast<Obj>(e)))].push_back(static_cast<Obj>(e));
    for (Arr g : E.arrows_from(static_cast<Obj>(e)))
      out.lifts[e * B.arrow_count() + static_cast<std::size_t>(p.arrow(g))] = g;
  }
  // Redundant with unique lifting; catches malformed tables.
  for (std::size_t g = 0; g < E.arrow_count(); ++g) {
    const Arr ga = static_cast<Arr>(g);
    if (B.is_identity(p.arrow(ga)) && !E.is_identity(ga))
      fail(ErrorKind::NotOpfibration, "fibre arrow '", E.arrow_name(ga), "' is not an identity");
  }
  return out;
}

inline std::string pair_name(const std::string& x, const std::string& y) { return "(" + x + "," + y + ")"; }

struct Pullback {
  DiscOpfibCat left;  // over the source of z
  FinFunctor top;     // apex → E
};

// Chosen pullback of p along z. Objects of the apex are "(x,e)", arrows
// "(a,g)". Pulling back along an identity returns p itself.
inline Pullback pullback(const DiscOpfibCat& p, const FinFunctor& z) {
  if (!shared_equal(z.target, p.base())) fail(ErrorKind::InvariantViolation, "pullback: codomains differ");
  if (is_identity_functor(z)) return {p, identity_functor(p.total())};
  const FinCat& F = *z.source;
  const FinCat& E = *p.total();
  std::vector<std::string> objects;
  std::vector<std::pair<Obj, Obj>> pairs;
  std::vector<Obj> local(F.object_count() * E.object_count(), none);
  for (std::size_t x = 0; x < F.object_count(); ++x) {
    for (Obj e : p.fibre(z(static_cast<Obj>(x)))) {
      local[x * E.object_count() + static_cast<std::size_t>(e)] = static_cast<Obj>(objects.size());
      objects.push_back(pair_name(F.object_name(static_cast<Obj>(x)), E.object_name(e)));
      pairs.push_back({static_cast<Obj>(x), e});
    }
  }
  auto at = [&](Obj x, Obj e) { return local[static_cast<std::size_t>(x) * E.object_count() + static_cast<std::size_t>(e)]; };
  std::vector<FinCat::ArrowData> arrows;
  std::vector<std::pair<Arr, Arr>> arrow_pairs;
  std::map<std::pair<Obj, Arr>, Arr> by_source;  // (apex object, arrow of F) → apex arrow
  std::vector<Arr> ids(objects.size(), none);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [x, e] = pairs[i];
    for (Arr a : F.arrows_from(x)) {
      const Arr g = p.lift(e, z.arrow(a));
      by_source.emplace(std::make_pair(static_cast<Obj>(i), a), static_cast<Arr>(arrows.size()));
      if (a == F.identity(x)) ids[i] = static_cast<Arr>(arrows.size());
      arrows.push_back({pair_name(F.arrow_name(a), E.arrow_name(g)), static_cast<Obj>(i), at(F.cod(a), E.cod(g))});
      arrow_pairs.push_back({a, g});
    }
  }
  std::vector<Obj> arrow_dom;
  for (const auto& a : arrows) arrow_dom.push_back(a.dom);
  FinCat apex = FinCat::assemble(objects, arrows, ids, [&](Arr second, Arr first) {
    const Arr a = F.compose(arrow_pairs[static_cast<std::size_t>(second)].first, arrow_pairs[static_cast<std::size_t>(first)].first);
    return by_source.at({arrow_dom[static_cast<std::size_t>(first)], a});
  });
  CatRef A = share(std::move(apex));
  FinFunctor left{A, z.source, {}, {}};
  FinFunctor top{A, p.total(), {}, {}};
  std::map<std::string, std::size_t> object_index, arrow_index;
  for (std::size_t i = 0; i < objects.size(); ++i) object_index.emplace(objects[i], i);
  for (std::size_t x = 0; x < A->object_count(); ++x) {
    const auto& pr = pairs[object_index.at(A->object_name(static_cast<Obj>(x)))];
    left.on_objects.push_back(pr.first);
    top.on_objects.push_back(pr.second);
  }
  for (std::size_t i = 0; i < arrows.size(); ++i) arrow_index.emplace(arrows[i].name, i);
  for (std::size_t f = 0; f < A->arrow_count(); ++f) {
    const auto& pr = arrow_pairs[arrow_index.at(A->arrow_name(static_cast<Arr>(f)))];
    left.on_arrows.push_back(pr.first);
    top.on_arrows.push_back(pr.second);
  }
  return {certify_dopf(left), top};
}

struct CommaCone {
  CatRef apex;
  FinFunctor left;      // apex → A
  FinFunctor right;     // apex → B
  NatTransform filler;  // f∘left ⇒ g∘right
};

inline std::string comma_object_name(const std::string& a, const std::string& b, const std::string& alpha) {
  return "(" + a + "," + b + "," + alpha + ")";
}

inline std::string comma_arrow_name(const std::string& u, const std::string& v, const std::string& alpha,
                                    const std::string& alpha2) {
  return "(" + u + "," + v + "," + alpha + "," + alpha2 + ")";
}


// Comma object f/g. Objects "(a,b,α)" with α: f a → g b; arrows
// "(u,v,α,α')" with g(v)∘α = α'∘f(u).
inline CommaCone comma(const FinFunctor& f, const FinFunctor& g) {
  if (!shared_equal(f.target, g.target)) fail(ErrorKind::InvariantViolation, "comma: codomains differ");
  const FinCat& A = *f.source;
  const FinCat& B = *g.source;
  const FinCat& C = *f.target;
  struct Triple {
    Obj a, b;
    Arr alpha;
  };
  std::vector<Triple> triples;
  std::vector<std::string> objects;
  for (std::size_t a = 0; a < A.object_count(); ++a)
    for (std::size_t b = 0; b < B.object_count(); ++b)
      for (Arr alpha : C.hom(f(static_cast<Obj>(a)), g(static_cast<Obj>(b)))) {
        triples.push_back({static_cast<Obj>(a), static_cast<Obj>(b), alpha});
        objects.push_back(comma_object_name(A.object_name(static_cast<Obj>(a)), B.object_name(static_cast<Obj>(b)), C.arrow_name(alpha)));
      }
  struct Square {
    Arr u, v;
  };
  std::vector<FinCat::ArrowData> arrows;
  std::vector<Square> squares;
  std::map<std::tuple<Obj, Obj, Arr, Arr>, Arr> index;  // (dom, cod, u, v)
  std::vector<Arr> ids(triples.size(), none);
  for (std::size_t i = 0; i < triples.size(); ++i) {
    for (std::size_t j = 0; j < triples.size(); ++j) {
      const Triple& s = triples[i];
      const Triple& t = triples[j];
      for (Arr u : A.hom(s.a, t.a))
        for (Arr v : B.hom(s.b, t.b)) {
          if (C.compose(g.arrow(v), s.alpha) != C.compose(t.alpha, f.arrow(u))) continue;
          index.emplace(std::make_tuple(static_cast<Obj>(i), static_cast<Obj>(j), u, v), static_cast<Arr>(arrows.size()));
          if (i == j && u == A.identity(s.a) && v == B.identity(s.b)) ids[i] = static_cast<Arr>(arrows.size());
          arrows.push_back({comma_arrow_name(A.arrow_name(u), B.arrow_name(v), C.arrow_name(s.alpha), C.arrow_name(t.alpha)),
                            static_cast<Obj>(i), static_cast<Obj>(j)});
          squares.push_back({u, v});
        }
    }
  }
  FinCat apex = FinCat::assemble(objects, arrows, ids, [&](Arr second, Arr first) {
    const auto& s2 = squares[static_cast<std::size_t>(second)];
    const auto& s1 = squares[static_cast<std::size_t>(first)];
    return index.at({arrows[static_cast<std::size_t>(first)].dom, arrows[static_cast<std::size_t>(second)].cod,
                     A.compose(s2.u, s1.u), B.compose(s2.v, s1.v)});
  });
  CatRef P = share(std::move(apex));
  std::map<std::string, std::size_t> obj_orig, arr_orig;
  for (std::size_t i = 0; i < objects.size(); ++i) obj_orig.emplace(objects[i], i);
  for (std::size_t i = 0; i < arrows.size(); ++i) arr_orig.emplace(arrows[i].name, i);
  CommaCone cone{P, FinFunctor{P, f.source, {}, {}}, FinFunctor{P, g.source, {}, {}}, {}};
  std::vector<Arr> alphas;
  for (std::size_t x = 0; x < P->object_count(); ++x) {
    const Triple& t = triples[obj_orig.at(P->object_name(static_cast<Obj>(x)))];
    cone.left.on_objects.push_back(t.a);
    cone.right.on_objects.push_back(t.b);
    alphas.push_back(t.alpha);
  }
  for (std::size_t h = 0; h < P->arrow_count(); ++h) {
    const Square& s = squares[arr_orig.at(P->arrow_name(static_cast<Arr>(h)))];
    cone.left.on_arrows.push_back(s.u);
    cone.right.on_arrows.push_back(s.v);
  }
  cone.filler = NatTransform{compose(f, cone.left), compose(g, cone.right), alphas};
  return cone;
}

struct UniversalityReport {
  std::size_t cones_checked = 0;
  std::optional<std::string> counterexample;
  bool holds() const { return !counterexample.has_value(); }
};

// For every cone (l, r, θ: f∘l ⇒ g∘r) with vertex in `tests`, counts the
// functors m into the apex with left∘m = l, right∘m = r and filler·m = θ; the
// universal property asks for exactly one.
inline UniversalityReport comma_universal_check(const CommaCone& cone, const FinFunctor& f, const FinFunctor& g,
                                                const std::vector<CatRef>& tests, Budget& budget) {
  UniversalityReport report;
  for (const CatRef& X : tests) {
    const auto mediators = enumerate_functors(X, cone.apex, budget);
    for (const FinFunctor& l : enumerate_functors(X, f.source, budget)) {
      for (const FinFunctor& r : enumerate_functors(X, g.source, budget)) {
        for (const NatTransform& theta : enumerate_nats(compose(f, l), compose(g, r), budget)) {
          ++report.cones_checked;
          std::size_t count = 0;
          for (const FinFunctor& m : mediators) {
            budget.spend();
            if (compose(cone.left, m) != l || compose(cone.right, m) != r) continue;
            bool same = true;
            for (std::size_t x = 0; x < X->object_count() && same; ++x)
              same = cone.filler[m(static_cast<Obj>(x))] == theta[static_cast<Obj>(x)];
            if (same) ++count;
          }
          if (count != 1) {
            report.counterexample = cat("cone from a ", X->object_count(), "-object category has ", count, " mediating functors");
            return report;
          }
        }
      }
    }
  }
  return report;
}

// Lax limit of ω: 1 → B, i.e. the comma ω/Id_B with its projection to B.
// The fibre over b is Hom_B(ω(•), b).
inline DiscOpfibCat lax_limit_of_arrow(const FinFunctor& omega) {
  if (omega.source->object_count() != 1 || omega.source->arrow_count() != 1)
    fail(ErrorKind::InvariantViolation, "lax limit of an arrow needs the terminal category as source");
  const CommaCone cone = comma(omega, identity_functor(omega.target));
  return certify_dopf(cone.right);
}

// Category of elements of z: objects "(b,x)", arrows "(f,x)".
inline DiscOpfibCat elements_of(const FinSetFunctor& z) {
  check_set_functor(z);
  const FinCat& B = *z.base;
  std::vector<std::string> objects;
  std::vector<std::pair<Obj, int>> elems;
  std::vector<std::size_t> offset(B.object_count() + 1, 0);
  for (std::size_t b = 0; b < B.object_count(); ++b) {
    offset[b] = objects.size();
    for (std::size_t i = 0; i < z.size(static_cast<Obj>(b)); ++i) {
      objects.push_back("(" + B.object_name(static_cast<Obj>(b)) + "," + z.label(static_cast<Obj>(b), static_cast<int>(i)) + ")");
      elems.push_back({static_cast<Obj>(b), static_cast<int>(i)});
    }
  }
  auto at = [&](Obj b, int i) { return static_cast<Obj>(offset[static_cast<std::size_t>(b)] + static_cast<std::size_t>(i)); };
  std::vector<FinCat::ArrowData> arrows;
  std::vector<std::pair<Arr, Obj>> info;  // (f, source element object)
  std::map<std::pair<Arr, Obj>, Arr> index;
  std::vector<Arr> ids(objects.size(), none);
  for (std::size_t f = 0; f < B.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    const Obj b = B.dom(fa);
    for (std::size_t i = 0; i < z.size(b); ++i) {
      const Obj src = at(b, static_cast<int>(i));
      const Obj dst = at(B.cod(fa), z.apply(fa, static_cast<int>(i)));
      index.emplace(std::make_pair(fa, src), static_cast<Arr>(arrows.size()));
      if (B.is_identity(fa)) ids[static_cast<std::size_t>(src)] = static_cast<Arr>(arrows.size());
      arrows.push_back({"(" + B.arrow_name(fa) + "," + z.label(b, static_cast<int>(i)) + ")", src, dst});
      info.push_back({fa, src});
    }
  }
  FinCat E = FinCat::assemble(objects, arrows, ids, [&](Arr second, Arr first) {
    return index.at({B.compose(info[static_cast<std::size_t>(second)].first, info[static_cast<std::size_t>(first)].first),
                     info[static_cast<std::size_t>(first)].second});
  });
  CatRef T = share(std::move(E));
  std::map<std::string, std::size_t> obj_orig, arr_orig;
  for (std::size_t i = 0; i < objects.size(); ++i) obj_orig.emplace(objects[i], i);
  for (std::size_t i = 0; i < arrows.size(); ++i) arr_orig.emplace(arrows[i].name, i);
  FinFunctor p{T, z.base, {}, {}};
  for (std::size_t x = 0; x < T->object_count(); ++x) p.on_objects.push_back(elems[obj_orig.at(T->object_name(static_cast<Obj>(x)))].first);
  for (std::size_t a = 0; a < T->arrow_count(); ++a) p.on_arrows.push_back(info[arr_orig.at(T->arrow_name(static_cast<Arr>(a)))].first);
  return certify_dopf(p);
}

// b ↦ fibre over b (labelled by object names of E); f acts by the codomain
// of the lift.
inline FinSetFunctor fiber_functor(const DiscOpfibCat& p) {
  const FinCat& B = *p.base();
  const FinCat& E = *p.total();
  std::vector<std::vector<std::string>> elements(B.object_count());
  std::vector<std::vector<int>> action(B.arrow_count());
  for (std::size_t b = 0; b < B.object_count(); ++b)
    for (Obj e : p.fibre(static_cast<Obj>(b))) elements[b].push_back(E.object_name(e));
  for (std::size_t f = 0; f < B.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    const auto& dst = p.fibre(B.cod(fa));
    for (Obj e : p.fibre(B.dom(fa))) {
      const Obj target = E.cod(p.lift(e, fa));
      action[f].push_back(static_cast<int>(std::find(dst.begin(), dst.end(), target) - dst.begin()));
    }
  }
  return make_set_functor<Variance::covariant>(p.base(), std::move(elements), std::move(action));
}

namespace detail {

// Morphisms of discrete opfibrations over a common base: functors h with
// q∘h = p. The arrow part is forced by the lifts of q.
inline std::vector<FinFunctor> search_opfib_morphisms(const DiscOpfibCat& p, const DiscOpfibCat& q, Budget& budget,
                                                      bool isos_only, bool first_only) {
  if (!shared_equal(p.base(), q.base())) fail(ErrorKind::InvariantViolation, "opfibrations over different bases");
  const FinCat& E = *p.total();
  const FinCat& E2 = *q.total();
  std::vector<FinFunctor> out;
  if (isos_only && E.object_count() != E2.object_count()) return out;
  std::vector<std::vector<Arr>> checks(E.object_count());
  for (std::size_t g = 0; g < E.arrow_count(); ++g) {
    const Arr ga = static_cast<Arr>(g);
    checks[static_cast<std::size_t>(std::max(E.dom(ga), E.cod(ga)))].push_back(ga);
  }
  depth_first<Obj>(
      E.object_count(), [&](std::size_t e, const std::vector<Obj>&) { return q.fibre(p.p(static_cast<Obj>(e))); },
      [&](std::size_t e, const std::vector<Obj>& h) {
        if (isos_only)
          for (std::size_t i = 0; i < e; ++i)
            if (h[i] == h[e]) return false;
        for (Arr g : checks[e]) {
          const Arr l = q.lift(h[static_cast<std::size_t>(E.dom(g))], p.p.arrow(g));
          if (E2.cod(l) != h[static_cast<std::size_t>(E.cod(g))]) return false;
        }
        return true;
      },
      [&](const std::vector<Obj>& h) {
        FinFunctor m{p.total(), q.total(), h, {}};
        for (std::size_t g = 0; g < E.arrow_count(); ++g)
          m.on_arrows.push_back(q.lift(h[static_cast<std::size_t>(E.dom(static_cast<Arr>(g)))], p.p.arrow(static_cast<Arr>(g))));
        out.push_back(std::move(m));
        return !first_only;
      },
      budget);
  return out;
}

}  // namespace detail

inline std::vector<FinFunctor> opfib_morphisms(const DiscOpfibCat& p, const DiscOpfibCat& q, Budget& budget) {
  return detail::search_opfib_morphisms(p, q, budget, false, false);
}

// First isomorphism E ≅ E' over the base, if any.
inline std::optional<FinFunctor> opfib_iso(const DiscOpfibCat& p, const DiscOpfibCat& q, Budget& budget) {
  auto found = detail::search_opfib_morphisms(p, q, budget, true, true);
  if (found.empty()) return std::nullopt;
  return found.front();
}

inline std::optional<FinFunctor> opfib_iso(const DiscOpfibCat& p, const DiscOpfibCat& q) {
  Budget budget;
  return opfib_iso(p, q, budget);
}

}  // namespace tck
