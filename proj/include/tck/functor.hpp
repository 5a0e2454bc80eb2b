#pragma once

// Functors and natural transformations between finite categories, together
// with the brute-force enumerators used as oracles throughout the library.

#include <optional>
#include <string>
#include <vector>

#include "tck/core.hpp"
#include "tck/fincat.hpp"

namespace tck {

struct FinFunctor {
  CatRef source;
  CatRef target;
  std::vector<Obj> on_objects;
  std::vector<Arr> on_arrows;

  Obj operator()(Obj x) const { return on_objects[static_cast<std::size_t>(x)]; }
  Arr arrow(Arr f) const { return on_arrows[static_cast<std::size_t>(f)]; }

  bool operator==(const FinFunctor& o) const {
    return on_objects == o.on_objects && on_arrows == o.on_arrows && shared_equal(source, o.source) &&
           shared_equal(target, o.target);
  }
};

// First violated functor law, if any.
inline std::optional<std::string> functor_defect(const FinFunctor& F) {
  const FinCat& A = *F.source;
  const FinCat& B = *F.target;
  if (F.on_objects.size() != A.object_count() || F.on_arrows.size() != A.arrow_count()) return "table sizes do not match the source";
  for (Obj y : F.on_objects)
    if (y < 0 || static_cast<std::size_t>(y) >= B.object_count()) return "object image out of range";
  for (Arr g : F.on_arrows)
    if (g < 0 || static_cast<std::size_t>(g) >= B.arrow_count()) return "arrow image out of range";
  for (std::size_t x = 0; x < A.object_count(); ++x) {
    if (F.arrow(A.identity(static_cast<Obj>(x))) != B.identity(F(static_cast<Obj>(x))))
      return cat("identity of '", A.object_name(static_cast<Obj>(x)), "' not preserved");
  }
  for (std::size_t f = 0; f < A.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    if (B.dom(F.arrow(fa)) != F(A.dom(fa)) || B.cod(F.arrow(fa)) != F(A.cod(fa)))
      return cat("arrow '", A.arrow_name(fa), "' sent to an arrow with wrong endpoints");
  }
  for (std::size_t f = 0; f < A.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    for (Arr g : A.arrows_from(A.cod(fa))) {
      if (F.arrow(A.compose(g, fa)) != B.compose(F.arrow(g), F.arrow(fa)))
        return cat("composite ", A.arrow_name(g), " o ", A.arrow_name(fa), " not preserved");
    }
  }
  return std::nullopt;
}

inline void check_functor(const FinFunctor& F) {
  if (auto d = functor_defect(F)) fail(ErrorKind::InvariantViolation, "not a functor: ", *d);
}

inline FinFunctor identity_functor(const CatRef& C) {
  FinFunctor F{C, C, {}, {}};
  for (std::size_t x = 0; x < C->object_count(); ++x) F.on_objects.push_back(static_cast<Obj>(x));
  for (std::size_t f = 0; f < C->arrow_count(); ++f) F.on_arrows.push_back(static_cast<Arr>(f));
  return F;
}

inline bool is_identity_functor(const FinFunctor& F) {
  return shared_equal(F.source, F.target) && F == identity_functor(F.source);
}

// G ∘ F
inline FinFunctor compose(const FinFunctor& G, const FinFunctor& F) {
  FinFunctor H{F.source, G.target, {}, {}};
  for (Obj x : F.on_objects) H.on_objects.push_back(G(x));
  for (Arr f : F.on_arrows) H.on_arrows.push_back(G.arrow(f));
  return H;
}

inline FinFunctor constant_functor(const CatRef& A, const CatRef& B, Obj b) {
  FinFunctor F{A, B, std::vector<Obj>(A->object_count(), b), std::vector<Arr>(A->arrow_count(), B->identity(b))};
  return F;
}

inline FinFunctor functor_from_names(const CatRef& A, const CatRef& B,
                                     const std::vector<std::pair<std::string, std::string>>& objects,
                                     const std::vector<std::pair<std::string, std::string>>& arrows) {
  FinFunctor F{A, B, std::vector<Obj>(A->object_count(), none), std::vector<Arr>(A->arrow_count(), none)};
  for (const auto& [x, y] : objects) F.on_objects[static_cast<std::size_t>(A->object(x))] = B->object(y);
  for (const auto& [f, g] : arrows) F.on_arrows[static_cast<std::size_t>(A->arrow(f))] = B->arrow(g);
  for (std::size_t x = 0; x < A->object_count(); ++x) {
    if (F.on_objects[x] == none) fail(ErrorKind::DanglingReference, "functor leaves object '", A->object_name(static_cast<Obj>(x)), "' unmapped");
    const Arr id = A->identity(static_cast<Obj>(x));
    if (F.on_arrows[static_cast<std::size_t>(id)] == none) F.on_arrows[static_cast<std::size_t>(id)] = B->identity(F.on_objects[x]);
  }
  for (std::size_t f = 0; f < A->arrow_count(); ++f)
    if (F.on_arrows[f] == none) fail(ErrorKind::DanglingReference, "functor leaves arrow '", A->arrow_name(static_cast<Arr>(f)), "' unmapped");
  check_functor(F);
  return F;
}

struct NatTransform {
  FinFunctor source;
  FinFunctor target;
  std::vector<Arr> components;

  Arr operator[](Obj x) const { return components[static_cast<std::size_t>(x)]; }
  bool operator==(const NatTransform&) const = default;
};

inline std::optional<std::string> nat_defect(const NatTransform& t) {
  const FinCat& A = *t.source.source;
  const FinCat& B = *t.source.target;
  if (t.components.size() != A.object_count()) return "component table has wrong size";
  for (std::size_t x = 0; x < A.object_count(); ++x) {
    const Arr c = t.components[x];
    if (c < 0 || static_cast<std::size_t>(c) >= B.arrow_count() || B.dom(c) != t.source(static_cast<Obj>(x)) ||
        B.cod(c) != t.target(static_cast<Obj>(x)))
      return cat("component at '", A.object_name(static_cast<Obj>(x)), "' has wrong endpoints");
  }
  for (std::size_t f = 0; f < A.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    if (B.compose(t.target.arrow(fa), t[A.dom(fa)]) != B.compose(t[A.cod(fa)], t.source.arrow(fa)))
      return cat("naturality square fails at '", A.arrow_name(fa), "'");
  }
  return std::nullopt;
}

inline void check_nat(const NatTransform& t) {
  if (auto d = nat_defect(t)) fail(ErrorKind::InvariantViolation, "not natural: ", *d);
}

inline NatTransform identity_nat(const FinFunctor& F) {
  NatTransform t{F, F, {}};
  for (Obj y : F.on_objects) t.components.push_back(F.target->identity(y));
  return t;
}

// s ∘ t (vertical)
inline NatTransform vertical(const NatTransform& s, const NatTransform& t) {
  NatTransform r{t.source, s.target, {}};
  for (std::size_t x = 0; x < t.components.size(); ++x) r.components.push_back(t.source.target->compose(s.components[x], t.components[x]));
  return r;
}

inline bool is_natural_iso(const NatTransform& t) {
  for (Arr c : t.components)
    if (!t.source.target->is_iso(c)) return false;
  return true;
}

// All functors A → B in lexicographic order of their object and arrow images.
inline std::vector<FinFunctor> enumerate_functors(const CatRef& A, const CatRef& B, Budget& budget) {
  const FinCat& a = *A;
  const FinCat& b = *B;
  const std::size_t n = a.object_count();
  const std::size_t m = a.arrow_count();
  // composites (g, f) to check once the last of g, f, g∘f is assigned
  std::vector<std::vector<std::pair<Arr, Arr>>> checks(m);
  for (std::size_t f = 0; f < m; ++f) {
    for (Arr g : a.arrows_from(a.cod(static_cast<Arr>(f)))) {
      const Arr h = a.compose(g, static_cast<Arr>(f));
      const auto last = std::max({static_cast<std::size_t>(g), f, static_cast<std::size_t>(h)});
      checks[last].push_back({g, static_cast<Arr>(f)});
    }
  }
  std::vector<FinFunctor> out;
  std::vector<Obj> objects;
  std::vector<Obj> all_objects(b.object_count());
  for (std::size_t y = 0; y < b.object_count(); ++y) all_objects[y] = static_cast<Obj>(y);
  depth_first<Obj>(
      n, [&](std::size_t, const std::vector<Obj>&) { return all_objects; },
      [](std::size_t, const std::vector<Obj>&) { return true; },
      [&](const std::vector<Obj>& obj_map) {
        depth_first<Arr>(
            m,
            [&](std::size_t f, const std::vector<Arr>&) -> std::vector<Arr> {
              const Arr fa = static_cast<Arr>(f);
              if (a.is_identity(fa)) return {b.identity(obj_map[static_cast<std::size_t>(a.dom(fa))])};
              return b.hom(obj_map[static_cast<std::size_t>(a.dom(fa))], obj_map[static_cast<std::size_t>(a.cod(fa))]);
            },
            [&](std::size_t f, const std::vector<Arr>& arr_map) {
              for (auto [g, h] : checks[f]) {
                const Arr gh = a.compose(g, h);
                if (arr_map[static_cast<std::size_t>(gh)] !=
                    b.compose(arr_map[static_cast<std::size_t>(g)], arr_map[static_cast<std::size_t>(h)]))
                  return false;
              }
              return true;
            },
            [&](const std::vector<Arr>& arr_map) {
              out.push_back(FinFunctor{A, B, obj_map, arr_map});
              return true;
            },
            budget);
        return true;
      },
      budget);
  return out;
}

inline std::vector<FinFunctor> enumerate_functors(const CatRef& A, const CatRef& B) {
  Budget budget;
  return enumerate_functors(A, B, budget);
}

namespace detail {

template <typename Filter>
std::vector<NatTransform> search_nats(const FinFunctor& F, const FinFunctor& G, Budget& budget, Filter&& keep,
                                      bool first_only) {
  const FinCat& A = *F.source;
  const FinCat& B = *F.target;
  // naturality squares checked once both endpoints are assigned
  std::vector<std::vector<Arr>> checks(A.object_count());
  for (std::size_t f = 0; f < A.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    checks[static_cast<std::size_t>(std::max(A.dom(fa), A.cod(fa)))].push_back(fa);
  }
  std::vector<NatTransform> out;
  depth_first<Arr>(
      A.object_count(),
      [&](std::size_t x, const std::vector<Arr>&) {
        std::vector<Arr> c;
        for (Arr h : B.hom(F(static_cast<Obj>(x)), G(static_cast<Obj>(x))))
          if (keep(h)) c.push_back(h);
        return c;
      },
      [&](std::size_t x, const std::vector<Arr>& comp) {
        for (Arr f : checks[x]) {
          const Arr lhs = B.compose(G.arrow(f), comp[static_cast<std::size_t>(A.dom(f))]);
          const Arr rhs = B.compose(comp[static_cast<std::size_t>(A.cod(f))], F.arrow(f));
          if (lhs != rhs) return false;
        }
        return true;
      },
      [&](const std::vector<Arr>& comp) {
        out.push_back(NatTransform{F, G, comp});
        return !first_only;
      },
      budget);
  return out;
}

}  // namespace detail

inline std::vector<NatTransform> enumerate_nats(const FinFunctor& F, const FinFunctor& G, Budget& budget) {
  return detail::search_nats(F, G, budget, [](Arr) { return true; }, false);
}

inline std::vector<NatTransform> enumerate_nats(const FinFunctor& F, const FinFunctor& G) {
  Budget budget;
  return enumerate_nats(F, G, budget);
}

inline std::optional<NatTransform> natural_iso(const FinFunctor& F, const FinFunctor& G, Budget& budget) {
  const FinCat& B = *F.target;
  auto found = detail::search_nats(F, G, budget, [&](Arr h) { return B.is_iso(h); }, true);
  if (found.empty()) return std::nullopt;
  return found.front();
}

inline std::optional<NatTransform> natural_iso(const FinFunctor& F, const FinFunctor& G) {
  Budget budget;
  return natural_iso(F, G, budget);
}

}  // namespace tck
