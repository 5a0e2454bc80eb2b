#pragma once

// Finite-set-valued functors on a finite category, in both variances.
// Element labels are kept sorted within each set so that structural equality
// is equality of the underlying functors.

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "tck/core.hpp"
#include "tck/fincat.hpp"
#include "tck/functor.hpp"

namespace tck {

enum class Variance { covariant, contravariant };

template <Variance V>
struct SetFunctor {
  CatRef base;
  std::vector<std::vector<std::string>> elements;  // per object
  std::vector<std::vector<int>> action;            // per arrow, indices into `elements`

  // The object whose set the action of f reads from / writes to.
  Obj from(Arr f) const { return V == Variance::covariant ? base->dom(f) : base->cod(f); }
  Obj to(Arr f) const { return V == Variance::covariant ? base->cod(f) : base->dom(f); }

  std::size_t size(Obj x) const { return elements[static_cast<std::size_t>(x)].size(); }
  int apply(Arr f, int i) const { return action[static_cast<std::size_t>(f)][static_cast<std::size_t>(i)]; }
  const std::string& label(Obj x, int i) const { return elements[static_cast<std::size_t>(x)][static_cast<std::size_t>(i)]; }

  int find(Obj x, std::string_view label) const {
    const auto& e = elements[static_cast<std::size_t>(x)];
    auto it = std::lower_bound(e.begin(), e.end(), label);
    if (it == e.end() || *it != label) return none;
    return static_cast<int>(it - e.begin());
  }

  bool operator==(const SetFunctor& o) const {
    return elements == o.elements && action == o.action && shared_equal(base, o.base);
  }
};

using SetPresheaf = SetFunctor<Variance::contravariant>;
using FinSetFunctor = SetFunctor<Variance::covariant>;

template <Variance V>
std::optional<std::string> set_functor_defect(const SetFunctor<V>& Z) {
  const FinCat& C = *Z.base;
  if (Z.elements.size() != C.object_count() || Z.action.size() != C.arrow_count()) return "table sizes do not match the base";
  for (std::size_t x = 0; x < C.object_count(); ++x) {
    const auto& e = Z.elements[x];
    for (std::size_t i = 1; i < e.size(); ++i)
      if (e[i - 1] >= e[i]) return cat("labels at '", C.object_name(static_cast<Obj>(x)), "' are not sorted and distinct");
  }
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    const auto& act = Z.action[f];
    if (act.size() != Z.size(Z.from(fa))) return cat("action of '", C.arrow_name(fa), "' has the wrong domain size");
    for (int v : act)
      if (v < 0 || static_cast<std::size_t>(v) >= Z.size(Z.to(fa))) return cat("action of '", C.arrow_name(fa), "' leaves its codomain");
  }
  for (std::size_t x = 0; x < C.object_count(); ++x) {
    const Arr id = C.identity(static_cast<Obj>(x));
    for (std::size_t i = 0; i < Z.size(static_cast<Obj>(x)); ++i)
      if (Z.apply(id, static_cast<int>(i)) != static_cast<int>(i))
        return cat("identity of '", C.object_name(static_cast<Obj>(x)), "' acts non-trivially");
  }
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    for (Arr g : C.arrows_from(C.cod(fa))) {
      const Arr gf = C.compose(g, fa);
      // covariant: Z(g∘f) = Z(g)Z(f); contravariant: Z(g∘f) = Z(f)Z(g)
      const Arr first = V == Variance::covariant ? fa : g;
      const Arr second = V == Variance::covariant ? g : fa;
      for (std::size_t i = 0; i < Z.size(Z.from(gf)); ++i) {
        if (Z.apply(gf, static_cast<int>(i)) != Z.apply(second, Z.apply(first, static_cast<int>(i))))
          return cat("composite ", C.arrow_name(g), " o ", C.arrow_name(fa), " not preserved");
      }
    }
  }
  return std::nullopt;
}

template <Variance V>
void check_set_functor(const SetFunctor<V>& Z) {
  if (auto d = set_functor_defect(Z)) fail(ErrorKind::InvariantViolation, "not a set-valued functor: ", *d);
}

// Sorts labels, re-indexes the action accordingly and validates.
template <Variance V>
SetFunctor<V> make_set_functor(CatRef base, std::vector<std::vector<std::string>> elements,
                               std::vector<std::vector<int>> action) {
  const FinCat& C = *base;
  if (elements.size() != C.object_count() || action.size() != C.arrow_count())
    fail(ErrorKind::InvariantViolation, "set-valued functor tables do not match the base");
  std::vector<std::vector<int>> rank(elements.size());
  for (std::size_t x = 0; x < elements.size(); ++x) {
    auto& e = elements[x];
    std::vector<int> order(e.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return e[static_cast<std::size_t>(a)] < e[static_cast<std::size_t>(b)]; });
    rank[x].assign(e.size(), 0);
    std::vector<std::string> sorted;
    for (std::size_t i = 0; i < order.size(); ++i) {
      rank[x][static_cast<std::size_t>(order[i])] = static_cast<int>(i);
      sorted.push_back(e[static_cast<std::size_t>(order[i])]);
    }
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i] == sorted[i - 1]) fail(ErrorKind::InvariantViolation, "duplicate element '", sorted[i], "' at '", C.object_name(static_cast<Obj>(x)), "'");
    e = std::move(sorted);
  }
  SetFunctor<V> Z{std::move(base), std::move(elements), {}};
  Z.action.resize(action.size());
  for (std::size_t f = 0; f < action.size(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    const auto& src_rank = rank[static_cast<std::size_t>(Z.from(fa))];
    const auto& dst_rank = rank[static_cast<std::size_t>(Z.to(fa))];
    if (action[f].size() != src_rank.size())
      fail(ErrorKind::InvariantViolation, "action of '", C.arrow_name(fa), "' has the wrong domain size");
    Z.action[f].assign(src_rank.size(), 0);
    for (std::size_t i = 0; i < src_rank.size(); ++i) {
      const int v = action[f][i];
      if (v < 0 || static_cast<std::size_t>(v) >= dst_rank.size())
        fail(ErrorKind::InvariantViolation, "action of '", C.arrow_name(fa), "' leaves its codomain");
      Z.action[f][static_cast<std::size_t>(src_rank[i])] = dst_rank[static_cast<std::size_t>(v)];
    }
  }
  check_set_functor(Z);
  return Z;
}

// Constant functor; with the single label "*" this is the terminal Δ1.
template <Variance V>
SetFunctor<V> constant_set_functor(const CatRef& base, std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  std::vector<int> id(labels.size());
  std::iota(id.begin(), id.end(), 0);
  return SetFunctor<V>{base, std::vector<std::vector<std::string>>(base->object_count(), labels),
                       std::vector<std::vector<int>>(base->arrow_count(), id)};
}

template <Variance V>
SetFunctor<V> terminal_set_functor(const CatRef& base) {
  return constant_set_functor<V>(base, {"*"});
}

// Z ∘ K for a functor K: D → base (Z ∘ K^op in the contravariant case).
template <Variance V>
SetFunctor<V> precompose(const SetFunctor<V>& Z, const FinFunctor& K) {
  SetFunctor<V> R{K.source, {}, {}};
  for (Obj x : K.on_objects) R.elements.push_back(Z.elements[static_cast<std::size_t>(x)]);
  for (Arr f : K.on_arrows) R.action.push_back(Z.action[static_cast<std::size_t>(f)]);
  return R;
}

// Hom(-, c) with elements labelled by arrow names.
inline SetPresheaf hom_presheaf(const CatRef& C, Obj c) {
  std::vector<std::vector<std::string>> elements(C->object_count());
  std::vector<std::vector<int>> action(C->arrow_count());
  std::vector<std::vector<Arr>> homs(C->object_count());
  for (std::size_t d = 0; d < C->object_count(); ++d) {
    homs[d] = C->hom(static_cast<Obj>(d), c);
    for (Arr f : homs[d]) elements[d].push_back(C->arrow_name(f));
  }
  for (std::size_t g = 0; g < C->arrow_count(); ++g) {
    const Arr ga = static_cast<Arr>(g);
    const auto& src = homs[static_cast<std::size_t>(C->cod(ga))];
    const auto& dst = homs[static_cast<std::size_t>(C->dom(ga))];
    for (Arr f : src) {
      const Arr fg = C->compose(f, ga);
      action[g].push_back(static_cast<int>(std::find(dst.begin(), dst.end(), fg) - dst.begin()));
    }
  }
  return make_set_functor<Variance::contravariant>(C, std::move(elements), std::move(action));
}

template <Variance V>
struct SetNat {
  SetFunctor<V> source;
  SetFunctor<V> target;
  std::vector<std::vector<int>> components;

  int operator()(Obj x, int i) const { return components[static_cast<std::size_t>(x)][static_cast<std::size_t>(i)]; }
  bool operator==(const SetNat&) const = default;
};

using PresheafNat = SetNat<Variance::contravariant>;
using CopresheafNat = SetNat<Variance::covariant>;

template <Variance V>
std::optional<std::string> set_nat_defect(const SetNat<V>& t) {
  const FinCat& C = *t.source.base;
  if (t.components.size() != C.object_count()) return "component table has wrong size";
  for (std::size_t x = 0; x < C.object_count(); ++x) {
    const auto& c = t.components[x];
    if (c.size() != t.source.size(static_cast<Obj>(x))) return cat("component at '", C.object_name(static_cast<Obj>(x)), "' has wrong domain");
    for (int v : c)
      if (v < 0 || static_cast<std::size_t>(v) >= t.target.size(static_cast<Obj>(x)))
        return cat("component at '", C.object_name(static_cast<Obj>(x)), "' leaves its codomain");
  }
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    const Obj a = t.source.from(fa), b = t.source.to(fa);
    for (std::size_t i = 0; i < t.source.size(a); ++i) {
      if (t.target.apply(fa, t(a, static_cast<int>(i))) != t(b, t.source.apply(fa, static_cast<int>(i))))
        return cat("naturality square fails at '", C.arrow_name(fa), "'");
    }
  }
  return std::nullopt;
}

template <Variance V>
void check_set_nat(const SetNat<V>& t) {
  if (auto d = set_nat_defect(t)) fail(ErrorKind::InvariantViolation, "not natural: ", *d);
}

template <Variance V>
SetNat<V> identity_set_nat(const SetFunctor<V>& Z) {
  SetNat<V> t{Z, Z, {}};
  for (const auto& e : Z.elements) {
    std::vector<int> id(e.size());
    std::iota(id.begin(), id.end(), 0);
    t.components.push_back(std::move(id));
  }
  return t;
}

// s ∘ t
template <Variance V>
SetNat<V> vertical(const SetNat<V>& s, const SetNat<V>& t) {
  SetNat<V> r{t.source, s.target, {}};
  for (std::size_t x = 0; x < t.components.size(); ++x) {
    std::vector<int> c;
    for (int v : t.components[x]) c.push_back(s.components[x][static_cast<std::size_t>(v)]);
    r.components.push_back(std::move(c));
  }
  return r;
}

template <Variance V>
bool is_set_iso(const SetNat<V>& t) {
  for (std::size_t x = 0; x < t.components.size(); ++x) {
    const auto& c = t.components[x];
    if (c.size() != t.target.elements[x].size()) return false;
    std::vector<bool> hit(c.size(), false);
    for (int v : c) {
      if (hit[static_cast<std::size_t>(v)]) return false;
      hit[static_cast<std::size_t>(v)] = true;
    }
  }
  return true;
}

template <Variance V>
SetNat<V> inverse(const SetNat<V>& t) {
  SetNat<V> r{t.target, t.source, {}};
  for (const auto& c : t.components) {
    std::vector<int> inv(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) inv[static_cast<std::size_t>(c[i])] = static_cast<int>(i);
    r.components.push_back(std::move(inv));
  }
  return r;
}

// Whiskering a natural transformation along K: D → base.
template <Variance V>
SetNat<V> precompose(const SetNat<V>& t, const FinFunctor& K) {
  SetNat<V> r{precompose(t.source, K), precompose(t.target, K), {}};
  for (Obj x : K.on_objects) r.components.push_back(t.components[static_cast<std::size_t>(x)]);
  return r;
}

// All functions {0..n-1} → {0..m-1}, lexicographic.
inline std::vector<std::vector<int>> all_functions(std::size_t n, std::size_t m, Budget& budget) {
  std::vector<std::vector<int>> out;
  std::vector<int> f(n, 0);
  if (n > 0 && m == 0) return out;
  while (true) {
    budget.spend();
    out.push_back(f);
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (static_cast<std::size_t>(++f[i]) < m) break;
      f[i] = 0;
      if (i == 0) return out;
    }
    if (n == 0) return out;
  }
}

inline std::vector<std::vector<int>> all_bijections(std::size_t n, std::size_t m, Budget& budget) {
  std::vector<std::vector<int>> out;
  if (n != m) return out;
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    budget.spend();
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

namespace detail {

// Bijective components one element at a time, so that injectivity and
// naturality prune before whole permutations are built. Results come out in
// the same lexicographic order as the object-by-object search.
template <Variance V>
std::vector<SetNat<V>> search_set_isos(const SetFunctor<V>& Z, const SetFunctor<V>& W, Budget& budget, bool first_only) {
  const FinCat& C = *Z.base;
  std::vector<SetNat<V>> out;
  std::vector<std::size_t> offset(C.object_count() + 1, 0);
  for (std::size_t x = 0; x < C.object_count(); ++x) {
    if (Z.size(static_cast<Obj>(x)) != W.size(static_cast<Obj>(x))) return out;
    offset[x + 1] = offset[x] + Z.size(static_cast<Obj>(x));
  }
  std::vector<Obj> owner(offset.back());
  for (std::size_t x = 0; x < C.object_count(); ++x)
    for (std::size_t k = offset[x]; k < offset[x + 1]; ++k) owner[k] = static_cast<Obj>(x);
  auto slot = [&](Obj x, int i) { return offset[static_cast<std::size_t>(x)] + static_cast<std::size_t>(i); };
  depth_first<int>(
      offset.back(),
      [&](std::size_t k, const std::vector<int>& partial) {
        const std::size_t x = static_cast<std::size_t>(owner[k]);
        std::vector<int> opts;
        for (int v = 0; v < static_cast<int>(W.size(static_cast<Obj>(x))); ++v)
          if (std::find(partial.begin() + static_cast<std::ptrdiff_t>(offset[x]), partial.end(), v) == partial.end()) opts.push_back(v);
        return opts;
      },
      [&](std::size_t k, const std::vector<int>& partial) {
        const Obj x = owner[k];
        const int i = static_cast<int>(k - offset[static_cast<std::size_t>(x)]);
        for (std::size_t f = 0; f < C.arrow_count(); ++f) {
          const Arr fa = static_cast<Arr>(f);
          if (Z.from(fa) == x) {
            const std::size_t t = slot(Z.to(fa), Z.apply(fa, i));
            if (t <= k && W.apply(fa, partial[k]) != partial[t]) return false;
          }
          if (Z.to(fa) == x)
            for (int j = 0; j < static_cast<int>(Z.size(Z.from(fa))); ++j) {
              const std::size_t s = slot(Z.from(fa), j);
              if (s < k && Z.apply(fa, j) == i && W.apply(fa, partial[s]) != partial[k]) return false;
            }
        }
        return true;
      },
      [&](const std::vector<int>& flat) {
        std::vector<std::vector<int>> comp(C.object_count());
        for (std::size_t x = 0; x < C.object_count(); ++x)
          comp[x].assign(flat.begin() + static_cast<std::ptrdiff_t>(offset[x]), flat.begin() + static_cast<std::ptrdiff_t>(offset[x + 1]));
        out.push_back(SetNat<V>{Z, W, std::move(comp)});
        return !first_only;
      },
      budget);
  return out;
}

template <Variance V>
std::vector<SetNat<V>> search_set_nats(const SetFunctor<V>& Z, const SetFunctor<V>& W, Budget& budget, bool bijective,
                                       bool first_only) {
  if (bijective) return search_set_isos(Z, W, budget, first_only);
  const FinCat& C = *Z.base;
  std::vector<std::vector<Arr>> checks(C.object_count());
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    checks[static_cast<std::size_t>(std::max(C.dom(fa), C.cod(fa)))].push_back(fa);
  }
  std::vector<SetNat<V>> out;
  depth_first<std::vector<int>>(
      C.object_count(),
      [&](std::size_t x, const std::vector<std::vector<int>>&) {
        return bijective ? all_bijections(Z.size(static_cast<Obj>(x)), W.size(static_cast<Obj>(x)), budget)
                         : all_functions(Z.size(static_cast<Obj>(x)), W.size(static_cast<Obj>(x)), budget);
      },
      [&](std::size_t x, const std::vector<std::vector<int>>& comp) {
        for (Arr f : checks[x]) {
          const Obj a = Z.from(f), b = Z.to(f);
          const auto& ca = comp[static_cast<std::size_t>(a)];
          const auto& cb = comp[static_cast<std::size_t>(b)];
          for (std::size_t i = 0; i < ca.size(); ++i)
            if (W.apply(f, ca[i]) != cb[static_cast<std::size_t>(Z.apply(f, static_cast<int>(i)))]) return false;
        }
        return true;
      },
      [&](const std::vector<std::vector<int>>& comp) {
        out.push_back(SetNat<V>{Z, W, comp});
        return !first_only;
      },
      budget);
  return out;
}

}  // namespace detail

template <Variance V>
std::vector<SetNat<V>> enumerate_set_nats(const SetFunctor<V>& Z, const SetFunctor<V>& W, Budget& budget) {
  return detail::search_set_nats(Z, W, budget, false, false);
}

template <Variance V>
std::vector<SetNat<V>> enumerate_set_nats(const SetFunctor<V>& Z, const SetFunctor<V>& W) {
  Budget budget;
  return enumerate_set_nats(Z, W, budget);
}

template <Variance V>
std::optional<SetNat<V>> set_natural_iso(const SetFunctor<V>& Z, const SetFunctor<V>& W, Budget& budget) {
  auto found = detail::search_set_nats(Z, W, budget, true, true);
  if (found.empty()) return std::nullopt;
  return found.front();
}

template <Variance V>
std::optional<SetNat<V>> set_natural_iso(const SetFunctor<V>& Z, const SetFunctor<V>& W) {
  Budget budget;
  return set_natural_iso(Z, W, budget);
}

// Every set-valued functor on `base` whose sets have at most `max_size`
// elements, labelled "0", "1", ...; sizes vary lexicographically per object.
template <Variance V>
std::vector<SetFunctor<V>> enumerate_set_functors(const CatRef& base, std::size_t max_size, Budget& budget) {
  const FinCat& C = *base;
  std::vector<SetFunctor<V>> out;
  std::vector<std::size_t> size_options(max_size + 1);
  std::iota(size_options.begin(), size_options.end(), 0);
  depth_first<std::size_t>(
      C.object_count(), [&](std::size_t, const std::vector<std::size_t>&) { return size_options; },
      [](std::size_t, const std::vector<std::size_t>&) { return true; },
      [&](const std::vector<std::size_t>& sz) {
        std::vector<std::vector<std::string>> elements(C.object_count());
        for (std::size_t x = 0; x < sz.size(); ++x)
          for (std::size_t i = 0; i < sz[x]; ++i) elements[x].push_back(std::to_string(i));
        SetFunctor<V> proto{base, elements, std::vector<std::vector<int>>(C.arrow_count())};
        // arrow actions; identities forced, functoriality checked when the
        // last of f, g, g∘f is assigned
        std::vector<std::vector<std::pair<Arr, Arr>>> checks(C.arrow_count());
        for (std::size_t f = 0; f < C.arrow_count(); ++f)
          for (Arr g : C.arrows_from(C.cod(static_cast<Arr>(f)))) {
            const Arr h = C.compose(g, static_cast<Arr>(f));
            checks[std::max({static_cast<std::size_t>(g), f, static_cast<std::size_t>(h)})].push_back({g, static_cast<Arr>(f)});
          }
        depth_first<std::vector<int>>(
            C.arrow_count(),
            [&](std::size_t f, const std::vector<std::vector<int>>&) -> std::vector<std::vector<int>> {
              const Arr fa = static_cast<Arr>(f);
              const std::size_t n = sz[static_cast<std::size_t>(proto.from(fa))];
              if (C.is_identity(fa)) {
                std::vector<int> id(n);
                std::iota(id.begin(), id.end(), 0);
                return {id};
              }
              return all_functions(n, sz[static_cast<std::size_t>(proto.to(fa))], budget);
            },
            [&](std::size_t f, const std::vector<std::vector<int>>& act) {
              for (auto [g, h] : checks[f]) {
                const Arr gh = C.compose(g, h);
                const Arr first = V == Variance::covariant ? h : g;
                const Arr second = V == Variance::covariant ? g : h;
                const auto& composite = act[static_cast<std::size_t>(gh)];
                for (std::size_t i = 0; i < composite.size(); ++i)
                  if (composite[i] != act[static_cast<std::size_t>(second)][static_cast<std::size_t>(act[static_cast<std::size_t>(first)][i])])
                    return false;
              }
              return true;
            },
            [&](const std::vector<std::vector<int>>& act) {
              SetFunctor<V> Z = proto;
              Z.action = act;
              out.push_back(std::move(Z));
              return true;
            },
            budget);
        return true;
      },
      budget);
  return out;
}

}  // namespace tck
