#pragma once

// The prestack classifier. A morphism F → Ω̃ assigns to each object X of F(c)
// a presheaf on C/c and to each arrow of F(c) a natural transformation; it is
// never materialized as a category. classify builds the discrete opfibration
// from the fibre formula Z(id_c), characteristic recovers the map from the
// global fibres of an opfibration, and j_forward / j_inverse are the indexed
// Grothendieck construction over a representable.

#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "tck/cat2.hpp"
#include "tck/core.hpp"
#include "tck/prestack.hpp"
#include "tck/setfunctor.hpp"
#include "tck/slice.hpp"

namespace tck {

struct MapToOmega {
  SlicesRef slices;
  PresheafRef source;
  std::vector<std::vector<SetPresheaf>> object_part;  // [c][X], on C/c
  std::vector<std::vector<PresheafNat>> arrow_part;   // [c][ν]

  const CatRef& site() const { return slices->site; }
  const SetPresheaf& at(Obj c, Obj X) const {
    return object_part[static_cast<std::size_t>(c)][static_cast<std::size_t>(X)];
  }
  const PresheafNat& on(Obj c, Arr nu) const { return arrow_part[static_cast<std::size_t>(c)][static_cast<std::size_t>(nu)]; }
  // Z_{c,X}(id_c)
  std::size_t fibre_size(Obj c, Obj X) const { return at(c, X).size(slices->at(c).terminal()); }

  bool operator==(const MapToOmega& o) const {
    return shared_equal(source, o.source) && object_part == o.object_part && arrow_part == o.arrow_part;
  }
};

inline std::optional<std::string> map_to_omega_defect(const MapToOmega& z) {
  const CatPresheaf& F = *z.source;
  const FinCat& C = *F.site;
  if (!shared_equal(z.slices->site, F.site)) return "slices and source live over different sites";
  if (z.object_part.size() != C.object_count() || z.arrow_part.size() != C.object_count()) return "tables do not match the site";
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const Obj co = static_cast<Obj>(c);
    const FinCat& Fc = F.at(co);
    const std::string where = cat(" at '", C.object_name(co), "'");
    if (z.object_part[c].size() != Fc.object_count() || z.arrow_part[c].size() != Fc.arrow_count())
      return "tables do not match F" + where;
    for (std::size_t X = 0; X < Fc.object_count(); ++X) {
      const SetPresheaf& Z = z.object_part[c][X];
      if (!shared_equal(Z.base, z.slices->at(co).category)) return cat("value of '", Fc.object_name(static_cast<Obj>(X)), "'", where, " is not on the slice");
      if (auto d = set_functor_defect(Z)) return cat("value of '", Fc.object_name(static_cast<Obj>(X)), "'", where, ": ", *d);
    }
    for (std::size_t n = 0; n < Fc.arrow_count(); ++n) {
      const Arr nu = static_cast<Arr>(n);
      const PresheafNat& t = z.arrow_part[c][n];
      if (!(t.source == z.at(co, Fc.dom(nu))) || !(t.target == z.at(co, Fc.cod(nu))))
        return cat("arrow part of '", Fc.arrow_name(nu), "'", where, " has the wrong endpoints");
      if (auto d = set_nat_defect(t)) return cat("arrow part of '", Fc.arrow_name(nu), "'", where, ": ", *d);
      if (Fc.is_identity(nu) && !(t == identity_set_nat(t.source))) return cat("arrow part of '", Fc.arrow_name(nu), "'", where, " is not the identity");
    }
    for (std::size_t n = 0; n < Fc.arrow_count(); ++n)
      for (Arr m : Fc.arrows_from(Fc.cod(static_cast<Arr>(n)))) {
        const Arr mn = Fc.compose(m, static_cast<Arr>(n));
        if (!(z.on(co, mn) == vertical(z.on(co, m), z.on(co, static_cast<Arr>(n)))))
          return cat("arrow part does not preserve the composite '", Fc.arrow_name(mn), "'", where);
      }
  }
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    const Obj d = C.dom(fa), c = C.cod(fa);
    const FinFunctor& Ff = F.restrict(fa);
    for (std::size_t X = 0; X < F.at(c).object_count(); ++X)
      if (!(z.at(d, Ff(static_cast<Obj>(X))) == z.slices->reindex(z.at(c, static_cast<Obj>(X)), fa)))
        return cat("value of '", F.at(c).object_name(static_cast<Obj>(X)), "' does not reindex along '", C.arrow_name(fa), "'");
    for (std::size_t n = 0; n < F.at(c).arrow_count(); ++n)
      if (!(z.on(d, Ff.arrow(static_cast<Arr>(n))) == z.slices->reindex(z.on(c, static_cast<Arr>(n)), fa)))
        return cat("arrow part of '", F.at(c).arrow_name(static_cast<Arr>(n)), "' does not reindex along '", C.arrow_name(fa), "'");
  }
  return std::nullopt;
}

inline void check_map_to_omega(const MapToOmega& z) {
  if (auto d = map_to_omega_defect(z)) fail(ErrorKind::InvariantViolation, "not a morphism into the classifier: ", *d);
}

// The constant assignment at Δ1.
inline MapToOmega omega_point(const SlicesRef& slices, const PresheafRef& F) {
  MapToOmega z{slices, F, {}, {}};
  const FinCat& C = *F->site;
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const Obj co = static_cast<Obj>(c);
    const SetPresheaf one = terminal_set_functor<Variance::contravariant>(slices->at(co).category);
    z.object_part.emplace_back(F->at(co).object_count(), one);
    z.arrow_part.emplace_back(F->at(co).arrow_count(), identity_set_nat(one));
  }
  return z;
}

// z ∘ y for y: F' → F.
inline MapToOmega precompose(const MapToOmega& z, const TwoNat& y) {
  if (!shared_equal(y.target, z.source)) fail(ErrorKind::InvariantViolation, "precompose: codomain is not the source of the map");
  MapToOmega r{z.slices, y.source, {}, {}};
  const CatPresheaf& G = *y.source;
  for (std::size_t c = 0; c < G.values.size(); ++c) {
    const Obj co = static_cast<Obj>(c);
    r.object_part.emplace_back();
    r.arrow_part.emplace_back();
    for (std::size_t X = 0; X < G.at(co).object_count(); ++X) r.object_part[c].push_back(z.at(co, y[co](static_cast<Obj>(X))));
    for (std::size_t n = 0; n < G.at(co).arrow_count(); ++n) r.arrow_part[c].push_back(z.on(co, y[co].arrow(static_cast<Arr>(n))));
  }
  return r;
}

// Objects "(X,t)" with t ∈ Z_{c,X}(id_c), arrows "(ν,t)".
inline DiscOpfibPre classify(const MapToOmega& z) {
  const CatPresheaf& F = *z.source;
  const SliceSystem& S = *z.slices;
  const FinCat& C = *F.site;
  struct Component {
    CatRef total;
    std::vector<Obj> base_object;
    std::vector<Arr> base_arrow;
  };
  std::vector<Component> comps;
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const Obj co = static_cast<Obj>(c);
    const FinCat& Fc = F.at(co);
    const Obj top = S.at(co).terminal();
    std::vector<std::string> objects;
    std::vector<std::size_t> offset(Fc.object_count());
    for (std::size_t X = 0; X < Fc.object_count(); ++X) {
      offset[X] = objects.size();
      const SetPresheaf& Z = z.at(co, static_cast<Obj>(X));
      for (std::size_t t = 0; t < Z.size(top); ++t) objects.push_back(pair_name(Fc.object_name(static_cast<Obj>(X)), Z.label(top, static_cast<int>(t))));
    }
    std::vector<FinCat::ArrowData> arrows;
    std::vector<Arr> ids(objects.size(), none);
    std::map<std::pair<Arr, Obj>, Arr> index;  // (ν, source object) → arrow
    std::vector<std::pair<Arr, Obj>> info;
    for (std::size_t n = 0; n < Fc.arrow_count(); ++n) {
      const Arr nu = static_cast<Arr>(n);
      const std::size_t X = static_cast<std::size_t>(Fc.dom(nu));
      const std::size_t Y = static_cast<std::size_t>(Fc.cod(nu));
      const SetPresheaf& Z = z.at(co, Fc.dom(nu));
      for (std::size_t t = 0; t < Z.size(top); ++t) {
        const Obj src = static_cast<Obj>(offset[X] + t);
        const Obj dst = static_cast<Obj>(offset[Y] + static_cast<std::size_t>(z.on(co, nu)(top, static_cast<int>(t))));
        index.emplace(std::make_pair(nu, src), static_cast<Arr>(arrows.size()));
        if (Fc.is_identity(nu)) ids[static_cast<std::size_t>(src)] = static_cast<Arr>(arrows.size());
        arrows.push_back({pair_name(Fc.arrow_name(nu), Z.label(top, static_cast<int>(t))), src, dst});
        info.push_back({nu, src});
      }
    }
    std::vector<Obj> base_of_object(objects.size());
    for (std::size_t X = 0; X < Fc.object_count(); ++X)
      for (std::size_t i = offset[X]; i < (X + 1 < Fc.object_count() ? offset[X + 1] : objects.size()); ++i) base_of_object[i] = static_cast<Obj>(X);
    FinCat G = FinCat::assemble(objects, arrows, ids, [&](Arr second, Arr first) {
      return index.at({Fc.compose(info[static_cast<std::size_t>(second)].first, info[static_cast<std::size_t>(first)].first),
                       info[static_cast<std::size_t>(first)].second});
    });
    Component k{share(std::move(G)), {}, {}};
    std::map<std::string, std::size_t> obj_orig, arr_orig;
    for (std::size_t i = 0; i < objects.size(); ++i) obj_orig.emplace(objects[i], i);
    for (std::size_t i = 0; i < arrows.size(); ++i) arr_orig.emplace(arrows[i].name, i);
    for (std::size_t x = 0; x < k.total->object_count(); ++x) k.base_object.push_back(base_of_object[obj_orig.at(k.total->object_name(static_cast<Obj>(x)))]);
    for (std::size_t a = 0; a < k.total->arrow_count(); ++a) k.base_arrow.push_back(info[arr_orig.at(k.total->arrow_name(static_cast<Arr>(a)))].first);
    comps.push_back(std::move(k));
  }
  std::vector<CatRef> values;
  for (const auto& k : comps) values.push_back(k.total);
  std::vector<FinFunctor> restrictions;
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    const Obj d = C.dom(fa), c = C.cod(fa);
    const Slice& sc = S.at(c);
    const Obj top_d = S.at(d).terminal();
    const Arr along = sc.arrow_for(fa, C.identity(c));  // f@id_c : f → id_c
    const Component& from = comps[static_cast<std::size_t>(c)];
    const Component& to = comps[static_cast<std::size_t>(d)];
    const FinFunctor& Ff = F.restrict(fa);
    auto element_of = [&](Obj x) {
      // index of t inside Z_{c,X}(id_c), recovered from the label
      const Obj X = from.base_object[static_cast<std::size_t>(x)];
      const SetPresheaf& Z = z.at(c, X);
      const std::string& name = from.total->object_name(x);
      const std::string prefix = "(" + F.at(c).object_name(X) + ",";
      const std::string label = name.substr(prefix.size(), name.size() - prefix.size() - 1);
      return std::make_pair(X, Z.apply(along, Z.find(sc.terminal(), label)));
    };
    FinFunctor R{from.total, to.total, {}, {}};
    for (std::size_t x = 0; x < from.total->object_count(); ++x) {
      const auto [X, i] = element_of(static_cast<Obj>(x));
      const Obj Y = Ff(X);
      R.on_objects.push_back(to.total->object(pair_name(F.at(d).object_name(Y), z.at(d, Y).label(top_d, i))));
    }
    for (std::size_t a = 0; a < from.total->arrow_count(); ++a) {
      const Arr aa = static_cast<Arr>(a);
      const auto [X, i] = element_of(from.total->dom(aa));
      const Obj Y = Ff(X);
      R.on_arrows.push_back(to.total->arrow(pair_name(F.at(d).arrow_name(Ff.arrow(from.base_arrow[static_cast<std::size_t>(a)])),
                                                      z.at(d, Y).label(top_d, i))));
    }
    restrictions.push_back(std::move(R));
  }
  PresheafRef G = make_presheaf(F.site, std::move(values), std::move(restrictions));
  TwoNat s{G, z.source, {}};
  for (const auto& k : comps) s.components.push_back(FinFunctor{k.total, z.source->value(static_cast<Obj>(s.components.size())), k.base_object, k.base_arrow});
  return certify_dopf_pre(s);
}

namespace detail {

// A finite piece of Ω̃ through which z factors: at each c, the distinct values
// of z together with Δ1, and the natural transformations generated by the
// arrow parts and all maps out of Δ1, closed under composition.
struct OmegaImage {
  PresheafRef presheaf;
  TwoNat point;   // terminal → image, picking Δ1
  TwoNat map;     // F → image
};

inline OmegaImage omega_image(const MapToOmega& z, Budget& budget) {
  const CatPresheaf& F = *z.source;
  const SliceSystem& S = *z.slices;
  const FinCat& C = *F.site;
  struct Level {
    std::vector<SetPresheaf> objects;
    std::vector<PresheafNat> arrows;
    std::vector<std::pair<std::size_t, std::size_t>> ends;
    std::map<std::tuple<std::size_t, std::size_t, std::vector<std::vector<int>>>, std::size_t> index;
    CatRef cat;
    std::vector<Obj> obj_of;  // construction index → object of `cat`
    std::vector<Arr> arr_of;

    std::size_t object_index(const SetPresheaf& Z) {
      for (std::size_t i = 0; i < objects.size(); ++i)
        if (objects[i] == Z) return i;
      objects.push_back(Z);
      return objects.size() - 1;
    }
    std::size_t find_object(const SetPresheaf& Z) const {
      for (std::size_t i = 0; i < objects.size(); ++i)
        if (objects[i] == Z) return i;
      fail(ErrorKind::InvariantViolation, "value missing from the image");
    }
    bool add(const PresheafNat& t, std::size_t s, std::size_t e) {
      auto key = std::make_tuple(s, e, t.components);
      if (index.count(key)) return false;
      index.emplace(key, arrows.size());
      arrows.push_back(t);
      ends.push_back({s, e});
      return true;
    }
    std::size_t find_arrow(const PresheafNat& t, std::size_t s, std::size_t e) const {
      return index.at(std::make_tuple(s, e, t.components));
    }
  };
  std::vector<Level> levels(C.object_count());
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const Obj co = static_cast<Obj>(c);
    Level& L = levels[c];
    const SetPresheaf one = terminal_set_functor<Variance::contravariant>(S.at(co).category);
    L.object_index(one);
    for (std::size_t X = 0; X < F.at(co).object_count(); ++X) L.object_index(z.at(co, static_cast<Obj>(X)));
    for (std::size_t i = 0; i < L.objects.size(); ++i) {
      L.add(identity_set_nat(L.objects[i]), i, i);
      for (const auto& t : enumerate_set_nats(L.objects[0], L.objects[i], budget)) L.add(t, 0, i);
    }
    for (std::size_t n = 0; n < F.at(co).arrow_count(); ++n) {
      const Arr nu = static_cast<Arr>(n);
      L.add(z.on(co, nu), L.find_object(z.at(co, F.at(co).dom(nu))), L.find_object(z.at(co, F.at(co).cod(nu))));
    }
    for (bool grew = true; grew;) {
      grew = false;
      for (std::size_t a = 0; a < L.arrows.size(); ++a)
        for (std::size_t b = 0; b < L.arrows.size(); ++b) {
          budget.spend();
          if (L.ends[a].second != L.ends[b].first) continue;
          grew = L.add(vertical(L.arrows[b], L.arrows[a]), L.ends[a].first, L.ends[b].second) || grew;
        }
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < L.objects.size(); ++i) names.push_back(i == 0 ? "1" : cat("z", i));
    std::vector<FinCat::ArrowData> arrows;
    std::vector<Arr> ids(L.objects.size(), none);
    for (std::size_t a = 0; a < L.arrows.size(); ++a) {
      const auto [s, e] = L.ends[a];
      if (s == e && L.arrows[a] == identity_set_nat(L.objects[s])) ids[s] = static_cast<Arr>(a);
      arrows.push_back({cat("n", a), static_cast<Obj>(s), static_cast<Obj>(e)});
    }
    FinCat Oc = FinCat::assemble(names, arrows, ids, [&](Arr second, Arr first) {
      const auto s = L.ends[static_cast<std::size_t>(first)].first, e = L.ends[static_cast<std::size_t>(second)].second;
      return static_cast<Arr>(L.find_arrow(vertical(L.arrows[static_cast<std::size_t>(second)], L.arrows[static_cast<std::size_t>(first)]), s, e));
    });
    L.cat = share(std::move(Oc));
    for (const auto& n : names) L.obj_of.push_back(L.cat->object(n));
    for (const auto& a : arrows) L.arr_of.push_back(L.cat->arrow(a.name));
  }
  std::vector<CatRef> values;
  for (const auto& L : levels) values.push_back(L.cat);
  std::vector<FinFunctor> restrictions;
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    const Level& from = levels[static_cast<std::size_t>(C.cod(fa))];
    const Level& to = levels[static_cast<std::size_t>(C.dom(fa))];
    FinFunctor R{from.cat, to.cat, std::vector<Obj>(from.objects.size()), std::vector<Arr>(from.arrows.size())};
    std::vector<std::size_t> moved(from.objects.size());
    for (std::size_t i = 0; i < from.objects.size(); ++i) {
      moved[i] = to.find_object(S.reindex(from.objects[i], fa));
      R.on_objects[static_cast<std::size_t>(from.obj_of[i])] = to.obj_of[moved[i]];
    }
    for (std::size_t a = 0; a < from.arrows.size(); ++a) {
      const auto [s, e] = from.ends[a];
      R.on_arrows[static_cast<std::size_t>(from.arr_of[a])] = to.arr_of[to.find_arrow(S.reindex(from.arrows[a], fa), moved[s], moved[e])];
    }
    restrictions.push_back(std::move(R));
  }
  OmegaImage out;
  out.presheaf = make_presheaf(F.site, std::move(values), std::move(restrictions));
  PresheafRef T = terminal_presheaf(F.site);
  out.point = TwoNat{T, out.presheaf, {}};
  out.map = TwoNat{z.source, out.presheaf, {}};
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const Obj co = static_cast<Obj>(c);
    const Level& L = levels[c];
    out.point.components.push_back(FinFunctor{T->value(co), L.cat, {L.obj_of[0]}, {L.cat->identity(L.obj_of[0])}});
    FinFunctor K{F.value(co), L.cat, {}, {}};
    for (std::size_t X = 0; X < F.at(co).object_count(); ++X) K.on_objects.push_back(L.obj_of[L.find_object(z.at(co, static_cast<Obj>(X)))]);
    for (std::size_t n = 0; n < F.at(co).arrow_count(); ++n) {
      const Arr nu = static_cast<Arr>(n);
      K.on_arrows.push_back(L.arr_of[L.find_arrow(z.on(co, nu), L.find_object(z.at(co, F.at(co).dom(nu))), L.find_object(z.at(co, F.at(co).cod(nu))))]);
    }
    out.map.components.push_back(std::move(K));
  }
  check_two_nat(out.point);
  check_two_nat(out.map);
  return out;
}

}  // namespace detail

// The right leg of the comma object from the point Δ1 into z, computed inside
// a finite image of Ω̃.
inline DiscOpfibPre classify_via_comma(const MapToOmega& z, Budget& budget) {
  const detail::OmegaImage image = detail::omega_image(z, budget);
  const PresheafCone cone = pointwise_comma(image.point, image.map);
  return certify_dopf_pre(cone.right);
}

inline DiscOpfibPre classify_via_comma(const MapToOmega& z) {
  Budget budget;
  return classify_via_comma(z, budget);
}

// The normalized characteristic map: Z_{c,X}(f: d → c) is the fibre of φ_d
// over F(f)(X), restriction is G(g), and ν acts by the codomain of the lift
// of F(f)(ν).
inline MapToOmega characteristic(const SlicesRef& slices, const DiscOpfibPre& phi) {
  const CatPresheaf& F = *phi.base();
  const CatPresheaf& G = *phi.total();
  const FinCat& C = *F.site;
  MapToOmega z{slices, phi.base(), {}, {}};
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const Obj co = static_cast<Obj>(c);
    const Slice& sc = slices->at(co);
    const FinCat& Sc = *sc.category;
    const FinCat& Fc = F.at(co);
    z.object_part.emplace_back();
    z.arrow_part.emplace_back();
    // fibre of φ_d over F(f)(X), in the order of G(d)'s object names
    auto fibre = [&](Obj x, Obj X) {
      const Arr f = sc.arrow_at(x);
      return phi.fibre(C.dom(f), F.restrict(f)(X));
    };
    for (std::size_t X = 0; X < Fc.object_count(); ++X) {
      std::vector<std::vector<std::string>> elements(Sc.object_count());
      std::vector<std::vector<int>> action(Sc.arrow_count());
      for (std::size_t x = 0; x < Sc.object_count(); ++x)
        for (Obj e : fibre(static_cast<Obj>(x), static_cast<Obj>(X))) elements[x].push_back(G.at(C.dom(sc.arrow_at(static_cast<Obj>(x)))).object_name(e));
      for (std::size_t a = 0; a < Sc.arrow_count(); ++a) {
        const Arr aa = static_cast<Arr>(a);
        const Arr g = sc.dom.arrow(aa);
        const auto src = fibre(Sc.cod(aa), static_cast<Obj>(X));
        const auto dst = fibre(Sc.dom(aa), static_cast<Obj>(X));
        for (Obj e : src) action[a].push_back(static_cast<int>(std::find(dst.begin(), dst.end(), G.restrict(g)(e)) - dst.begin()));
      }
      z.object_part[c].push_back(make_set_functor<Variance::contravariant>(sc.category, std::move(elements), std::move(action)));
    }
    for (std::size_t n = 0; n < Fc.arrow_count(); ++n) {
      const Arr nu = static_cast<Arr>(n);
      const SetPresheaf& Zs = z.object_part[c][static_cast<std::size_t>(Fc.dom(nu))];
      const SetPresheaf& Zt = z.object_part[c][static_cast<std::size_t>(Fc.cod(nu))];
      PresheafNat t{Zs, Zt, {}};
      for (std::size_t x = 0; x < Sc.object_count(); ++x) {
        const Arr f = sc.arrow_at(static_cast<Obj>(x));
        const Obj d = C.dom(f);
        const DiscOpfibCat& pd = phi.at(d);
        const Arr image = F.restrict(f).arrow(nu);
        std::vector<int> comp;
        for (const auto& label : Zs.elements[x]) {
          const Obj e = G.at(d).object(label);
          comp.push_back(Zt.find(static_cast<Obj>(x), G.at(d).object_name(G.at(d).cod(pd.lift(e, image)))));
        }
        t.components.push_back(std::move(comp));
      }
      z.arrow_part[c].push_back(std::move(t));
    }
  }
  check_map_to_omega(z);
  return z;
}

struct OmegaModification {
  std::shared_ptr<const MapToOmega> source;
  std::shared_ptr<const MapToOmega> target;
  std::vector<std::vector<PresheafNat>> components;  // [c][X]

  const PresheafNat& at(Obj c, Obj X) const { return components[static_cast<std::size_t>(c)][static_cast<std::size_t>(X)]; }
  bool operator==(const OmegaModification& o) const { return components == o.components; }
};

inline std::optional<std::string> omega_modification_defect(const OmegaModification& a) {
  const MapToOmega& z = *a.source;
  const MapToOmega& w = *a.target;
  const CatPresheaf& F = *z.source;
  const FinCat& C = *F.site;
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const Obj co = static_cast<Obj>(c);
    const FinCat& Fc = F.at(co);
    for (std::size_t X = 0; X < Fc.object_count(); ++X) {
      const PresheafNat& t = a.at(co, static_cast<Obj>(X));
      if (!(t.source == z.at(co, static_cast<Obj>(X))) || !(t.target == w.at(co, static_cast<Obj>(X))))
        return cat("component at '", Fc.object_name(static_cast<Obj>(X)), "' has the wrong endpoints");
      if (auto d = set_nat_defect(t)) return *d;
    }
    for (std::size_t n = 0; n < Fc.arrow_count(); ++n) {
      const Arr nu = static_cast<Arr>(n);
      if (!(vertical(w.on(co, nu), a.at(co, Fc.dom(nu))) == vertical(a.at(co, Fc.cod(nu)), z.on(co, nu))))
        return cat("not natural in '", Fc.arrow_name(nu), "'");
    }
  }
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    for (std::size_t X = 0; X < F.at(C.cod(fa)).object_count(); ++X)
      if (!(a.at(C.dom(fa), F.restrict(fa)(static_cast<Obj>(X))) == z.slices->reindex(a.at(C.cod(fa), static_cast<Obj>(X)), fa)))
        return cat("does not reindex along '", C.arrow_name(fa), "'");
  }
  return std::nullopt;
}

namespace detail {

inline std::vector<OmegaModification> search_omega_modifications(const std::shared_ptr<const MapToOmega>& z,
                                                                 const std::shared_ptr<const MapToOmega>& w, Budget& budget,
                                                                 bool isos_only, bool first_only) {
  const CatPresheaf& F = *z->source;
  const FinCat& C = *F.site;
  if (!shared_equal(z->source, w->source)) fail(ErrorKind::InvariantViolation, "maps with different sources");
  struct Slot {
    Obj c, X;
  };
  std::vector<Slot> slots;
  std::vector<std::vector<std::size_t>> slot_of(C.object_count());
  for (std::size_t c = 0; c < C.object_count(); ++c)
    for (std::size_t X = 0; X < F.at(static_cast<Obj>(c)).object_count(); ++X) {
      slot_of[c].push_back(slots.size());
      slots.push_back({static_cast<Obj>(c), static_cast<Obj>(X)});
    }
  std::vector<std::vector<PresheafNat>> options;
  for (const Slot& s : slots) {
    auto found = detail::search_set_nats(z->at(s.c, s.X), w->at(s.c, s.X), budget, isos_only, false);
    if (found.empty()) return {};
    options.push_back(std::move(found));
  }
  // checks fire once both slots they mention are filled
  struct Check {
    bool reindex;
    Arr arrow;  // arrow of C, or arrow of F(c)
    Obj c;
    std::size_t a, b;
  };
  std::vector<std::vector<Check>> checks(slots.size());
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const FinCat& Fc = F.at(static_cast<Obj>(c));
    for (std::size_t n = 0; n < Fc.arrow_count(); ++n) {
      const Arr nu = static_cast<Arr>(n);
      const std::size_t a = slot_of[c][static_cast<std::size_t>(Fc.dom(nu))], b = slot_of[c][static_cast<std::size_t>(Fc.cod(nu))];
      checks[std::max(a, b)].push_back({false, nu, static_cast<Obj>(c), a, b});
    }
  }
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    const Obj d = C.dom(fa), c = C.cod(fa);
    for (std::size_t X = 0; X < F.at(c).object_count(); ++X) {
      const std::size_t a = slot_of[static_cast<std::size_t>(c)][X];
      const std::size_t b = slot_of[static_cast<std::size_t>(d)][static_cast<std::size_t>(F.restrict(fa)(static_cast<Obj>(X)))];
      checks[std::max(a, b)].push_back({true, fa, c, a, b});
    }
  }
  std::vector<OmegaModification> out;
  depth_first<PresheafNat>(
      slots.size(), [&](std::size_t i, const std::vector<PresheafNat>&) { return options[i]; },
      [&](std::size_t i, const std::vector<PresheafNat>& m) {
        for (const Check& k : checks[i]) {
          if (k.reindex) {
            if (!(m[k.b] == z->slices->reindex(m[k.a], k.arrow))) return false;
          } else if (!(vertical(w->on(k.c, k.arrow), m[k.a]) == vertical(m[k.b], z->on(k.c, k.arrow)))) {
            return false;
          }
        }
        return true;
      },
      [&](const std::vector<PresheafNat>& m) {
        OmegaModification a{z, w, {}};
        for (std::size_t c = 0; c < C.object_count(); ++c) {
          a.components.emplace_back();
          for (std::size_t s : slot_of[c]) a.components[c].push_back(m[s]);
        }
        out.push_back(std::move(a));
        return !first_only;
      },
      budget);
  return out;
}

}  // namespace detail

inline std::vector<OmegaModification> enumerate_omega_modifications(const std::shared_ptr<const MapToOmega>& z,
                                                                    const std::shared_ptr<const MapToOmega>& w, Budget& budget) {
  return detail::search_omega_modifications(z, w, budget, false, false);
}

inline std::optional<OmegaModification> omega_iso(const std::shared_ptr<const MapToOmega>& z, const std::shared_ptr<const MapToOmega>& w,
                                                  Budget& budget) {
  auto found = detail::search_omega_modifications(z, w, budget, true, true);
  if (found.empty()) return std::nullopt;
  return found.front();
}

inline OmegaModification identity_omega_modification(const std::shared_ptr<const MapToOmega>& z) {
  OmegaModification a{z, z, {}};
  for (const auto& row : z->object_part) {
    a.components.emplace_back();
    for (const auto& Z : row) a.components.back().push_back(identity_set_nat(Z));
  }
  return a;
}

// β ∘ α
inline OmegaModification vertical(const OmegaModification& b, const OmegaModification& a) {
  OmegaModification r{a.source, b.target, {}};
  for (std::size_t c = 0; c < a.components.size(); ++c) {
    r.components.emplace_back();
    for (std::size_t X = 0; X < a.components[c].size(); ++X) r.components[c].push_back(vertical(b.components[c][X], a.components[c][X]));
  }
  return r;
}

// The morphism classify(z) → classify(z') over F induced by α: (X,t) ↦ (X, α(t)).
inline TwoNat gamma_mod(const OmegaModification& a, const DiscOpfibPre& from, const DiscOpfibPre& to) {
  const MapToOmega& z = *a.source;
  const CatPresheaf& F = *z.source;
  const FinCat& C = *F.site;
  TwoNat h{from.total(), to.total(), {}};
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const Obj co = static_cast<Obj>(c);
    const Obj top = z.slices->at(co).terminal();
    const FinCat& Gc = from.total()->at(co);
    const FinCat& Hc = to.total()->at(co);
    const FinFunctor& p = from.s[co];
    FinFunctor K{from.total()->value(co), to.total()->value(co), {}, {}};
    auto image = [&](Obj x, const std::string& base_name) {
      const Obj X = p(x);
      const SetPresheaf& Z = z.at(co, X);
      const std::string& name = Gc.object_name(x);
      const std::string prefix = "(" + F.at(co).object_name(X) + ",";
      const int t = Z.find(top, name.substr(prefix.size(), name.size() - prefix.size() - 1));
      const PresheafNat& m = a.at(co, X);
      return pair_name(base_name, m.target.label(top, m(top, t)));
    };
    for (std::size_t x = 0; x < Gc.object_count(); ++x) K.on_objects.push_back(Hc.object(image(static_cast<Obj>(x), F.at(co).object_name(p(static_cast<Obj>(x))))));
    for (std::size_t g = 0; g < Gc.arrow_count(); ++g)
      K.on_arrows.push_back(Hc.arrow(image(Gc.dom(static_cast<Arr>(g)), F.at(co).arrow_name(p.arrow(static_cast<Arr>(g))))));
    h.components.push_back(std::move(K));
  }
  check_two_nat(h);
  return h;
}

inline TwoNat gamma_mod(const OmegaModification& a) { return gamma_mod(a, classify(*a.source), classify(*a.target)); }

struct FFReport {
  std::size_t modifications = 0;
  std::size_t morphisms = 0;
  std::optional<ErrorKind> failure;
  std::string detail;
  bool bijective() const { return !failure.has_value(); }
};

// gamma_mod as a map from modifications z ⇒ z' to morphisms of opfibrations
// classify(z) → classify(z'), checked to be a bijection.
inline FFReport ff_check(const std::shared_ptr<const MapToOmega>& z, const std::shared_ptr<const MapToOmega>& w, Budget& budget) {
  FFReport r;
  const DiscOpfibPre pz = classify(*z);
  const DiscOpfibPre pw = classify(*w);
  const auto mods = enumerate_omega_modifications(z, w, budget);
  const auto homs = fib_hom(pz, pw, budget);
  r.modifications = mods.size();
  r.morphisms = homs.size();
  std::vector<TwoNat> images;
  for (std::size_t i = 0; i < mods.size(); ++i) {
    TwoNat h = gamma_mod(mods[i], pz, pw);
    for (std::size_t j = 0; j < images.size(); ++j)
      if (images[j] == h) {
        r.failure = ErrorKind::NotInjective;
        r.detail = cat("modifications ", j, " and ", i, " have the same image");
        return r;
      }
    if (std::find(homs.begin(), homs.end(), h) == homs.end()) {
      r.failure = ErrorKind::InvariantViolation;
      r.detail = cat("image of modification ", i, " is not a morphism over F");
      return r;
    }
    images.push_back(std::move(h));
  }
  for (std::size_t j = 0; j < homs.size(); ++j)
    if (std::find(images.begin(), images.end(), homs[j]) == images.end()) {
      r.failure = ErrorKind::NotSurjective;
      r.detail = cat("morphism ", j, " of opfibrations has no preimage");
      return r;
    }
  return r;
}

inline FFReport ff_check(const std::shared_ptr<const MapToOmega>& z, const std::shared_ptr<const MapToOmega>& w) {
  Budget budget;
  return ff_check(z, w, budget);
}

// An invertible morphism classify(characteristic(φ)) ≅ φ.
inline TwoNat roundtrip_opfib(const SlicesRef& slices, const DiscOpfibPre& phi, Budget& budget) {
  auto iso = fib_iso(classify(characteristic(slices, phi)), phi, budget);
  if (!iso) fail(ErrorKind::NoIsoFound, "classify(char(φ)) is not isomorphic to φ over its base");
  return *iso;
}

// An invertible modification characteristic(classify(z)) ≅ z.
inline OmegaModification roundtrip_map(const std::shared_ptr<const MapToOmega>& z, Budget& budget) {
  auto back = std::make_shared<const MapToOmega>(characteristic(z->slices, classify(*z)));
  auto iso = omega_iso(back, z, budget);
  if (!iso) fail(ErrorKind::NoIsoFound, "char(classify(z)) is not isomorphic to z");
  return *iso;
}

// Indexed Grothendieck construction over representable(c): the component at
// d is the discrete category on pairs "(f,x)" with f: d → c and x ∈ Z(f).
inline DiscOpfibPre j_forward(const SlicesRef& slices, Obj c, const SetPresheaf& Z) {
  const CatRef& C = slices->site;
  const Slice& sc = slices->at(c);
  if (!shared_equal(Z.base, sc.category)) fail(ErrorKind::InvariantViolation, "j_forward: presheaf is not on the slice");
  check_set_functor(Z);
  PresheafRef R = representable(C, c);
  std::vector<CatRef> values;
  std::vector<std::map<std::string, std::pair<Arr, int>>> decode(C->object_count());
  for (std::size_t d = 0; d < C->object_count(); ++d) {
    std::vector<std::string> names;
    for (Arr f : C->hom(static_cast<Obj>(d), c)) {
      const Obj x = sc.object_for(f);
      for (std::size_t i = 0; i < Z.size(x); ++i) {
        names.push_back(pair_name(C->arrow_name(f), Z.label(x, static_cast<int>(i))));
        decode[d].emplace(names.back(), std::make_pair(f, static_cast<int>(i)));
      }
    }
    values.push_back(share(discrete_category(names)));
  }
  auto element = [&](Obj d, Obj e) { return decode[static_cast<std::size_t>(d)].at(values[static_cast<std::size_t>(d)]->object_name(e)); };
  std::vector<FinFunctor> restrictions;
  for (std::size_t g = 0; g < C->arrow_count(); ++g) {
    const Arr ga = static_cast<Arr>(g);
    const Obj from_obj = C->cod(ga);
    const CatRef& from = values[static_cast<std::size_t>(from_obj)];
    const CatRef& to = values[static_cast<std::size_t>(C->dom(ga))];
    FinFunctor K{from, to, {}, {}};
    for (std::size_t e = 0; e < from->object_count(); ++e) {
      const auto [f, i] = element(from_obj, static_cast<Obj>(e));
      const Arr fg = C->compose(f, ga);
      const int j = Z.apply(sc.arrow_for(ga, f), i);
      K.on_objects.push_back(to->object(pair_name(C->arrow_name(fg), Z.label(sc.object_for(fg), j))));
    }
    for (std::size_t a = 0; a < from->arrow_count(); ++a) K.on_arrows.push_back(to->identity(K(from->dom(static_cast<Arr>(a)))));
    restrictions.push_back(std::move(K));
  }
  PresheafRef H = make_presheaf(C, values, std::move(restrictions));
  TwoNat s{H, R, {}};
  for (std::size_t d = 0; d < C->object_count(); ++d) {
    const Obj dd = static_cast<Obj>(d);
    const FinCat& Hd = *values[d];
    const FinCat& Rd = R->at(dd);
    FinFunctor K{values[d], R->value(dd), {}, {}};
    for (std::size_t e = 0; e < Hd.object_count(); ++e) K.on_objects.push_back(Rd.object(C->arrow_name(element(dd, static_cast<Obj>(e)).first)));
    for (std::size_t a = 0; a < Hd.arrow_count(); ++a) K.on_arrows.push_back(Rd.identity(K(Hd.dom(static_cast<Arr>(a)))));
    s.components.push_back(std::move(K));
  }
  return certify_dopf_pre(s);
}

// (f: d → c) ↦ fibre of ψ_d over f; g@f acts by H(g).
inline SetPresheaf j_inverse(const SlicesRef& slices, Obj c, const DiscOpfibPre& psi) {
  const CatRef& C = slices->site;
  const Slice& sc = slices->at(c);
  const FinCat& Sc = *sc.category;
  const CatPresheaf& R = *psi.base();
  const CatPresheaf& H = *psi.total();
  auto fibre = [&](Obj x) {
    const Arr f = sc.arrow_at(x);
    const Obj d = C->dom(f);
    return psi.fibre(d, R.at(d).object(C->arrow_name(f)));
  };
  std::vector<std::vector<std::string>> elements(Sc.object_count());
  std::vector<std::vector<int>> action(Sc.arrow_count());
  for (std::size_t x = 0; x < Sc.object_count(); ++x)
    for (Obj e : fibre(static_cast<Obj>(x))) elements[x].push_back(H.at(C->dom(sc.arrow_at(static_cast<Obj>(x)))).object_name(e));
  for (std::size_t a = 0; a < Sc.arrow_count(); ++a) {
    const Arr aa = static_cast<Arr>(a);
    const auto src = fibre(Sc.cod(aa));
    const auto dst = fibre(Sc.dom(aa));
    for (Obj e : src) action[a].push_back(static_cast<int>(std::find(dst.begin(), dst.end(), H.restrict(sc.dom.arrow(aa))(e)) - dst.begin()));
  }
  return make_set_functor<Variance::contravariant>(sc.category, std::move(elements), std::move(action));
}

// The map representable(c) → Ω̃ named by Z: f ↦ Z reindexed along f.
inline MapToOmega map_from_slice_presheaf(const SlicesRef& slices, Obj c, const SetPresheaf& Z) {
  const CatRef& C = slices->site;
  PresheafRef R = representable(C, c);
  MapToOmega z{slices, R, {}, {}};
  for (std::size_t d = 0; d < C->object_count(); ++d) {
    const FinCat& Rd = R->at(static_cast<Obj>(d));
    z.object_part.emplace_back();
    z.arrow_part.emplace_back();
    for (std::size_t i = 0; i < Rd.object_count(); ++i) z.object_part[d].push_back(slices->reindex(Z, C->arrow(Rd.object_name(static_cast<Obj>(i)))));
    for (std::size_t a = 0; a < Rd.arrow_count(); ++a) z.arrow_part[d].push_back(identity_set_nat(z.object_part[d][static_cast<std::size_t>(Rd.dom(static_cast<Arr>(a)))]));
  }
  check_map_to_omega(z);
  return z;
}

// Over the one-object site a map into Ω̃ is a functor F(•) → Set. These
// translate between the two.
inline MapToOmega map_over_point(const SlicesRef& slices, const FinSetFunctor& w) {
  const CatRef& P = slices->site;
  if (P->object_count() != 1 || P->arrow_count() != 1) fail(ErrorKind::InvariantViolation, "map_over_point needs the one-object site");
  auto F = make_presheaf(P, {w.base}, {identity_functor(w.base)});
  const CatRef& S = slices->at(0).category;
  MapToOmega z{slices, F, {{}}, {{}}};
  for (const auto& e : w.elements) {
    std::vector<int> id(e.size());
    std::iota(id.begin(), id.end(), 0);
    z.object_part[0].push_back(SetPresheaf{S, {e}, {id}});
  }
  for (std::size_t n = 0; n < w.base->arrow_count(); ++n) {
    const Arr nu = static_cast<Arr>(n);
    z.arrow_part[0].push_back(PresheafNat{z.object_part[0][static_cast<std::size_t>(w.base->dom(nu))],
                                          z.object_part[0][static_cast<std::size_t>(w.base->cod(nu))], {w.action[n]}});
  }
  check_map_to_omega(z);
  return z;
}

inline FinSetFunctor set_functor_over_point(const MapToOmega& z) {
  const CatRef& B = z.source->value(0);
  FinSetFunctor w{B, {}, {}};
  for (const auto& Z : z.object_part[0]) w.elements.push_back(Z.elements[0]);
  for (const auto& t : z.arrow_part[0]) w.action.push_back(t.components[0]);
  check_set_functor(w);
  return w;
}

}  // namespace tck
