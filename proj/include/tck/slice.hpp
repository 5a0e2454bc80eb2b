#pragma once

// Slice categories C/c, the post-composition functors between them and the
// reindexing of presheaves on slices that gives the arrow action of the
// prestack classifier.

#include <memory>
#include <string>
#include <vector>

#include "tck/fincat.hpp"
#include "tck/functor.hpp"
#include "tck/setfunctor.hpp"

namespace tck {

// Objects of C/c are named by the arrow of C they wrap; the arrow
// g: (f∘g) → f is named "g@f".
struct Slice {
  CatRef base;
  Obj apex = none;
  CatRef category;
  FinFunctor dom;                 // C/c → C
  std::vector<Obj> object_of;     // arrow of C into c → object of C/c
  std::vector<Arr> arrow_of;      // (g, f) flattened → arrow g@f, or none
  std::vector<Arr> wrapped;       // object of C/c → arrow of C

  Obj object_for(Arr f) const { return object_of[static_cast<std::size_t>(f)]; }
  Arr arrow_for(Arr g, Arr f) const {
    return arrow_of[static_cast<std::size_t>(g) * base->arrow_count() + static_cast<std::size_t>(f)];
  }
  Arr arrow_at(Obj x) const { return wrapped[static_cast<std::size_t>(x)]; }
  Obj terminal() const { return object_for(base->identity(apex)); }
};

inline std::string slice_arrow_name(const FinCat& C, Arr g, Arr f) { return C.arrow_name(g) + "@" + C.arrow_name(f); }

inline Slice slice(const CatRef& C, Obj c) {
  if (c < 0 || static_cast<std::size_t>(c) >= C->object_count()) fail(ErrorKind::UnknownObject, "slice over an object outside the category");
  const std::size_t m = C->arrow_count();
  std::vector<std::string> objects;
  std::vector<Arr> wrapped;
  for (Arr f : C->arrows_into(c)) {
    objects.push_back(C->arrow_name(f));
    wrapped.push_back(f);
  }
  std::vector<Obj> local(m, none);
  for (std::size_t i = 0; i < wrapped.size(); ++i) local[static_cast<std::size_t>(wrapped[i])] = static_cast<Obj>(i);
  std::vector<FinCat::ArrowData> arrows;
  std::vector<std::pair<Arr, Arr>> pairs;
  std::vector<Arr> local_arrow(m * m, none);
  for (Arr f : wrapped) {
    for (Arr g : C->arrows_into(C->dom(f))) {
      local_arrow[static_cast<std::size_t>(g) * m + static_cast<std::size_t>(f)] = static_cast<Arr>(arrows.size());
      arrows.push_back({slice_arrow_name(*C, g, f), local[static_cast<std::size_t>(C->compose(f, g))], local[static_cast<std::size_t>(f)]});
      pairs.push_back({g, f});
    }
  }
  std::vector<Arr> ids;
  for (Arr f : wrapped) ids.push_back(local_arrow[static_cast<std::size_t>(C->identity(C->dom(f))) * m + static_cast<std::size_t>(f)]);
  // g@f ∘ h@(f∘g) = (g∘h)@f
  FinCat sc = FinCat::assemble(objects, arrows, ids, [&](Arr second, Arr first) {
    const auto [g, f] = pairs[static_cast<std::size_t>(second)];
    const auto [h, fg] = pairs[static_cast<std::size_t>(first)];
    (void)fg;
    return local_arrow[static_cast<std::size_t>(C->compose(g, h)) * m + static_cast<std::size_t>(f)];
  });
  Slice s;
  s.base = C;
  s.apex = c;
  s.category = share(std::move(sc));
  const FinCat& S = *s.category;
  s.object_of.assign(m, none);
  s.wrapped.assign(S.object_count(), none);
  for (Arr f : wrapped) {
    const Obj x = S.object(C->arrow_name(f));
    s.object_of[static_cast<std::size_t>(f)] = x;
    s.wrapped[static_cast<std::size_t>(x)] = f;
  }
  s.arrow_of.assign(m * m, none);
  s.dom = FinFunctor{s.category, C, std::vector<Obj>(S.object_count()), std::vector<Arr>(S.arrow_count())};
  for (auto [g, f] : pairs) {
    const Arr a = S.arrow(slice_arrow_name(*C, g, f));
    s.arrow_of[static_cast<std::size_t>(g) * m + static_cast<std::size_t>(f)] = a;
    s.dom.on_arrows[static_cast<std::size_t>(a)] = g;
  }
  for (std::size_t x = 0; x < S.object_count(); ++x) s.dom.on_objects[x] = C->dom(s.wrapped[x]);
  return s;
}

// All slices of a site, built once and shared by everything that works with
// presheaves on slices.
struct SliceSystem {
  CatRef site;
  std::vector<Slice> slices;

  const Slice& at(Obj c) const { return slices[static_cast<std::size_t>(c)]; }

  // f∘-: C/d → C/c for f: d → c
  FinFunctor postcompose(Arr f) const {
    const FinCat& C = *site;
    const Slice& from = at(C.dom(f));
    const Slice& to = at(C.cod(f));
    FinFunctor P{from.category, to.category, {}, {}};
    for (std::size_t x = 0; x < from.category->object_count(); ++x)
      P.on_objects.push_back(to.object_for(C.compose(f, from.arrow_at(static_cast<Obj>(x)))));
    for (std::size_t a = 0; a < from.category->arrow_count(); ++a) {
      const Arr g = from.dom.arrow(static_cast<Arr>(a));
      const Arr h = from.arrow_at(from.category->cod(static_cast<Arr>(a)));
      P.on_arrows.push_back(to.arrow_for(g, C.compose(f, h)));
    }
    return P;
  }

  // Z ∘ (f∘-)^op for Z a presheaf on C/cod(f).
  SetPresheaf reindex(const SetPresheaf& Z, Arr f) const { return precompose(Z, postcompose(f)); }
  PresheafNat reindex(const PresheafNat& t, Arr f) const { return precompose(t, postcompose(f)); }
};

using SlicesRef = std::shared_ptr<const SliceSystem>;

inline SlicesRef slice_system(const CatRef& C) {
  auto s = std::make_shared<SliceSystem>();
  s->site = C;
  for (std::size_t c = 0; c < C->object_count(); ++c) s->slices.push_back(slice(C, static_cast<Obj>(c)));
  return s;
}

inline FinFunctor postcompose(const CatRef& C, Arr f) { return slice_system(C)->postcompose(f); }

}  // namespace tck
