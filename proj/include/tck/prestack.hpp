#pragma once

// Strict 2-functors C^op → Cat, 2-natural transformations between them and
// modifications; pointwise discrete opfibrations, pointwise comma objects and
// pullbacks, representables and the Yoneda correspondence.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tck/cat2.hpp"
#include "tck/core.hpp"
#include "tck/fincat.hpp"
#include "tck/functor.hpp"
#include "tck/setfunctor.hpp"

namespace tck {

struct CatPresheaf {
  CatRef site;
  std::vector<CatRef> values;            // F(c)
  std::vector<FinFunctor> restrictions;  // F(f): F(c) → F(d) for f: d → c

  const CatRef& value(Obj c) const { return values[static_cast<std::size_t>(c)]; }
  const FinCat& at(Obj c) const { return *values[static_cast<std::size_t>(c)]; }
  const FinFunctor& restrict(Arr f) const { return restrictions[static_cast<std::size_t>(f)]; }

  bool operator==(const CatPresheaf& o) const {
    if (!shared_equal(site, o.site) || values.size() != o.values.size()) return false;
    for (std::size_t c = 0; c < values.size(); ++c)
      if (!shared_equal(values[c], o.values[c])) return false;
    return restrictions == o.restrictions;
  }
};

using PresheafRef = std::shared_ptr<const CatPresheaf>;

inline std::optional<std::string> presheaf_defect(const CatPresheaf& F) {
  const FinCat& C = *F.site;
  if (F.values.size() != C.object_count() || F.restrictions.size() != C.arrow_count()) return "tables do not match the site";
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    const FinFunctor& R = F.restrict(fa);
    if (!shared_equal(R.source, F.value(C.cod(fa))) || !shared_equal(R.target, F.value(C.dom(fa))))
      return cat("restriction along '", C.arrow_name(fa), "' has the wrong endpoints");
    if (auto d = functor_defect(R)) return cat("restriction along '", C.arrow_name(fa), "': ", *d);
    if (C.is_identity(fa) && !is_identity_functor(R)) return cat("restriction along '", C.arrow_name(fa), "' is not the identity");
  }
  for (std::size_t f = 0; f < C.arrow_count(); ++f)
    for (Arr g : C.arrows_into(C.dom(static_cast<Arr>(f)))) {
      const Arr fg = C.compose(static_cast<Arr>(f), g);
      if (F.restrict(fg) != compose(F.restrict(g), F.restrict(static_cast<Arr>(f))))
        return cat("restriction along '", C.arrow_name(fg), "' is not the composite of '", C.arrow_name(g), "' and '",
                   C.arrow_name(static_cast<Arr>(f)), "'");
    }
  return std::nullopt;
}

inline void check_presheaf(const CatPresheaf& F) {
  if (auto d = presheaf_defect(F)) fail(ErrorKind::InvariantViolation, "not a strict 2-functor: ", *d);
}

inline PresheafRef make_presheaf(CatRef site, std::vector<CatRef> values, std::vector<FinFunctor> restrictions) {
  auto F = std::make_shared<CatPresheaf>(CatPresheaf{std::move(site), std::move(values), std::move(restrictions)});
  check_presheaf(*F);
  return F;
}

// The constant presheaf at the terminal category.
inline PresheafRef terminal_presheaf(const CatRef& C) {
  CatRef P = share(discrete_category({"*"}));
  return make_presheaf(C, std::vector<CatRef>(C->object_count(), P),
                       std::vector<FinFunctor>(C->arrow_count(), identity_functor(P)));
}

// A Set-valued presheaf seen as a presheaf of discrete categories.
inline PresheafRef discrete_presheaf(const SetPresheaf& Z) {
  const FinCat& C = *Z.base;
  std::vector<CatRef> values;
  for (std::size_t c = 0; c < C.object_count(); ++c) values.push_back(share(discrete_category(Z.elements[c])));
  std::vector<FinFunctor> restrictions;
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    const CatRef& src = values[static_cast<std::size_t>(C.cod(fa))];
    const CatRef& dst = values[static_cast<std::size_t>(C.dom(fa))];
    FinFunctor R{src, dst, {}, {}};
    for (std::size_t x = 0; x < src->object_count(); ++x) {
      // discrete_category keeps the sorted label order
      const Obj y = Z.apply(fa, static_cast<int>(x));
      R.on_objects.push_back(y);
    }
    for (std::size_t a = 0; a < src->arrow_count(); ++a) R.on_arrows.push_back(dst->identity(R(src->dom(static_cast<Arr>(a)))));
    restrictions.push_back(std::move(R));
  }
  return make_presheaf(Z.base, std::move(values), std::move(restrictions));
}

// d ↦ Hom(d, c) as a discrete category, objects named by the arrows.
inline PresheafRef representable(const CatRef& C, Obj c) {
  if (c < 0 || static_cast<std::size_t>(c) >= C->object_count()) fail(ErrorKind::UnknownObject, "representable at an unknown object");
  return discrete_presheaf(hom_presheaf(C, c));
}

struct TwoNat {
  PresheafRef source;
  PresheafRef target;
  std::vector<FinFunctor> components;

  const FinFunctor& operator[](Obj c) const { return components[static_cast<std::size_t>(c)]; }
  bool operator==(const TwoNat& o) const {
    return shared_equal(source, o.source) && shared_equal(target, o.target) && components == o.components;
  }
};

inline std::optional<std::string> two_nat_defect(const TwoNat& s) {
  const FinCat& C = *s.source->site;
  if (!shared_equal(s.source->site, s.target->site)) return "source and target live over different sites";
  if (s.components.size() != C.object_count()) return "component table does not match the site";
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const FinFunctor& K = s.components[c];
    if (!shared_equal(K.source, s.source->value(static_cast<Obj>(c))) || !shared_equal(K.target, s.target->value(static_cast<Obj>(c))))
      return cat("component at '", C.object_name(static_cast<Obj>(c)), "' has the wrong endpoints");
    if (auto d = functor_defect(K)) return cat("component at '", C.object_name(static_cast<Obj>(c)), "': ", *d);
  }
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    if (compose(s.target->restrict(fa), s[C.cod(fa)]) != compose(s[C.dom(fa)], s.source->restrict(fa)))
      return cat("naturality square at '", C.arrow_name(fa), "' does not commute");
  }
  return std::nullopt;
}

inline void check_two_nat(const TwoNat& s) {
  if (auto d = two_nat_defect(s)) fail(ErrorKind::InvariantViolation, "not a 2-natural transformation: ", *d);
}

inline TwoNat identity_two_nat(const PresheafRef& F) {
  TwoNat s{F, F, {}};
  for (const CatRef& X : F->values) s.components.push_back(identity_functor(X));
  return s;
}

inline bool is_identity_two_nat(const TwoNat& s) {
  if (!shared_equal(s.source, s.target)) return false;
  for (const FinFunctor& K : s.components)
    if (!is_identity_functor(K)) return false;
  return true;
}

// t ∘ s
inline TwoNat compose(const TwoNat& t, const TwoNat& s) {
  TwoNat r{s.source, t.target, {}};
  for (std::size_t c = 0; c < s.components.size(); ++c) r.components.push_back(compose(t.components[c], s.components[c]));
  return r;
}

// ⌈X⌉: representable(c) → F with ⌈X⌉_d(f) = F(f)(X).
inline TwoNat yoneda(const PresheafRef& F, Obj c, Obj X) {
  const CatRef& C = F->site;
  PresheafRef R = representable(C, c);
  TwoNat s{R, F, {}};
  for (std::size_t d = 0; d < C->object_count(); ++d) {
    const Obj dd = static_cast<Obj>(d);
    const FinCat& Rd = R->at(dd);
    FinFunctor K{R->value(dd), F->value(dd), {}, {}};
    for (std::size_t i = 0; i < Rd.object_count(); ++i) K.on_objects.push_back(F->restrict(C->arrow(Rd.object_name(static_cast<Obj>(i))))(X));
    for (std::size_t a = 0; a < Rd.arrow_count(); ++a) K.on_arrows.push_back(F->at(dd).identity(K(Rd.dom(static_cast<Arr>(a)))));
    s.components.push_back(std::move(K));
  }
  check_two_nat(s);
  return s;
}

// The image of id_c under the component at c.
inline Obj yoneda_inv(const TwoNat& s, Obj c) {
  const FinCat& C = *s.source->site;
  const FinCat& Rc = s.source->at(c);
  return s[c](Rc.object(C.arrow_name(C.identity(c))));
}

inline std::vector<TwoNat> enumerate_two_nats(const PresheafRef& F, const PresheafRef& G, Budget& budget) {
  const FinCat& C = *F->site;
  std::vector<std::vector<FinFunctor>> options;
  for (std::size_t c = 0; c < C.object_count(); ++c)
    options.push_back(enumerate_functors(F->value(static_cast<Obj>(c)), G->value(static_cast<Obj>(c)), budget));
  std::vector<std::vector<Arr>> checks(C.object_count());
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    checks[static_cast<std::size_t>(std::max(C.dom(fa), C.cod(fa)))].push_back(fa);
  }
  std::vector<TwoNat> out;
  depth_first<FinFunctor>(
      C.object_count(), [&](std::size_t c, const std::vector<FinFunctor>&) { return options[c]; },
      [&](std::size_t c, const std::vector<FinFunctor>& k) {
        for (Arr f : checks[c])
          if (compose(G->restrict(f), k[static_cast<std::size_t>(C.cod(f))]) != compose(k[static_cast<std::size_t>(C.dom(f))], F->restrict(f)))
            return false;
        return true;
      },
      [&](const std::vector<FinFunctor>& k) {
        out.push_back(TwoNat{F, G, k});
        return true;
      },
      budget);
  return out;
}

inline std::vector<TwoNat> enumerate_two_nats(const PresheafRef& F, const PresheafRef& G) {
  Budget budget;
  return enumerate_two_nats(F, G, budget);
}

struct Modification {
  TwoNat source;
  TwoNat target;
  std::vector<NatTransform> components;

  bool operator==(const Modification& o) const { return source == o.source && target == o.target && components == o.components; }
};

inline std::optional<std::string> modification_defect(const Modification& m) {
  const CatPresheaf& F = *m.source.source;
  const CatPresheaf& G = *m.source.target;
  const FinCat& C = *F.site;
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const NatTransform& t = m.components[c];
    if (t.source != m.source.components[c] || t.target != m.target.components[c])
      return cat("component at '", C.object_name(static_cast<Obj>(c)), "' has the wrong endpoints");
    if (auto d = nat_defect(t)) return cat("component at '", C.object_name(static_cast<Obj>(c)), "': ", *d);
  }
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    const Obj d = C.dom(fa), c = C.cod(fa);
    for (std::size_t X = 0; X < F.at(c).object_count(); ++X) {
      const Obj Xo = static_cast<Obj>(X);
      if (m.components[static_cast<std::size_t>(d)][F.restrict(fa)(Xo)] != G.restrict(fa).arrow(m.components[static_cast<std::size_t>(c)][Xo]))
        return cat("modification axiom fails at '", C.arrow_name(fa), "'");
    }
  }
  return std::nullopt;
}

inline std::vector<Modification> enumerate_modifications(const TwoNat& s, const TwoNat& t, Budget& budget) {
  const CatPresheaf& F = *s.source;
  const CatPresheaf& G = *s.target;
  const FinCat& C = *F.site;
  std::vector<std::vector<NatTransform>> options;
  for (std::size_t c = 0; c < C.object_count(); ++c) options.push_back(enumerate_nats(s.components[c], t.components[c], budget));
  std::vector<std::vector<Arr>> checks(C.object_count());
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    checks[static_cast<std::size_t>(std::max(C.dom(fa), C.cod(fa)))].push_back(fa);
  }
  std::vector<Modification> out;
  depth_first<NatTransform>(
      C.object_count(), [&](std::size_t c, const std::vector<NatTransform>&) { return options[c]; },
      [&](std::size_t c, const std::vector<NatTransform>& m) {
        for (Arr f : checks[c]) {
          const Obj d = C.dom(f), e = C.cod(f);
          for (std::size_t X = 0; X < F.at(e).object_count(); ++X)
            if (m[static_cast<std::size_t>(d)][F.restrict(f)(static_cast<Obj>(X))] !=
                G.restrict(f).arrow(m[static_cast<std::size_t>(e)][static_cast<Obj>(X)]))
              return false;
        }
        return true;
      },
      [&](const std::vector<NatTransform>& m) {
        out.push_back(Modification{s, t, m});
        return true;
      },
      budget);
  return out;
}

inline std::vector<Modification> enumerate_modifications(const TwoNat& s, const TwoNat& t) {
  Budget budget;
  return enumerate_modifications(s, t, budget);
}

struct DiscOpfibPre {
  TwoNat s;
  std::vector<DiscOpfibCat> components;

  const PresheafRef& total() const { return s.source; }
  const PresheafRef& base() const { return s.target; }
  const DiscOpfibCat& at(Obj c) const { return components[static_cast<std::size_t>(c)]; }
  const std::vector<Obj>& fibre(Obj c, Obj X) const { return at(c).fibre(X); }

  bool operator==(const DiscOpfibPre& o) const { return s == o.s; }
};

inline DiscOpfibPre certify_dopf_pre(const TwoNat& s) {
  check_two_nat(s);
  const FinCat& C = *s.source->site;
  DiscOpfibPre out{s, {}};
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    try {
      out.components.push_back(certify_dopf(s.components[c]));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotOpfibration) throw;
      fail(ErrorKind::NotOpfibrationAt, "component at '", C.object_name(static_cast<Obj>(c)), "': ", e.detail());
    }
  }
  return out;
}

inline DiscOpfibPre identity_dopf_pre(const PresheafRef& F) { return certify_dopf_pre(identity_two_nat(F)); }

struct PresheafCone {
  PresheafRef apex;
  TwoNat left;
  TwoNat right;
  std::vector<NatTransform> fillers;  // per object, the comma 2-cell
};

// Comma object of f: A → C and g: B → C, computed componentwise.
inline PresheafCone pointwise_comma(const TwoNat& f, const TwoNat& g) {
  if (!shared_equal(f.target, g.target)) fail(ErrorKind::InvariantViolation, "comma: codomains differ");
  const CatPresheaf& A = *f.source;
  const CatPresheaf& B = *g.source;
  const CatPresheaf& T = *f.target;
  const FinCat& C = *A.site;
  std::vector<CommaCone> cones;
  for (std::size_t c = 0; c < C.object_count(); ++c) cones.push_back(comma(f.components[c], g.components[c]));
  std::vector<CatRef> values;
  for (const auto& k : cones) values.push_back(k.apex);
  std::vector<FinFunctor> restrictions;
  for (std::size_t h = 0; h < C.arrow_count(); ++h) {
    const Arr ha = static_cast<Arr>(h);
    const Obj d = C.dom(ha), c = C.cod(ha);
    const CommaCone& from = cones[static_cast<std::size_t>(c)];
    const CommaCone& to = cones[static_cast<std::size_t>(d)];
    const FinFunctor& Ah = A.restrict(ha);
    const FinFunctor& Bh = B.restrict(ha);
    const FinFunctor& Th = T.restrict(ha);
    FinFunctor R{from.apex, to.apex, {}, {}};
    for (std::size_t x = 0; x < from.apex->object_count(); ++x) {
      const Obj xo = static_cast<Obj>(x);
      R.on_objects.push_back(to.apex->object(comma_object_name(A.at(d).object_name(Ah(from.left(xo))), B.at(d).object_name(Bh(from.right(xo))),
                                                               T.at(d).arrow_name(Th.arrow(from.filler[xo])))));
    }
    for (std::size_t a = 0; a < from.apex->arrow_count(); ++a) {
      const Arr aa = static_cast<Arr>(a);
      const Obj s = from.apex->dom(aa), t = from.apex->cod(aa);
      R.on_arrows.push_back(to.apex->arrow(comma_arrow_name(A.at(d).arrow_name(Ah.arrow(from.left.arrow(aa))),
                                                            B.at(d).arrow_name(Bh.arrow(from.right.arrow(aa))),
                                                            T.at(d).arrow_name(Th.arrow(from.filler[s])),
                                                            T.at(d).arrow_name(Th.arrow(from.filler[t])))));
    }
    restrictions.push_back(std::move(R));
  }
  PresheafCone out;
  out.apex = make_presheaf(A.site, std::move(values), std::move(restrictions));
  out.left = TwoNat{out.apex, f.source, {}};
  out.right = TwoNat{out.apex, g.source, {}};
  for (const auto& k : cones) {
    out.left.components.push_back(k.left);
    out.right.components.push_back(k.right);
    out.fillers.push_back(k.filler);
  }
  check_two_nat(out.left);
  check_two_nat(out.right);
  return out;
}

// Componentwise chosen pullback of p along z. Pulling back along the identity
// returns p itself.
inline DiscOpfibPre pointwise_pullback(const DiscOpfibPre& p, const TwoNat& z) {
  if (!shared_equal(z.target, p.base())) fail(ErrorKind::InvariantViolation, "pullback: codomains differ");
  if (is_identity_two_nat(z)) return p;
  const CatPresheaf& F = *z.source;
  const CatPresheaf& E = *p.total();
  const FinCat& C = *F.site;
  std::vector<Pullback> pbs;
  std::vector<bool> plain;  // component is the identity, so the apex is E(c) itself
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    pbs.push_back(pullback(p.components[c], z.components[c]));
    plain.push_back(is_identity_functor(z.components[c]));
  }
  auto object_at = [&](Obj d, Obj x, Obj e) {
    if (plain[static_cast<std::size_t>(d)]) return e;
    return pbs[static_cast<std::size_t>(d)].left.total()->object(pair_name(F.at(d).object_name(x), E.at(d).object_name(e)));
  };
  auto arrow_at = [&](Obj d, Arr a, Arr g) {
    if (plain[static_cast<std::size_t>(d)]) return g;
    return pbs[static_cast<std::size_t>(d)].left.total()->arrow(pair_name(F.at(d).arrow_name(a), E.at(d).arrow_name(g)));
  };
  std::vector<CatRef> values;
  for (const auto& pb : pbs) values.push_back(pb.left.total());
  std::vector<FinFunctor> restrictions;
  for (std::size_t h = 0; h < C.arrow_count(); ++h) {
    const Arr ha = static_cast<Arr>(h);
    const Obj d = C.dom(ha), c = C.cod(ha);
    const Pullback& from = pbs[static_cast<std::size_t>(c)];
    const CatRef& P = from.left.total();
    FinFunctor R{P, values[static_cast<std::size_t>(d)], {}, {}};
    for (std::size_t x = 0; x < P->object_count(); ++x) {
      const Obj xo = static_cast<Obj>(x);
      R.on_objects.push_back(object_at(d, F.restrict(ha)(from.left.p(xo)), E.restrict(ha)(from.top(xo))));
    }
    for (std::size_t a = 0; a < P->arrow_count(); ++a) {
      const Arr aa = static_cast<Arr>(a);
      R.on_arrows.push_back(arrow_at(d, F.restrict(ha).arrow(from.left.p.arrow(aa)), E.restrict(ha).arrow(from.top.arrow(aa))));
    }
    restrictions.push_back(std::move(R));
  }
  PresheafRef apex = make_presheaf(F.site, std::move(values), std::move(restrictions));
  TwoNat left{apex, z.source, {}};
  for (const auto& pb : pbs) left.components.push_back(pb.left.p);
  return certify_dopf_pre(left);
}

namespace detail {

// One slot per object of every G(c), searched jointly so that lifting,
// injectivity and the restriction squares prune as early as possible.
inline std::vector<TwoNat> search_fib_hom(const DiscOpfibPre& phi, const DiscOpfibPre& psi, Budget& budget, bool isos_only,
                                          bool first_only) {
  if (!shared_equal(phi.base(), psi.base())) fail(ErrorKind::InvariantViolation, "opfibrations over different presheaves");
  const CatPresheaf& G = *phi.total();
  const CatPresheaf& H = *psi.total();
  const FinCat& C = *G.site;
  std::vector<TwoNat> out;
  std::vector<std::size_t> offset(C.object_count() + 1, 0);
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const std::size_t n = G.at(static_cast<Obj>(c)).object_count();
    if (isos_only && n != H.at(static_cast<Obj>(c)).object_count()) return out;
    offset[c + 1] = offset[c] + n;
  }
  std::vector<Obj> owner(offset.back());
  for (std::size_t c = 0; c < C.object_count(); ++c)
    for (std::size_t k = offset[c]; k < offset[c + 1]; ++k) owner[k] = static_cast<Obj>(c);
  auto slot = [&](Obj c, Obj x) { return offset[static_cast<std::size_t>(c)] + static_cast<std::size_t>(x); };
  // arrows of G(c) checked once both ends are placed
  std::vector<std::vector<std::pair<Obj, Arr>>> inner(offset.back());
  for (std::size_t c = 0; c < C.object_count(); ++c) {
    const FinCat& E = G.at(static_cast<Obj>(c));
    for (std::size_t g = 0; g < E.arrow_count(); ++g) {
      const Arr ga = static_cast<Arr>(g);
      inner[std::max(slot(static_cast<Obj>(c), E.dom(ga)), slot(static_cast<Obj>(c), E.cod(ga)))].push_back({static_cast<Obj>(c), ga});
    }
  }
  // restriction squares (f, x) with x in G(cod f), checked at the later slot
  std::vector<std::vector<std::pair<Arr, Obj>>> squares(offset.back());
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    for (std::size_t x = 0; x < G.at(C.cod(fa)).object_count(); ++x) {
      const Obj xo = static_cast<Obj>(x);
      squares[std::max(slot(C.cod(fa), xo), slot(C.dom(fa), G.restrict(fa)(xo)))].push_back({fa, xo});
    }
  }
  auto component = [&](const std::vector<Obj>& h, std::size_t c) {
    const DiscOpfibCat& p = phi.components[c];
    const DiscOpfibCat& q = psi.components[c];
    FinFunctor m{p.total(), q.total(), std::vector<Obj>(h.begin() + static_cast<std::ptrdiff_t>(offset[c]), h.begin() + static_cast<std::ptrdiff_t>(offset[c + 1])), {}};
    for (std::size_t g = 0; g < p.total()->arrow_count(); ++g)
      m.on_arrows.push_back(q.lift(m(p.total()->dom(static_cast<Arr>(g))), p.p.arrow(static_cast<Arr>(g))));
    return m;
  };
  depth_first<Obj>(
      offset.back(),
      [&](std::size_t k, const std::vector<Obj>&) {
        const std::size_t c = static_cast<std::size_t>(owner[k]);
        return psi.components[c].fibre(phi.components[c].p(static_cast<Obj>(k - offset[c])));
      },
      [&](std::size_t k, const std::vector<Obj>& h) {
        const std::size_t c = static_cast<std::size_t>(owner[k]);
        if (isos_only)
          for (std::size_t i = offset[c]; i < k; ++i)
            if (h[i] == h[k]) return false;
        for (auto [d, g] : inner[k]) {
          const DiscOpfibCat& p = phi.components[static_cast<std::size_t>(d)];
          const DiscOpfibCat& q = psi.components[static_cast<std::size_t>(d)];
          const FinCat& E = *p.total();
          const Arr l = q.lift(h[slot(d, E.dom(g))], p.p.arrow(g));
          if (q.total()->cod(l) != h[slot(d, E.cod(g))]) return false;
        }
        // arrows are forced by lifting, so objects suffice
        for (auto [f, x] : squares[k])
          if (H.restrict(f)(h[slot(C.cod(f), x)]) != h[slot(C.dom(f), G.restrict(f)(x))]) return false;
        return true;
      },
      [&](const std::vector<Obj>& h) {
        TwoNat t{phi.total(), psi.total(), {}};
        for (std::size_t c = 0; c < C.object_count(); ++c) t.components.push_back(component(h, c));
        out.push_back(std::move(t));
        return !first_only;
      },
      budget);
  return out;
}

}  // namespace detail

// Morphisms dom φ → dom ψ commuting strictly over the common base.
inline std::vector<TwoNat> fib_hom(const DiscOpfibPre& phi, const DiscOpfibPre& psi, Budget& budget) {
  return detail::search_fib_hom(phi, psi, budget, false, false);
}

inline std::vector<TwoNat> fib_hom(const DiscOpfibPre& phi, const DiscOpfibPre& psi) {
  Budget budget;
  return fib_hom(phi, psi, budget);
}

inline std::optional<TwoNat> fib_iso(const DiscOpfibPre& phi, const DiscOpfibPre& psi, Budget& budget) {
  auto found = detail::search_fib_hom(phi, psi, budget, true, true);
  if (found.empty()) return std::nullopt;
  return found.front();
}

inline std::optional<TwoNat> fib_iso(const DiscOpfibPre& phi, const DiscOpfibPre& psi) {
  Budget budget;
  return fib_iso(phi, psi, budget);
}

}  // namespace tck
