#pragma once

// Small hand-built presheaves shared by several test files.

#include <string>
#include <vector>

#include "tck/prestack.hpp"
#include "tck/sites.hpp"

namespace tck::fixtures {

inline CatRef arrow_cat(const std::string& x, const std::string& y, const std::string& n) {
  return share(free_category({x, y}, {{n, x, y}}));
}

// Over the walking arrow u: a → b. F(b) is the arrow n: p → q, F(a) is the
// point r, F(u) is constant.
inline PresheafRef stick() {
  auto C = sites::walking_arrow();
  CatRef Fb = arrow_cat("p", "q", "n");
  CatRef Fa = share(discrete_category({"r"}));
  std::vector<CatRef> values(2);
  values[static_cast<std::size_t>(C->object("a"))] = Fa;
  values[static_cast<std::size_t>(C->object("b"))] = Fb;
  std::vector<FinFunctor> res(C->arrow_count());
  res[static_cast<std::size_t>(C->arrow("id_a"))] = identity_functor(Fa);
  res[static_cast<std::size_t>(C->arrow("id_b"))] = identity_functor(Fb);
  res[static_cast<std::size_t>(C->arrow("u"))] = constant_functor(Fb, Fa, 0);
  return make_presheaf(C, values, res);
}

// Same site; F(b) = {p, q} discrete, F(a) = arrow m: r → s, F(u) picks r
// for p and s for q.
inline PresheafRef fork() {
  auto C = sites::walking_arrow();
  CatRef Fb = share(discrete_category({"p", "q"}));
  CatRef Fa = arrow_cat("r", "s", "m");
  std::vector<CatRef> values(2);
  values[static_cast<std::size_t>(C->object("a"))] = Fa;
  values[static_cast<std::size_t>(C->object("b"))] = Fb;
  std::vector<FinFunctor> res(C->arrow_count());
  res[static_cast<std::size_t>(C->arrow("id_a"))] = identity_functor(Fa);
  res[static_cast<std::size_t>(C->arrow("id_b"))] = identity_functor(Fb);
  res[static_cast<std::size_t>(C->arrow("u"))] = functor_from_names(Fb, Fa, {{"p", "r"}, {"q", "s"}}, {});
  return make_presheaf(C, values, res);
}

// Constant presheaf at a category.
inline PresheafRef constant(const CatRef& site, const CatRef& value) {
  return make_presheaf(site, std::vector<CatRef>(site->object_count(), value),
                       std::vector<FinFunctor>(site->arrow_count(), identity_functor(value)));
}

// One object with an involution s.
inline CatRef involution() {
  RawCategory raw;
  raw.objects = {"X"};
  raw.arrows = {{"s", "X", "X"}};
  raw.composites = {{"s", "s", "id_X"}};
  return share(build_category(raw));
}

// F(12) is one object X with an idempotent e; every smaller open is a point.
inline PresheafRef idempotent_over_whole() {
  auto C = sites::open_site();
  RawCategory raw;
  raw.objects = {"X"};
  raw.arrows = {{"e", "X", "X"}};
  raw.composites = {{"e", "e", "e"}};
  CatRef top = share(build_category(raw));
  CatRef pt = share(discrete_category({"*"}));
  std::vector<CatRef> values(C->object_count(), pt);
  values[static_cast<std::size_t>(C->object("12"))] = top;
  std::vector<FinFunctor> restrictions;
  for (std::size_t f = 0; f < C->arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    if (C->cod(fa) == C->object("12") && C->dom(fa) == C->object("12")) restrictions.push_back(identity_functor(top));
    else if (C->cod(fa) == C->object("12")) restrictions.push_back(constant_functor(top, pt, 0));
    else restrictions.push_back(identity_functor(pt));
  }
  return make_presheaf(C, values, restrictions);
}

}  // namespace tck::fixtures
