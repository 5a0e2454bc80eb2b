#pragma once

// Small named categories used as sites and as bases throughout the tests,
// the acceptance suite and the shipped corpus.

#include "tck/fincat.hpp"

namespace tck::sites {

// One object "*".
inline CatRef point() { return share(discrete_category({"*"})); }

inline CatRef discrete2() { return share(discrete_category({"a", "b"})); }

// u: a → b
inline CatRef walking_arrow() { return share(free_category({"a", "b"}, {{"u", "a", "b"}})); }

// f: a → b, g: b → c, and g.f
inline CatRef chain3() { return share(free_category({"a", "b", "c"}, {{"f", "a", "b"}, {"g", "b", "c"}})); }

// u: a → c ← b: v
inline CatRef cospan() { return share(free_category({"a", "b", "c"}, {{"u", "a", "c"}, {"v", "b", "c"}})); }

// p: x → y, q: x → z, r: y → w, s: z → w with r∘p = s∘q = d.
inline CatRef commutative_square() {
  RawCategory raw;
  raw.objects = {"w", "x", "y", "z"};
  raw.arrows = {{"p", "x", "y"}, {"q", "x", "z"}, {"r", "y", "w"}, {"s", "z", "w"}, {"d", "x", "w"}};
  raw.composites = {{"r", "p", "d"}, {"s", "q", "d"}};
  return share(build_category(raw));
}

// Opens of the discrete space {1,2} ordered by inclusion: "0" (empty),
// "1", "2", "12". Inclusions are named by their endpoints, e.g. "1<12".
inline CatRef open_site() {
  RawCategory raw;
  raw.objects = {"0", "1", "2", "12"};
  raw.arrows = {{"0<1", "0", "1"}, {"0<2", "0", "2"}, {"0<12", "0", "12"}, {"1<12", "1", "12"}, {"2<12", "2", "12"}};
  raw.composites = {{"1<12", "0<1", "0<12"}, {"2<12", "0<2", "0<12"}};
  return share(build_category(raw));
}

}  // namespace tck::sites
