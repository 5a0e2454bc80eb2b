#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "corpus.hpp"
#include "tck/site.hpp"
#include "tck/sites.hpp"

using namespace tck;

namespace {

// Opens as point sets: "0" is empty, "12" is {1,2}.
std::set<char> points(const std::string& open) {
  std::set<char> out;
  for (char p : open)
    if (p != '0') out.insert(p);
  return out;
}

bool subset(const std::set<char>& a, const std::set<char>& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

// Sieves on U as down-closed families of opens inside U, covering when their
// union is U.
struct OpenOracle {
  std::size_t sieves = 0;
  std::size_t covering = 0;
};

OpenOracle open_oracle(const std::string& U) {
  const std::vector<std::string> opens = {"0", "1", "2", "12"};
  std::vector<std::string> below;
  for (const auto& V : opens)
    if (subset(points(V), points(U))) below.push_back(V);
  OpenOracle out;
  for (unsigned mask = 0; mask < (1u << below.size()); ++mask) {
    bool down = true;
    std::set<char> un;
    for (std::size_t i = 0; i < below.size(); ++i) {
      if (!(mask >> i & 1)) continue;
      for (const auto& p : points(below[i])) un.insert(p);
      for (std::size_t j = 0; j < below.size(); ++j)
        if (subset(points(below[j]), points(below[i])) && !(mask >> j & 1)) down = false;
    }
    if (!down) continue;
    ++out.sieves;
    if (un == points(U)) ++out.covering;
  }
  return out;
}

// Presheaf on the opens with the given labels; restrictions keep a label
// when the smaller open has it and send everything to the first element
// otherwise.
SetPresheaf open_presheaf(const CatRef& C, const std::map<std::string, std::vector<std::string>>& sets) {
  std::vector<std::vector<std::string>> elements(C->object_count());
  for (const auto& [name, labels] : sets) elements[static_cast<std::size_t>(C->object(name))] = labels;
  std::vector<std::vector<int>> action(C->arrow_count());
  for (std::size_t f = 0; f < C->arrow_count(); ++f) {
    const auto& from = elements[static_cast<std::size_t>(C->cod(static_cast<Arr>(f)))];
    const auto& to = elements[static_cast<std::size_t>(C->dom(static_cast<Arr>(f)))];
    for (const auto& l : from) {
      auto it = std::find(to.begin(), to.end(), l);
      action[f].push_back(it == to.end() ? 0 : static_cast<int>(it - to.begin()));
    }
  }
  return make_set_functor<Variance::contravariant>(C, elements, action);
}

SetPresheaf two_over_whole(const CatRef& C) {
  return open_presheaf(C, {{"0", {"*"}}, {"1", {"*"}}, {"2", {"*"}}, {"12", {"0", "1"}}});
}

Sieve named(const FinCat& C, const std::string& at, const std::vector<std::string>& arrows) {
  Sieve S{C.object(at), {}};
  for (const auto& a : arrows) S.arrows.push_back(C.arrow(a));
  std::sort(S.arrows.begin(), S.arrows.end());
  return S;
}

// Every assignment of elements to the arrows of S, kept when compatible.
std::size_t brute_matching_count(const SetPresheaf& Z, const Sieve& S) {
  const FinCat& C = *Z.base;
  std::size_t total = 1;
  for (Arr f : S.arrows) total *= Z.size(C.dom(f));
  std::size_t count = 0;
  for (std::size_t code = 0; code < total; ++code) {
    std::map<Arr, int> x;
    std::size_t rest = code;
    for (Arr f : S.arrows) {
      x[f] = static_cast<int>(rest % Z.size(C.dom(f)));
      rest /= Z.size(C.dom(f));
    }
    bool ok = true;
    for (Arr f : S.arrows)
      for (std::size_t g = 0; g < C.arrow_count(); ++g)
        if (C.cod(static_cast<Arr>(g)) == C.dom(f) && x.at(C.compose(f, static_cast<Arr>(g))) != Z.apply(static_cast<Arr>(g), x.at(f))) ok = false;
    count += ok;
  }
  return count;
}

// On a discrete space a presheaf is a sheaf iff the empty open has one
// section and sections over {1,2} are pairs of sections over the points.
bool discrete_sheaf_oracle(const SetPresheaf& Z) {
  const FinCat& C = *Z.base;
  if (Z.size(C.object("0")) != 1) return false;
  std::set<std::pair<int, int>> seen;
  for (std::size_t x = 0; x < Z.size(C.object("12")); ++x)
    seen.insert({Z.apply(C.arrow("1<12"), static_cast<int>(x)), Z.apply(C.arrow("2<12"), static_cast<int>(x))});
  return seen.size() == Z.size(C.object("12")) && seen.size() == Z.size(C.object("1")) * Z.size(C.object("2"));
}

}  // namespace

TEST(Sieve, GenerateIdentityIsMaximal) {
  auto C = sites::open_site();
  for (std::size_t c = 0; c < C->object_count(); ++c) {
    const Sieve S = sieve_generate(*C, static_cast<Obj>(c), {C->identity(static_cast<Obj>(c))});
    EXPECT_EQ(S.arrows.size(), C->arrows_into(static_cast<Obj>(c)).size());
    EXPECT_TRUE(is_maximal(*C, S));
  }
}

TEST(Sieve, GenerateEmptyIsEmpty) {
  auto C = sites::commutative_square();
  EXPECT_TRUE(sieve_generate(*C, C->object("w"), {}).arrows.empty());
}

TEST(Sieve, JointFamilyPicksUpEmptyOpen) {
  auto C = sites::open_site();
  const Sieve S = sieve_generate(*C, C->object("12"), {C->arrow("1<12"), C->arrow("2<12")});
  EXPECT_EQ(S, named(*C, "12", {"0<12", "1<12", "2<12"}));
}

TEST(Sieve, MixedCodomainRejected) {
  auto C = sites::open_site();
  try {
    sieve_generate(*C, C->object("12"), {C->arrow("1<12"), C->arrow("0<1")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MixedCodomain);
  }
}

TEST(Sieve, CountsMatchDownSets) {
  auto C = sites::open_site();
  for (const std::string U : {"0", "1", "2", "12"}) EXPECT_EQ(all_sieves(*C, C->object(U)).size(), open_oracle(U).sieves) << U;
}

TEST(Sieve, EveryListedSieveIsClosed) {
  for (const auto& [name, C] : corpus::shipped_bases())
    for (std::size_t c = 0; c < C->object_count(); ++c)
      for (const Sieve& S : all_sieves(*C, static_cast<Obj>(c))) EXPECT_FALSE(sieve_defect(*C, S)) << name;
}

TEST(PullbackSieve, IdentityAndMaximal) {
  for (const auto& [name, C] : corpus::shipped_bases())
    for (std::size_t c = 0; c < C->object_count(); ++c) {
      const Obj o = static_cast<Obj>(c);
      for (const Sieve& S : all_sieves(*C, o)) EXPECT_EQ(pullback_sieve(*C, C->identity(o), S), S) << name;
      for (Arr g : C->arrows_into(o)) EXPECT_TRUE(is_maximal(*C, pullback_sieve(*C, g, maximal_sieve(*C, o)))) << name;
    }
}

TEST(PullbackSieve, Contravariant) {
  for (const auto& [name, C] : corpus::shipped_bases())
    for (std::size_t c = 0; c < C->object_count(); ++c)
      for (const Sieve& S : all_sieves(*C, static_cast<Obj>(c)))
        for (Arr g : C->arrows_into(static_cast<Obj>(c)))
          for (Arr h : C->arrows_into(C->dom(g)))
            EXPECT_EQ(pullback_sieve(*C, C->compose(g, h), S), pullback_sieve(*C, h, pullback_sieve(*C, g, S))) << name;
}

TEST(PullbackSieve, JointCoverAlongPointIsMaximal) {
  auto C = sites::open_site();
  const Sieve joint = named(*C, "12", {"0<12", "1<12", "2<12"});
  EXPECT_TRUE(is_maximal(*C, pullback_sieve(*C, C->arrow("1<12"), joint)));
}

TEST(Topology, OpenCoversMatchUnionCriterion) {
  auto C = sites::open_site();
  const GrothTopology J = open_cover_topology(C);
  for (const std::string U : {"0", "1", "2", "12"}) EXPECT_EQ(J.covers[static_cast<std::size_t>(C->object(U))].size(), open_oracle(U).covering) << U;
  EXPECT_TRUE(J.covering(named(*C, "0", {})));
  EXPECT_TRUE(J.covering(named(*C, "12", {"0<12", "1<12", "2<12"})));
  EXPECT_FALSE(J.covering(named(*C, "12", {"0<12", "1<12"})));
}

TEST(Topology, OpenValidAndSubcanonical) {
  auto C = sites::open_site();
  const GrothTopology J = open_cover_topology(C);
  EXPECT_FALSE(validate_topology(J));
  EXPECT_TRUE(subcanonical_check(J).holds);
}

TEST(Topology, TrivialValidAndSubcanonicalEverywhere) {
  for (const auto& [name, C] : corpus::shipped_bases()) {
    const GrothTopology J = trivial_topology(C);
    EXPECT_FALSE(validate_topology(J)) << name;
    EXPECT_TRUE(subcanonical_check(J).holds) << name;
  }
}

TEST(Topology, GeneratedFromFamiliesIsClosed) {
  auto C = sites::commutative_square();
  const Saturation s = generate_topology(C, {{C->object("w"), {C->arrow("r"), C->arrow("s")}}, {C->object("y"), {C->arrow("p")}}});
  EXPECT_FALSE(validate_topology(s.topology));
  EXPECT_GT(s.added, 0u);
}

TEST(Topology, IntersectionOfCoversCovers) {
  std::vector<GrothTopology> tops = {open_cover_topology(sites::open_site())};
  auto sq = sites::commutative_square();
  tops.push_back(generate_topology(sq, {{sq->object("w"), {sq->arrow("r"), sq->arrow("s")}}, {sq->object("z"), {sq->arrow("q")}}}).topology);
  for (const auto& J : tops)
    for (const auto& covers : J.covers)
      for (const Sieve& S : covers)
        for (const Sieve& R : covers) EXPECT_TRUE(J.covering(intersect(S, R)));
}

TEST(Topology, MissingMaximalSieve) {
  auto C = sites::open_site();
  GrothTopology J = open_cover_topology(C);
  auto& at2 = J.covers[static_cast<std::size_t>(C->object("2"))];
  at2.erase(std::find(at2.begin(), at2.end(), maximal_sieve(*C, C->object("2"))));
  auto v = validate_topology(J);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->axiom, "maximality");
}

TEST(Topology, UnstableEmptyCover) {
  auto C = sites::open_site();
  GrothTopology J = trivial_topology(C);
  J.covers[static_cast<std::size_t>(C->object("1"))].push_back(named(*C, "1", {}));
  J = topology_from_sieves(C, J.covers);
  auto v = validate_topology(J);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->axiom, "stability");
}

TEST(Topology, NotTransitive) {
  auto C = sites::open_site();
  GrothTopology J = trivial_topology(C);
  J.covers[static_cast<std::size_t>(C->object("0"))].push_back(named(*C, "0", {}));
  J.covers[static_cast<std::size_t>(C->object("1"))].push_back(named(*C, "1", {"0<1"}));
  J = topology_from_sieves(C, J.covers);
  auto v = validate_topology(J);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->axiom, "transitivity");
}

TEST(SliceTopology, TrivialStaysTrivial) {
  for (const auto& [name, C] : corpus::shipped_bases()) {
    auto slices = slice_system(C);
    for (const auto& s : slices->slices) EXPECT_EQ(slice_topology(trivial_topology(C), s), trivial_topology(s.category)) << name;
  }
}

TEST(SliceTopology, JointCoverOverIdentity) {
  auto C = sites::open_site();
  auto slices = slice_system(C);
  const Slice& s = slices->at(C->object("12"));
  const GrothTopology Js = slice_topology(open_cover_topology(C), s);
  const Obj top = s.object_for(C->identity(C->object("12")));
  Sieve lifted{top, {}};
  for (const std::string a : {"0<12", "1<12", "2<12"}) lifted.arrows.push_back(s.arrow_for(C->arrow(a), C->identity(C->object("12"))));
  std::sort(lifted.arrows.begin(), lifted.arrows.end());
  EXPECT_TRUE(Js.covering(lifted));
  EXPECT_TRUE(Js.covering(maximal_sieve(*s.category, top)));
}

TEST(SliceTopology, ValidAndStableUnderPostcomposition) {
  auto C = sites::open_site();
  const GrothTopology J = open_cover_topology(C);
  auto slices = slice_system(C);
  const auto Js = slice_topologies(J, *slices);
  for (const auto& T : Js) EXPECT_FALSE(validate_topology(T));
  for (std::size_t f = 0; f < C->arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    const FinFunctor P = slices->postcompose(fa);
    const GrothTopology& from = Js[static_cast<std::size_t>(C->dom(fa))];
    const GrothTopology& to = Js[static_cast<std::size_t>(C->cod(fa))];
    for (std::size_t x = 0; x < P.source->object_count(); ++x)
      for (const Sieve& S : all_sieves(*P.source, static_cast<Obj>(x))) {
        std::vector<Arr> image;
        for (Arr a : S.arrows) image.push_back(P.on_arrows[static_cast<std::size_t>(a)]);
        const Sieve pushed = sieve_generate(*P.target, P.on_objects[x], image);
        EXPECT_EQ(from.covering(S), to.covering(pushed)) << C->arrow_name(fa);
      }
  }
}

TEST(MatchingFamilies, MaximalSieveMatchesSections) {
  for (const auto& Z : corpus::open_presheaves(12))
    for (std::size_t c = 0; c < Z.base->object_count(); ++c) {
      const auto ms = matching_families(Z, maximal_sieve(*Z.base, static_cast<Obj>(c)));
      EXPECT_EQ(ms.size(), Z.size(static_cast<Obj>(c)));
      for (const auto& m : ms) EXPECT_EQ(amalgamations(Z, m).size(), 1u);
    }
}

TEST(MatchingFamilies, EmptySieveHasOneFamily) {
  for (const auto& Z : corpus::open_presheaves(12)) {
    const Obj c = Z.base->object("12");
    const auto ms = matching_families(Z, Sieve{c, {}});
    ASSERT_EQ(ms.size(), 1u);
    EXPECT_EQ(amalgamations(Z, ms[0]).size(), Z.size(c));
  }
}

TEST(MatchingFamilies, IndependentChoicesOnJointCover) {
  auto C = sites::open_site();
  const Sieve joint = named(*C, "12", {"0<12", "1<12", "2<12"});
  const SetPresheaf Z = open_presheaf(C, {{"0", {"*"}}, {"1", {"0", "1"}}, {"2", {"0", "1"}}, {"12", {"0", "1"}}});
  EXPECT_EQ(matching_families(Z, joint).size(), brute_matching_count(Z, joint));
  EXPECT_EQ(matching_families(Z, joint).size(), 4u);
}

TEST(MatchingFamilies, ConstantOnEmptyOpenCouplesChoices) {
  auto C = sites::open_site();
  const Sieve joint = named(*C, "12", {"0<12", "1<12", "2<12"});
  const SetPresheaf Z = open_presheaf(C, {{"0", {"0", "1"}}, {"1", {"0", "1"}}, {"2", {"0", "1"}}, {"12", {"0", "1"}}});
  EXPECT_EQ(matching_families(Z, joint).size(), brute_matching_count(Z, joint));
  EXPECT_EQ(matching_families(Z, joint).size(), 2u);
}

TEST(MatchingFamilies, AgreeWithBruteForceOnCorpus) {
  auto C = sites::open_site();
  for (const auto& Z : corpus::open_presheaves())
    for (std::size_t c = 0; c < C->object_count(); ++c)
      for (const Sieve& S : all_sieves(*C, static_cast<Obj>(c))) EXPECT_EQ(matching_families(Z, S).size(), brute_matching_count(Z, S));
}

TEST(Sheaf, TerminalIsSheafEverywhere) {
  for (const auto& [name, C] : corpus::shipped_bases()) {
    EXPECT_TRUE(is_sheaf(terminal_set_functor<Variance::contravariant>(C), trivial_topology(C)).holds) << name;
  }
  auto C = sites::open_site();
  EXPECT_TRUE(is_sheaf(terminal_set_functor<Variance::contravariant>(C), open_cover_topology(C)).holds);
}

TEST(Sheaf, RepresentablesOnOpens) {
  auto C = sites::open_site();
  for (std::size_t c = 0; c < C->object_count(); ++c) EXPECT_TRUE(is_sheaf(hom_presheaf(C, static_cast<Obj>(c)), open_cover_topology(C)).holds);
}

TEST(Sheaf, TwoOverWholeNotSeparated) {
  auto C = sites::open_site();
  const SheafReport r = is_separated(two_over_whole(C), open_cover_topology(C));
  EXPECT_FALSE(r.holds);
  EXPECT_NE(r.witness.find("2 amalgamations"), std::string::npos);
}

TEST(Sheaf, AgreesWithDiscreteOracle) {
  auto C = sites::open_site();
  const GrothTopology J = open_cover_topology(C);
  std::size_t sheaves = 0;
  for (const auto& Z : corpus::open_presheaves()) {
    const bool sheaf = is_sheaf(Z, J).holds;
    EXPECT_EQ(sheaf, discrete_sheaf_oracle(Z));
    if (sheaf) {
      EXPECT_TRUE(is_separated(Z, J).holds);
    }
    sheaves += sheaf;
  }
  EXPECT_GT(sheaves, 0u);
}

TEST(Plus, TwoOverWholeCollapses) {
  auto C = sites::open_site();
  const PlusResult p = plus(two_over_whole(C), open_cover_topology(C));
  EXPECT_EQ(p.presheaf.size(C->object("12")), 1u);
  EXPECT_EQ(p.unit(C->object("12"), 0), p.unit(C->object("12"), 1));
  EXPECT_TRUE(is_sheaf(sheafify(two_over_whole(C), open_cover_topology(C)).presheaf, open_cover_topology(C)).holds);
}

TEST(Plus, TerminalFixed) {
  for (const auto& [name, C] : corpus::shipped_bases()) {
    const auto one = terminal_set_functor<Variance::contravariant>(C);
    EXPECT_EQ(plus(one, trivial_topology(C)).presheaf, one) << name;
  }
  auto C = sites::open_site();
  const auto one = terminal_set_functor<Variance::contravariant>(C);
  EXPECT_EQ(plus(one, open_cover_topology(C)).presheaf, one);
}

TEST(Plus, SheafIsFixedPoint) {
  auto C = sites::open_site();
  const GrothTopology J = open_cover_topology(C);
  for (std::size_t c = 0; c < C->object_count(); ++c) {
    const SetPresheaf R = hom_presheaf(C, static_cast<Obj>(c));
    const PlusResult s = sheafify(R, J);
    EXPECT_TRUE(is_set_iso(s.unit));
    EXPECT_EQ(s.presheaf, R);
  }
}

TEST(Plus, OutputIsSeparated) {
  auto C = sites::open_site();
  const GrothTopology J = open_cover_topology(C);
  for (const auto& Z : corpus::open_presheaves(20)) EXPECT_TRUE(is_separated(plus(Z, J).presheaf, J).holds);
}

// Sheafification on a discrete space: sections over U are tuples of
// sections over the points of U.
TEST(Sheafify, MatchesStalkFormula) {
  auto C = sites::open_site();
  const GrothTopology J = open_cover_topology(C);
  const auto corpus = corpus::open_presheaves();
  EXPECT_GE(corpus.size(), 30u);
  for (const auto& Z : corpus) {
    const PlusResult s = sheafify(Z, J);
    const std::size_t n1 = Z.size(C->object("1")), n2 = Z.size(C->object("2"));
    EXPECT_TRUE(is_sheaf(s.presheaf, J).holds);
    EXPECT_EQ(s.presheaf.size(C->object("0")), 1u);
    EXPECT_EQ(s.presheaf.size(C->object("1")), n1);
    EXPECT_EQ(s.presheaf.size(C->object("2")), n2);
    EXPECT_EQ(s.presheaf.size(C->object("12")), n1 * n2);
    EXPECT_EQ(is_set_iso(s.unit), discrete_sheaf_oracle(Z));
  }
}

TEST(Sheafify, UnitInjectiveIffSeparated) {
  auto C = sites::open_site();
  const GrothTopology J = open_cover_topology(C);
  for (const auto& Z : corpus::open_presheaves()) {
    const PresheafNat u = sheafify(Z, J).unit;
    bool injective = true;
    for (const auto& comp : u.components) injective = injective && std::set<int>(comp.begin(), comp.end()).size() == comp.size();
    EXPECT_EQ(injective, is_separated(Z, J).holds);
  }
}
