#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <string>

#include "corpus.hpp"
#include "fixtures.hpp"
#include "tck/stacks.hpp"

using namespace tck;

namespace {

Sieve joint_cover(const FinCat& C) { return sieve_generate(C, C.object("12"), {C.arrow("1<12"), C.arrow("2<12")}); }

// Constant presheaf at a category, on the opens.
PresheafRef constant_on_opens(const CatRef& value) { return fixtures::constant(sites::open_site(), value); }

// Two sections over "1", one over every other open.
SetPresheaf split_point(const CatRef& C) {
  std::vector<std::vector<std::string>> elements(C->object_count(), {"*"});
  elements[static_cast<std::size_t>(C->object("1"))] = {"0", "1"};
  std::vector<std::vector<int>> action(C->arrow_count());
  for (std::size_t f = 0; f < C->arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    action[f].assign(elements[static_cast<std::size_t>(C->cod(fa))].size(), 0);
    if (C->is_identity(fa)) std::iota(action[f].begin(), action[f].end(), 0);
  }
  return make_set_functor<Variance::contravariant>(C, elements, action);
}

// Matching family of Z on S read off a descent datum of discrete(Z).
MatchingFamily family_of(const DescentDatum& d) {
  MatchingFamily m{d.sieve, {}};
  for (Arr f : d.sieve.arrows) m.values.push_back(d.object(f));
  return m;
}

}  // namespace

TEST(Descent, InducedIsValid) {
  auto C = sites::open_site();
  const GrothTopology J = open_cover_topology(C);
  for (const auto& F : {constant_on_opens(fixtures::involution()), fixtures::idempotent_over_whole(), representable(C, C->object("12"))})
    for (std::size_t c = 0; c < C->object_count(); ++c)
      for (const Sieve& S : J.covers[c])
        for (std::size_t M = 0; M < F->at(static_cast<Obj>(c)).object_count(); ++M)
          EXPECT_FALSE(descent_defect(induced_datum(F, S, static_cast<Obj>(M))));
}

TEST(Descent, EmptySieveIsVacuous) {
  auto C = sites::open_site();
  auto F = fixtures::idempotent_over_whole();
  const DescentDatum d{F, Sieve{C->object("12"), {}}, {}, {}};
  EXPECT_FALSE(descent_defect(d));
  EXPECT_EQ(effectiveness(d).size(), F->at(C->object("12")).object_count());
}

TEST(Descent, MismatchedIsoBreaksCocycle) {
  auto C = sites::open_site();
  auto Z2 = fixtures::involution();
  auto F = constant_on_opens(Z2);
  DescentDatum d = induced_datum(F, joint_cover(*C), 0);
  d.isos[{C->arrow("0<12"), C->identity(C->object("0"))}] = Z2->arrow("s");
  const auto e = descent_defect(d);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind, ErrorKind::CocycleViolation);
  try {
    validate_descent(d);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::CocycleViolation);
  }
}

TEST(Descent, TwistedInvolutionIsEffective) {
  auto C = sites::open_site();
  auto Z2 = fixtures::involution();
  auto F = constant_on_opens(Z2);
  DescentDatum d = induced_datum(F, joint_cover(*C), 0);
  d.isos[{C->arrow("1<12"), C->arrow("0<1")}] = Z2->arrow("s");
  ASSERT_FALSE(descent_defect(d));
  const auto ws = effectiveness(d);
  // ψ over "1<12" is free, the others follow
  EXPECT_EQ(ws.size(), 2u);
  for (const auto& w : ws) EXPECT_FALSE(witness_defect(d, w));
}

TEST(Descent, DiscreteDataAreMatchingFamilies) {
  auto C = sites::open_site();
  for (const auto& Z : corpus::open_presheaves(20)) {
    auto F = discrete_presheaf(Z);
    for (std::size_t c = 0; c < C->object_count(); ++c)
      for (const Sieve& S : all_sieves(*C, static_cast<Obj>(c))) {
        Budget budget;
        const auto data = enumerate_descent_data(F, S, budget);
        EXPECT_EQ(data.size(), matching_families(Z, S).size());
        for (const auto& d : data) EXPECT_EQ(effectiveness(d).size(), amalgamations(Z, family_of(d)).size());
      }
  }
}

TEST(Effectiveness, InducedHasItsObject) {
  auto C = sites::open_site();
  const GrothTopology J = open_cover_topology(C);
  auto F = constant_on_opens(fixtures::involution());
  for (std::size_t c = 0; c < C->object_count(); ++c)
    for (const Sieve& S : J.covers[c]) {
      const DescentDatum d = induced_datum(F, S, 0);
      const auto ws = effectiveness(d);
      EXPECT_TRUE(std::any_of(ws.begin(), ws.end(), [](const EffectivenessWitness& w) { return w.object == 0; }));
    }
}

TEST(Effectiveness, LocalSectionsThatDoNotGlue) {
  auto C = sites::open_site();
  auto F = discrete_presheaf(split_point(C));
  const Sieve S = joint_cover(*C);
  DescentDatum d = induced_datum(F, S, 0);
  d.objects[C->arrow("1<12")] = F->at(C->object("1")).object("1");
  d.isos[{C->arrow("1<12"), C->identity(C->object("1"))}] = F->at(C->object("1")).identity(d.objects[C->arrow("1<12")]);
  ASSERT_FALSE(descent_defect(d));
  EXPECT_TRUE(effectiveness(d).empty());
}

TEST(CheckStack, TrivialTopologyAlwaysStack) {
  std::vector<PresheafRef> Fs = corpus::nonrepresentable();
  for (const auto& [name, C] : corpus::shipped_bases()) Fs.push_back(representable(C, 0));
  Fs.push_back(constant_on_opens(fixtures::involution()));
  Fs.push_back(fixtures::idempotent_over_whole());
  for (const auto& F : Fs) EXPECT_TRUE(check_stack(F, trivial_topology(F->site)).holds());
}

TEST(CheckStack, RepresentablesOnOpens) {
  auto C = sites::open_site();
  for (std::size_t c = 0; c < C->object_count(); ++c) EXPECT_TRUE(check_stack(representable(C, static_cast<Obj>(c)), open_cover_topology(C)).holds());
}

TEST(CheckStack, IdempotentFailsUniqueness) {
  auto C = sites::open_site();
  const StackReport r = check_stack(fixtures::idempotent_over_whole(), open_cover_topology(C));
  EXPECT_EQ(r.uniqueness.verdict, Verdict::fails);
  EXPECT_NE(r.uniqueness.witness.find("'e'"), std::string::npos);
  EXPECT_EQ(r.morphisms.verdict, Verdict::holds);
  EXPECT_EQ(r.objects.verdict, Verdict::holds);
}

TEST(CheckStack, ConstantInvolutionFailsOverEmptyOpen) {
  auto C = sites::open_site();
  const StackReport r = check_stack(constant_on_opens(fixtures::involution()), open_cover_topology(C));
  EXPECT_EQ(r.uniqueness.verdict, Verdict::fails);
  EXPECT_NE(r.uniqueness.witness.find("{} on '0'"), std::string::npos);
}

TEST(CheckStack, DiscreteStackIffSheaf) {
  auto C = sites::open_site();
  const GrothTopology J = open_cover_topology(C);
  for (const auto& Z : corpus::open_presheaves(25)) EXPECT_EQ(check_stack(discrete_presheaf(Z), J).holds(), is_sheaf(Z, J).holds);
}

TEST(CheckStack, BoundIsReported) {
  auto C = sites::open_site();
  const StackReport r = check_stack(representable(C, C->object("12")), open_cover_topology(C), 3);
  EXPECT_TRUE(r.bounded());
  EXPECT_FALSE(r.holds());
  EXPECT_NE(r.objects.witness.find("bound of 3"), std::string::npos);
}

TEST(Ell, IdentityOfStackFactors) {
  auto C = sites::open_site();
  auto slices = slice_system(C);
  const GrothTopology J = open_cover_topology(C);
  for (std::size_t c = 0; c < C->object_count(); ++c) {
    const MapToOmegaJ z = char_stacks(slices, identity_dopf_pre(representable(C, static_cast<Obj>(c))), J);
    for (const auto& row : z.map.object_part)
      for (const auto& Z : row)
        for (std::size_t x = 0; x < Z.elements.size(); ++x) EXPECT_EQ(Z.size(static_cast<Obj>(x)), 1u);
  }
}

TEST(Ell, SheafValuedOpfibrationsFactorAndRoundTrip) {
  auto C = sites::open_site();
  auto slices = slice_system(C);
  const GrothTopology J = open_cover_topology(C);
  std::vector<SetPresheaf> sheaves;
  for (const auto& Z : corpus::open_presheaves(60))
    if (is_sheaf(Z, J).holds) sheaves.push_back(Z);
  ASSERT_GE(sheaves.size(), 2u);
  std::size_t tried = 0;
  for (const auto& A : sheaves)
    for (const auto& B : sheaves)
      for (const auto& t : corpus::thin(enumerate_set_nats(A, B), 2)) {
        const DiscOpfibPre phi = certify_dopf_pre(discrete_two_nat(t));
        const MapToOmegaJ z = char_stacks(slices, phi, J);
        EXPECT_FALSE(z.attested);
        EXPECT_TRUE(fib_iso(classify(z.map), phi));
        ++tried;
      }
  EXPECT_GT(tried, 0u);
}

TEST(Ell, NonSheafValueIsPinpointed) {
  auto C = sites::open_site();
  auto slices = slice_system(C);
  const GrothTopology J = open_cover_topology(C);
  const Obj top = C->object("12");
  const GrothTopology Jc = slice_topology(J, slices->at(top));
  SetPresheaf bad;
  for (const auto& Z : corpus::slice_presheaves(slices, top, 200))
    if (!is_sheaf(Z, Jc).holds) {
      bad = Z;
      break;
    }
  ASSERT_TRUE(bad.base);
  const DiscOpfibPre phi = j_forward(slices, top, bad);
  const EllReport r = ell_factors(characteristic(slices, phi), J);
  EXPECT_FALSE(r.factor);
  EXPECT_NE(r.witness.find("not a sheaf"), std::string::npos);
  for (bool attest : {false, true}) {
    try {
      char_stacks(slices, phi, J, attest);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::FactorizationFailed);
    }
  }
}

TEST(CharStacks, PointSiteIsTheCatCase) {
  auto P = sites::point();
  auto slices = slice_system(P);
  const GrothTopology J = trivial_topology(P);
  Budget budget;
  for (const auto& w : corpus::thin(enumerate_set_functors<Variance::covariant>(sites::walking_arrow(), 2, budget), 8)) {
    const DiscOpfibPre phi = classify(map_over_point(slices, w));
    const MapToOmegaJ z = char_stacks(slices, phi, J);
    const FinSetFunctor back = set_functor_over_point(z.map);
    EXPECT_TRUE(set_natural_iso(back, w));
  }
}

TEST(OmegaProbe, InducedDatumGivesBackTheSheaf) {
  auto C = sites::open_site();
  auto slices = slice_system(C);
  const GrothTopology J = open_cover_topology(C);
  for (std::size_t c = 0; c < C->object_count(); ++c)
    for (const Sieve& S : J.covers[c])
      for (const SetPresheaf& M : corpus::slice_sheaves(slices, J, static_cast<Obj>(c), 3)) {
        const OmegaProbeResult r = omega_J_probe(induced_omega_datum(slices, S, M), J);
        ASSERT_TRUE(r.ok) << r.failure;
        EXPECT_TRUE(set_natural_iso(*r.M, M));
      }
}

TEST(OmegaProbe, GluesIndependentLocalSheaves) {
  auto C = sites::open_site();
  auto slices = slice_system(C);
  const GrothTopology J = open_cover_topology(C);
  const Obj top = C->object("12");
  const Slice& s12 = slices->at(top);
  std::size_t glued = 0;
  for (const auto& d : corpus::omega_descent_data(slices, J)) {
    if (d.sieve.at != top || is_maximal(*C, d.sieve)) continue;
    const OmegaProbeResult r = omega_J_probe(d, J);
    ASSERT_TRUE(r.ok) << r.failure;
    const SetPresheaf& A = d.object(C->arrow("1<12"));
    const SetPresheaf& B = d.object(C->arrow("2<12"));
    const std::size_t a = A.size(slices->at(C->object("1")).terminal()), b = B.size(slices->at(C->object("2")).terminal());
    EXPECT_EQ(r.M->size(s12.terminal()), a * b);
    EXPECT_TRUE(r.Z->elements[static_cast<std::size_t>(s12.terminal())].empty());
    ++glued;
  }
  EXPECT_GE(glued, 4u);
}

TEST(OmegaProbe, EmptySieveIsVacuous) {
  auto C = sites::open_site();
  auto slices = slice_system(C);
  const GrothTopology J = open_cover_topology(C);
  const OmegaDescentDatum d{slices, Sieve{C->object("0"), {}}, {}, {}};
  const OmegaProbeResult r = omega_J_probe(d, J);
  ASSERT_TRUE(r.ok) << r.failure;
  EXPECT_TRUE(r.psi.empty());
  EXPECT_TRUE(is_sheaf(*r.M, slice_topology(J, slices->at(C->object("0")))).holds);
}

TEST(OmegaProbe, CorpusPassesWithCompatibleIsos) {
  auto C = sites::open_site();
  auto slices = slice_system(C);
  const GrothTopology J = open_cover_topology(C);
  const auto data = corpus::omega_descent_data(slices, J);
  EXPECT_GE(data.size(), 10u);
  for (const auto& d : data) {
    ASSERT_FALSE(omega_descent_defect(d, J));
    const OmegaProbeResult r = omega_J_probe(d, J);
    ASSERT_TRUE(r.ok) << r.failure;
    for (auto [f, g] : descent_pairs(*C, d.sieve))
      EXPECT_EQ(vertical(d.iso(f, g), slices->reindex(r.psi.at(f), g)).components, r.psi.at(C->compose(f, g)).components);
  }
}

TEST(OmegaProbe, BrokenCocycleRejected) {
  auto C = sites::open_site();
  auto slices = slice_system(C);
  const GrothTopology J = open_cover_topology(C);
  for (const auto& d : corpus::omega_descent_data(slices, J)) {
    // swap the two sections over id_12 when there are two
    const Arr id = C->identity(C->object("12"));
    if (!d.objects.count(id)) continue;
    const SetPresheaf& M = d.object(id);
    auto autos = enumerate_set_nats(M, M);
    auto it = std::find_if(autos.begin(), autos.end(), [](const PresheafNat& t) { return is_set_iso(t) && !(t == identity_set_nat(t.source)); });
    if (it == autos.end()) continue;
    OmegaDescentDatum broken = d;
    broken.isos.at({id, id}) = vertical(*it, d.iso(id, id));
    const auto e = omega_descent_defect(broken, J);
    ASSERT_TRUE(e);
    EXPECT_EQ(e->kind, ErrorKind::CocycleViolation);
    EXPECT_FALSE(omega_J_probe(broken, J).ok);
    return;
  }
  FAIL() << "no datum with a non-trivial automorphism";
}

TEST(OmegaGlue, MorphismsGlueUniquely) {
  auto C = sites::open_site();
  auto slices = slice_system(C);
  const GrothTopology J = open_cover_topology(C);
  const Obj top = C->object("12");
  const Sieve S = joint_cover(*C);
  const auto sheaves = corpus::slice_sheaves(slices, J, top, 4);
  for (const auto& M : sheaves)
    for (const auto& N : sheaves)
      for (const auto& t : enumerate_set_nats(M, N)) {
        std::map<Arr, PresheafNat> alpha;
        for (Arr f : S.arrows) alpha.emplace(f, slices->reindex(t, f));
        const auto lambda = omega_glue_morphisms(slices, S, M, N, alpha);
        ASSERT_TRUE(lambda);
        EXPECT_EQ(lambda->components, t.components);
        std::size_t restricting = 0;
        for (const auto& k : enumerate_set_nats(M, N)) {
          bool same = true;
          for (Arr f : S.arrows) same = same && slices->reindex(k, f).components == alpha.at(f).components;
          restricting += same;
        }
        EXPECT_EQ(restricting, 1u);
      }
}
