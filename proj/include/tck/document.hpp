#pragma once

// The text format: named blocks, one statement per line, closed by `end`.
// Every cross-reference must name a section defined earlier in the file or
// in an imported file. Parsing validates each section with the module
// validators; serialization is canonical (sections grouped by kind, names
// and table rows sorted), so serialize∘parse is byte-stable.
//
//   category NAME                      functor NAME SOURCE TARGET
//     objects a b                        object a x
//     arrow u a b                        arrow u f
//     identity a one_a                 end
//     compose g f h    # g∘f = h
//     freely-generate                  presheaf NAME SITE
//   end                                  value c CATEGORY
//                                        restrict f FUNCTOR
//   set-presheaf NAME SITE [over c]    end
//     set x e1 e2
//     act f y1 y2      # images of the sorted elements of the source set
//   end
//
//   nat NAME SOURCE TARGET             two-nat NAME SOURCE TARGET
//     component x y1 y2                  component c FUNCTOR
//   end                                end
//
//   map NAME PRESHEAF                  topology NAME SITE [exact]
//     value c X SET-PRESHEAF             cover c f1 f2
//     arrow c nu x y1 y2               end
//   end
//                                      sieve NAME SITE c
//   descent NAME PRESHEAF SIEVE          arrows f1 f2
//     object f X                       end
//     iso f g a
//   end                                omega-descent NAME TOPOLOGY SIEVE
//                                        object f SET-PRESHEAF
//   import other.site                    iso f g x y1 y2
//                                      end
//
// Identity arrows, identity restrictions, identity actions and components
// over empty sets may be omitted. Topologies are saturated from their
// families unless marked `exact`.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tck/classifier.hpp"
#include "tck/core.hpp"
#include "tck/fincat.hpp"
#include "tck/functor.hpp"
#include "tck/prestack.hpp"
#include "tck/setfunctor.hpp"
#include "tck/site.hpp"
#include "tck/slice.hpp"
#include "tck/stacks.hpp"

namespace tck {

struct FunctorEntry {
  std::string source, target;
  FinFunctor value;
};

struct PresheafEntry {
  std::string site;
  std::vector<std::string> values;        // per object of the site
  std::vector<std::string> restrictions;  // per arrow, empty for identities
  PresheafRef value;
};

struct SetPresheafEntry {
  std::string site;
  std::optional<Obj> over;  // set: a presheaf on the slice over this object
  SetPresheaf value;
};

struct NatEntry {
  std::string source, target;
  PresheafNat value;
};

struct TwoNatEntry {
  std::string source, target;
  std::vector<std::string> components;
  TwoNat value;
};

struct MapEntry {
  std::string source;
  std::vector<std::vector<std::string>> values;  // [c][X]
  MapToOmega value;
};

struct TopologyEntry {
  std::string site;
  bool exact = false;
  std::vector<std::pair<Obj, std::vector<Arr>>> families;
  GrothTopology value;
  std::size_t added = 0;
};

struct SieveEntry {
  std::string site;
  Sieve value;
};

struct DescentEntry {
  std::string presheaf, sieve;
  DescentDatum value;
};

struct OmegaDescentEntry {
  std::string topology, sieve;
  std::map<Arr, std::string> objects;
  OmegaDescentDatum value;
};

class Document {
 public:
  std::map<std::string, CatRef> categories;
  std::map<std::string, FunctorEntry> functors;
  std::map<std::string, PresheafEntry> presheaves;
  std::map<std::string, SetPresheafEntry> set_presheaves;
  std::map<std::string, NatEntry> nats;
  std::map<std::string, TwoNatEntry> two_nats;
  std::map<std::string, MapEntry> maps;
  std::map<std::string, TopologyEntry> topologies;
  std::map<std::string, SieveEntry> sieves;
  std::map<std::string, DescentEntry> descents;
  std::map<std::string, OmegaDescentEntry> omega_descents;

  // The kind of the section holding a name, if any.
  std::optional<std::string> kind_of(const std::string& name) const {
    auto it = kinds_.find(name);
    if (it == kinds_.end()) return std::nullopt;
    return it->second;
  }
  void claim(const std::string& name, const std::string& kind) { kinds_[name] = kind; }

  std::string fresh(const std::string& hint) const {
    if (!kinds_.count(hint)) return hint;
    for (int i = 2;; ++i) {
      const std::string n = cat(hint, "~", i);
      if (!kinds_.count(n)) return n;
    }
  }

  // Slices of a site, built once per site so slice presheaves share bases.
  const SlicesRef& slices(const std::string& site) const {
    auto it = slices_.find(site);
    if (it == slices_.end()) it = slices_.emplace(site, slice_system(categories.at(site))).first;
    return it->second;
  }

  // Name of a category equal to C, if the document has one.
  std::optional<std::string> category_name(const CatRef& C) const {
    for (const auto& [n, D] : categories)
      if (D == C) return n;
    for (const auto& [n, D] : categories)
      if (*D == *C) return n;
    return std::nullopt;
  }

  std::string put(const CatRef& C, const std::string& hint) {
    if (auto n = category_name(C)) return *n;
    const std::string n = fresh(hint);
    categories.emplace(n, C);
    claim(n, "category");
    return n;
  }

  std::string put(const FinFunctor& F, const std::string& hint) {
    const std::string s = put(F.source, hint + ".src");
    const std::string t = put(F.target, hint + ".tgt");
    for (const auto& [n, e] : functors)
      if (e.source == s && e.target == t && e.value == F) return n;
    const std::string n = fresh(hint);
    functors.emplace(n, FunctorEntry{s, t, F});
    claim(n, "functor");
    return n;
  }

  std::string put(const PresheafRef& P, const std::string& hint) {
    for (const auto& [n, e] : presheaves)
      if (shared_equal(e.value, P)) return n;
    const FinCat& C = *P->site;
    PresheafEntry e{put(P->site, hint + ".site"), {}, {}, P};
    for (std::size_t c = 0; c < C.object_count(); ++c) e.values.push_back(put(P->value(static_cast<Obj>(c)), cat(hint, ".", C.object_name(static_cast<Obj>(c)))));
    for (std::size_t f = 0; f < C.arrow_count(); ++f) {
      const Arr fa = static_cast<Arr>(f);
      e.restrictions.push_back(C.is_identity(fa) ? std::string() : put(P->restrict(fa), cat(hint, ".", C.arrow_name(fa))));
    }
    const std::string n = fresh(hint);
    presheaves.emplace(n, std::move(e));
    claim(n, "presheaf");
    return n;
  }

  // A presheaf on a site of the document, or on its slice over `over`.
  std::string put(const SetPresheaf& Z, const std::string& hint, const std::optional<std::pair<std::string, Obj>>& over = std::nullopt) {
    SetPresheafEntry e;
    if (over) {
      e.site = over->first;
      e.over = over->second;
    } else {
      e.site = put(Z.base, hint + ".site");
    }
    for (const auto& [n, o] : set_presheaves)
      if (o.site == e.site && o.over == e.over && o.value == Z) return n;
    e.value = Z;
    const std::string n = fresh(hint);
    set_presheaves.emplace(n, std::move(e));
    claim(n, "set-presheaf");
    return n;
  }

  std::string put(const PresheafNat& t, const std::string& hint) {
    const std::string s = put(t.source, hint + ".src");
    const std::string u = put(t.target, hint + ".tgt");
    const std::string n = fresh(hint);
    nats.emplace(n, NatEntry{s, u, t});
    claim(n, "nat");
    return n;
  }

  std::string put(const TwoNat& s, const std::string& hint) {
    TwoNatEntry e{put(s.source, hint + ".total"), put(s.target, hint + ".base"), {}, s};
    const FinCat& C = *s.source->site;
    for (std::size_t c = 0; c < C.object_count(); ++c) e.components.push_back(put(s[static_cast<Obj>(c)], cat(hint, ".", C.object_name(static_cast<Obj>(c)))));
    const std::string n = fresh(hint);
    two_nats.emplace(n, std::move(e));
    claim(n, "two-nat");
    return n;
  }

  std::string put(const MapToOmega& z, const std::string& hint) {
    MapEntry e{put(z.source, hint + ".source"), {}, z};
    const std::string site = put(z.site(), hint + ".site");
    const FinCat& C = *z.site();
    for (std::size_t c = 0; c < C.object_count(); ++c) {
      e.values.emplace_back();
      const FinCat& Fc = z.source->at(static_cast<Obj>(c));
      for (std::size_t X = 0; X < Fc.object_count(); ++X)
        e.values.back().push_back(put(z.at(static_cast<Obj>(c), static_cast<Obj>(X)),
                                      cat(hint, ".", C.object_name(static_cast<Obj>(c)), ".", Fc.object_name(static_cast<Obj>(X))),
                                      std::pair{site, static_cast<Obj>(c)}));
    }
    const std::string n = fresh(hint);
    maps.emplace(n, std::move(e));
    claim(n, "map");
    return n;
  }

  // Written out as the exact list of covering sieves.
  std::string put(const GrothTopology& J, const std::string& hint) {
    TopologyEntry e{put(J.cat, hint + ".site"), true, {}, J, 0};
    for (std::size_t c = 0; c < J.covers.size(); ++c)
      for (const Sieve& S : J.covers[c]) e.families.push_back({static_cast<Obj>(c), S.arrows});
    const std::string n = fresh(hint);
    topologies.emplace(n, std::move(e));
    claim(n, "topology");
    return n;
  }

  std::string put(const CatRef& site, const Sieve& S, const std::string& hint) {
    const std::string n = fresh(hint);
    sieves.emplace(n, SieveEntry{put(site, hint + ".site"), S});
    claim(n, "sieve");
    return n;
  }

  std::string put(const DescentDatum& d, const std::string& hint) {
    const std::string P = put(d.presheaf, hint + ".presheaf");
    const std::string S = put(d.presheaf->site, d.sieve, hint + ".sieve");
    const std::string n = fresh(hint);
    descents.emplace(n, DescentEntry{P, S, d});
    claim(n, "descent");
    return n;
  }

  std::string put(const OmegaDescentDatum& d, const std::string& topology, const std::string& hint) {
    const FinCat& C = *d.slices->site;
    const std::string site = put(d.slices->site, hint + ".site");
    OmegaDescentEntry e{topology, put(d.slices->site, d.sieve, hint + ".sieve"), {}, d};
    for (const auto& [f, M] : d.objects) e.objects.emplace(f, put(M, cat(hint, ".", C.arrow_name(f)), std::pair{site, C.dom(f)}));
    const std::string n = fresh(hint);
    omega_descents.emplace(n, std::move(e));
    claim(n, "omega-descent");
    return n;
  }

 private:
  std::map<std::string, std::string> kinds_;
  mutable std::map<std::string, SlicesRef> slices_;
};

bool operator==(const Document& a, const Document& b);

namespace detail {

struct Token {
  std::string text;
  std::size_t line = 0, col = 0;
};

struct Line {
  std::vector<Token> tokens;
  std::size_t number = 0;
  const Token& operator[](std::size_t i) const { return tokens[i]; }
  std::size_t size() const { return tokens.size(); }
};

inline std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string_view raw = text.substr(start, stop - start);
    ++number;
    Line line{{}, number};
    std::size_t i = 0;
    while (i < raw.size()) {
      if (raw[i] == ' ' || raw[i] == '\t' || raw[i] == '\r') {
        ++i;
        continue;
      }
      if (raw[i] == '#') break;
      std::size_t j = i;
      while (j < raw.size() && raw[j] != ' ' && raw[j] != '\t' && raw[j] != '\r') ++j;
      line.tokens.push_back(Token{std::string(raw.substr(i, j - i)), number, i + 1});
      i = j;
    }
    if (!line.tokens.empty()) out.push_back(std::move(line));
    start = stop + 1;
  }
  return out;
}

class Parser {
 public:
  Parser(Document& doc, std::string origin, std::filesystem::path base, std::set<std::filesystem::path>& active)
      : doc_(doc), origin_(std::move(origin)), base_(std::move(base)), active_(active) {}

  void run(std::string_view text) {
    lines_ = tokenize(text);
    while (pos_ < lines_.size()) {
      const Line& head = lines_[pos_++];
      const std::string& kw = head[0].text;
      if (kw == "import") {
        expect_size(head, 2, 2);
        import(head[1]);
        continue;
      }
      if (kw == "end") syntax(head[0], "'end' outside a block");
      const std::vector<Line> body = block(head);
      try {
        if (kw == "category") category(head, body);
        else if (kw == "functor") functor(head, body);
        else if (kw == "presheaf") presheaf(head, body);
        else if (kw == "set-presheaf") set_presheaf(head, body);
        else if (kw == "nat") nat(head, body);
        else if (kw == "two-nat") two_nat(head, body);
        else if (kw == "map") map(head, body);
        else if (kw == "topology") topology(head, body);
        else if (kw == "sieve") sieve(head, body);
        else if (kw == "descent") descent(head, body);
        else if (kw == "omega-descent") omega_descent(head, body);
        else syntax(head[0], cat("unknown section kind '", kw, "'"));
      } catch (const Error& e) {
        if (e.detail().rfind(origin_ + ":", 0) == 0) throw;
        throw Error(e.kind(), cat(where(head[0]), ": in ", kw, " '", head.size() > 1 ? head[1].text : "", "': ", e.detail()));
      }
    }
  }

 private:
  Document& doc_;
  std::string origin_;
  std::filesystem::path base_;
  std::set<std::filesystem::path>& active_;
  std::vector<Line> lines_;
  std::size_t pos_ = 0;

  std::string where(const Token& t) const { return cat(origin_, ":", t.line, ":", t.col); }

  [[noreturn]] void syntax(const Token& t, const std::string& msg) const { throw Error(ErrorKind::SyntaxError, cat(where(t), ": ", msg)); }
  [[noreturn]] void dangling(const Token& t, const std::string& what) const {
    throw Error(ErrorKind::DanglingReference, cat(where(t), ": unknown ", what, " '", t.text, "'"));
  }
  [[noreturn]] void invalid(const Token& t, const std::string& msg) const { throw Error(ErrorKind::InvariantViolation, cat(where(t), ": ", msg)); }

  void expect_size(const Line& l, std::size_t lo, std::size_t hi) const {
    if (l.size() < lo) syntax(l.tokens.back(), cat("'", l[0].text, "' needs at least ", lo - 1, " arguments"));
    if (l.size() > hi) syntax(l[hi], cat("'", l[0].text, "' takes at most ", hi - 1, " arguments"));
  }

  std::vector<Line> block(const Line& head) {
    std::vector<Line> body;
    while (pos_ < lines_.size()) {
      const Line& l = lines_[pos_++];
      if (l[0].text == "end") {
        expect_size(l, 1, 1);
        return body;
      }
      body.push_back(l);
    }
    syntax(head[0], cat("block '", head[0].text, "' is not closed by 'end'"));
  }

  void import(const Token& t) {
    const std::filesystem::path p = std::filesystem::weakly_canonical(base_ / t.text);
    if (active_.count(p)) syntax(t, cat("import cycle through '", t.text, "'"));
    std::ifstream in(p);
    if (!in) syntax(t, cat("cannot read '", t.text, "'"));
    std::stringstream ss;
    ss << in.rdbuf();
    active_.insert(p);
    Parser sub(doc_, p.string(), p.parent_path(), active_);
    sub.run(ss.str());
    active_.erase(p);
  }

  void name(const Token& t, const std::string& kind) {
    if (doc_.kind_of(t.text)) syntax(t, cat("name '", t.text, "' is already defined"));
    doc_.claim(t.text, kind);
  }

  const CatRef& need_category(const Token& t) const {
    auto it = doc_.categories.find(t.text);
    if (it == doc_.categories.end()) dangling(t, "category");
    return it->second;
  }
  Obj need_object(const FinCat& C, const Token& t) const {
    auto x = C.find_object(t.text);
    if (!x) dangling(t, "object");
    return *x;
  }
  Arr need_arrow(const FinCat& C, const Token& t) const {
    auto f = C.find_arrow(t.text);
    if (!f) dangling(t, "arrow");
    return *f;
  }
  template <typename Map>
  const typename Map::mapped_type& need(const Map& m, const Token& t, const char* what) const {
    auto it = m.find(t.text);
    if (it == m.end()) dangling(t, what);
    return it->second;
  }
  int need_label(const SetPresheaf& Z, Obj x, const Token& t) const {
    const int i = Z.find(x, t.text);
    if (i == none) dangling(t, "element");
    return i;
  }

  void category(const Line& head, const std::vector<Line>& body) {
    expect_size(head, 2, 2);
    RawCategory raw;
    bool free = false;
    std::set<std::string> objects, arrows;
    const Line* first_compose = nullptr;
    for (const Line& l : body) {
      const std::string& kw = l[0].text;
      if (kw == "objects") {
        for (std::size_t i = 1; i < l.size(); ++i) {
          if (!objects.insert(l[i].text).second) syntax(l[i], cat("object '", l[i].text, "' declared twice"));
          raw.objects.push_back(l[i].text);
        }
      } else if (kw == "arrow") {
        expect_size(l, 4, 4);
        if (!objects.count(l[2].text)) dangling(l[2], "object");
        if (!objects.count(l[3].text)) dangling(l[3], "object");
        if (!arrows.insert(l[1].text).second) syntax(l[1], cat("arrow '", l[1].text, "' declared twice"));
        raw.arrows.push_back({l[1].text, l[2].text, l[3].text});
      } else if (kw == "identity") {
        expect_size(l, 3, 3);
        if (!objects.count(l[1].text)) dangling(l[1], "object");
        raw.identities.push_back({l[1].text, l[2].text});
      } else if (kw == "compose") {
        expect_size(l, 4, 4);
        raw.composites.push_back({l[1].text, l[2].text, l[3].text});
        if (!first_compose) first_compose = &l;
      } else if (kw == "freely-generate") {
        expect_size(l, 1, 1);
        free = true;
      } else {
        syntax(l[0], cat("unexpected '", kw, "' in category"));
      }
    }
    // identities may be named without being declared as arrows
    std::set<std::string> known = arrows;
    std::set<std::string> named_ids;
    for (const auto& [x, a] : raw.identities) named_ids.insert(x);
    for (const auto& [x, a] : raw.identities) known.insert(a);
    for (const std::string& x : raw.objects)
      if (!named_ids.count(x)) known.insert("id_" + x);
    for (const Line& l : body)
      if (l[0].text == "compose")
        for (std::size_t i = 1; i < 4; ++i)
          if (!known.count(l[i].text)) dangling(l[i], "arrow");
    if (free && (first_compose || !raw.identities.empty()))
      syntax(first_compose ? (*first_compose)[0] : head[0], "a freely generated category takes no compose or identity lines");
    name(head[1], "category");
    doc_.categories.emplace(head[1].text, share(free ? free_category(raw.objects, raw.arrows) : build_category(raw)));
  }

  void functor(const Line& head, const std::vector<Line>& body) {
    expect_size(head, 4, 4);
    const CatRef& A = need_category(head[2]);
    const CatRef& B = need_category(head[3]);
    FinFunctor F{A, B, std::vector<Obj>(A->object_count(), none), std::vector<Arr>(A->arrow_count(), none)};
    for (const Line& l : body) {
      expect_size(l, 3, 3);
      if (l[0].text == "object") F.on_objects[static_cast<std::size_t>(need_object(*A, l[1]))] = need_object(*B, l[2]);
      else if (l[0].text == "arrow") F.on_arrows[static_cast<std::size_t>(need_arrow(*A, l[1]))] = need_arrow(*B, l[2]);
      else syntax(l[0], cat("unexpected '", l[0].text, "' in functor"));
    }
    for (std::size_t x = 0; x < A->object_count(); ++x) {
      if (F.on_objects[x] == none) invalid(head[1], cat("object '", A->object_name(static_cast<Obj>(x)), "' is not mapped"));
      auto& id = F.on_arrows[static_cast<std::size_t>(A->identity(static_cast<Obj>(x)))];
      if (id == none) id = B->identity(F.on_objects[x]);
    }
    for (std::size_t f = 0; f < A->arrow_count(); ++f)
      if (F.on_arrows[f] == none) invalid(head[1], cat("arrow '", A->arrow_name(static_cast<Arr>(f)), "' is not mapped"));
    check_functor(F);
    name(head[1], "functor");
    doc_.functors.emplace(head[1].text, FunctorEntry{head[2].text, head[3].text, std::move(F)});
  }

  void presheaf(const Line& head, const std::vector<Line>& body) {
    expect_size(head, 3, 3);
    const CatRef& C = need_category(head[2]);
    PresheafEntry e{head[2].text, std::vector<std::string>(C->object_count()), std::vector<std::string>(C->arrow_count()), nullptr};
    std::vector<CatRef> values(C->object_count());
    std::vector<std::optional<FinFunctor>> res(C->arrow_count());
    for (const Line& l : body) {
      expect_size(l, 3, 3);
      if (l[0].text == "value") {
        const Obj c = need_object(*C, l[1]);
        values[static_cast<std::size_t>(c)] = need_category(l[2]);
        e.values[static_cast<std::size_t>(c)] = l[2].text;
      } else if (l[0].text == "restrict") {
        const Arr f = need_arrow(*C, l[1]);
        res[static_cast<std::size_t>(f)] = need(doc_.functors, l[2], "functor").value;
        e.restrictions[static_cast<std::size_t>(f)] = l[2].text;
      } else {
        syntax(l[0], cat("unexpected '", l[0].text, "' in presheaf"));
      }
    }
    for (std::size_t c = 0; c < values.size(); ++c)
      if (!values[c]) invalid(head[1], cat("no value at '", C->object_name(static_cast<Obj>(c)), "'"));
    std::vector<FinFunctor> restrictions;
    for (std::size_t f = 0; f < res.size(); ++f) {
      const Arr fa = static_cast<Arr>(f);
      if (res[f]) {
        restrictions.push_back(*res[f]);
      } else if (C->is_identity(fa)) {
        restrictions.push_back(identity_functor(values[static_cast<std::size_t>(C->dom(fa))]));
      } else {
        invalid(head[1], cat("no restriction along '", C->arrow_name(fa), "'"));
      }
    }
    // identity restrictions are left implicit in canonical form
    for (std::size_t f = 0; f < res.size(); ++f)
      if (C->is_identity(static_cast<Arr>(f)) && is_identity_functor(restrictions[f])) e.restrictions[f].clear();
    e.value = make_presheaf(C, std::move(values), std::move(restrictions));
    name(head[1], "presheaf");
    doc_.presheaves.emplace(head[1].text, std::move(e));
  }

  // Reads `set` and `act` lines into a presheaf on `base`.
  SetPresheaf set_tables(const Token& who, const CatRef& base, const std::vector<Line>& body, const char* set_kw, const char* act_kw) {
    const FinCat& B = *base;
    std::vector<std::optional<std::vector<std::string>>> sets(B.object_count());
    for (const Line& l : body) {
      if (l[0].text != set_kw) continue;
      expect_size(l, 2, l.size());
      const Obj x = need_object(B, l[1]);
      if (sets[static_cast<std::size_t>(x)]) syntax(l[1], cat("set at '", l[1].text, "' given twice"));
      std::vector<std::string> e;
      for (std::size_t i = 2; i < l.size(); ++i) e.push_back(l[i].text);
      std::sort(e.begin(), e.end());
      for (std::size_t i = 1; i < e.size(); ++i)
        if (e[i] == e[i - 1]) invalid(l[1], cat("element '", e[i], "' listed twice"));
      sets[static_cast<std::size_t>(x)] = std::move(e);
    }
    SetPresheaf Z{base, {}, {}};
    for (std::size_t x = 0; x < sets.size(); ++x) {
      if (!sets[x]) invalid(who, cat("no set at '", B.object_name(static_cast<Obj>(x)), "'"));
      Z.elements.push_back(*sets[x]);
    }
    std::vector<std::optional<std::vector<int>>> acts(B.arrow_count());
    for (const Line& l : body) {
      if (l[0].text == set_kw) continue;
      if (l[0].text != act_kw) syntax(l[0], cat("unexpected '", l[0].text, "'"));
      expect_size(l, 2, l.size());
      const Arr f = need_arrow(B, l[1]);
      if (acts[static_cast<std::size_t>(f)]) syntax(l[1], cat("action of '", l[1].text, "' given twice"));
      if (l.size() - 2 != Z.size(Z.from(f))) invalid(l[1], cat("action of '", l[1].text, "' needs ", Z.size(Z.from(f)), " images"));
      std::vector<int> a;
      for (std::size_t i = 2; i < l.size(); ++i) a.push_back(need_label(Z, Z.to(f), l[i]));
      acts[static_cast<std::size_t>(f)] = std::move(a);
    }
    for (std::size_t f = 0; f < acts.size(); ++f) {
      const Arr fa = static_cast<Arr>(f);
      if (acts[f]) Z.action.push_back(*acts[f]);
      else if (B.is_identity(fa) || Z.size(Z.from(fa)) == 0) {
        std::vector<int> id(Z.size(Z.from(fa)));
        for (std::size_t i = 0; i < id.size(); ++i) id[i] = static_cast<int>(i);
        Z.action.push_back(std::move(id));
      } else {
        invalid(who, cat("no action of '", B.arrow_name(fa), "'"));
      }
    }
    check_set_functor(Z);
    return Z;
  }

  void set_presheaf(const Line& head, const std::vector<Line>& body) {
    if (head.size() != 3 && head.size() != 5) syntax(head[0], "expected 'set-presheaf NAME SITE [over c]'");
    const CatRef& C = need_category(head[2]);
    SetPresheafEntry e{head[2].text, std::nullopt, {}};
    CatRef base = C;
    if (head.size() == 5) {
      if (head[3].text != "over") syntax(head[3], "expected 'over'");
      e.over = need_object(*C, head[4]);
      base = doc_.slices(head[2].text)->at(*e.over).category;
    }
    e.value = set_tables(head[1], base, body, "set", "act");
    name(head[1], "set-presheaf");
    doc_.set_presheaves.emplace(head[1].text, std::move(e));
  }

  // `component x y1 y2` lines, images of the sorted elements of the source.
  PresheafNat components(const Token& who, const SetPresheaf& S, const SetPresheaf& T, const std::vector<Line>& lines, std::size_t skip) {
    const FinCat& B = *S.base;
    std::vector<std::optional<std::vector<int>>> comps(B.object_count());
    for (const Line& l : lines) {
      const Obj x = need_object(B, l[skip]);
      if (comps[static_cast<std::size_t>(x)]) syntax(l[skip], cat("component at '", l[skip].text, "' given twice"));
      if (l.size() - skip - 1 != S.size(x)) invalid(l[skip], cat("component at '", l[skip].text, "' needs ", S.size(x), " images"));
      std::vector<int> c;
      for (std::size_t i = skip + 1; i < l.size(); ++i) c.push_back(need_label(T, x, l[i]));
      comps[static_cast<std::size_t>(x)] = std::move(c);
    }
    PresheafNat t{S, T, {}};
    for (std::size_t x = 0; x < comps.size(); ++x) {
      if (comps[x]) t.components.push_back(*comps[x]);
      else if (S.size(static_cast<Obj>(x)) == 0) t.components.emplace_back();
      else invalid(who, cat("no component at '", B.object_name(static_cast<Obj>(x)), "'"));
    }
    check_set_nat(t);
    return t;
  }

  void nat(const Line& head, const std::vector<Line>& body) {
    expect_size(head, 4, 4);
    const SetPresheaf& S = need(doc_.set_presheaves, head[2], "set-presheaf").value;
    const SetPresheaf& T = need(doc_.set_presheaves, head[3], "set-presheaf").value;
    if (!shared_equal(S.base, T.base)) invalid(head[3], "source and target live on different categories");
    for (const Line& l : body) {
      if (l[0].text != "component") syntax(l[0], cat("unexpected '", l[0].text, "' in nat"));
      expect_size(l, 2, l.size());
    }
    PresheafNat t = components(head[1], S, T, body, 1);
    name(head[1], "nat");
    doc_.nats.emplace(head[1].text, NatEntry{head[2].text, head[3].text, std::move(t)});
  }

  void two_nat(const Line& head, const std::vector<Line>& body) {
    expect_size(head, 4, 4);
    const PresheafRef& F = need(doc_.presheaves, head[2], "presheaf").value;
    const PresheafRef& G = need(doc_.presheaves, head[3], "presheaf").value;
    if (!shared_equal(F->site, G->site)) invalid(head[3], "source and target live on different sites");
    const FinCat& C = *F->site;
    TwoNatEntry e{head[2].text, head[3].text, std::vector<std::string>(C.object_count()), {F, G, {}}};
    std::vector<std::optional<FinFunctor>> comps(C.object_count());
    for (const Line& l : body) {
      if (l[0].text != "component") syntax(l[0], cat("unexpected '", l[0].text, "' in two-nat"));
      expect_size(l, 3, 3);
      const Obj c = need_object(C, l[1]);
      comps[static_cast<std::size_t>(c)] = need(doc_.functors, l[2], "functor").value;
      e.components[static_cast<std::size_t>(c)] = l[2].text;
    }
    for (std::size_t c = 0; c < comps.size(); ++c) {
      if (!comps[c]) invalid(head[1], cat("no component at '", C.object_name(static_cast<Obj>(c)), "'"));
      e.value.components.push_back(*comps[c]);
    }
    check_two_nat(e.value);
    name(head[1], "two-nat");
    doc_.two_nats.emplace(head[1].text, std::move(e));
  }

  void map(const Line& head, const std::vector<Line>& body) {
    expect_size(head, 3, 3);
    const PresheafEntry& pe = need(doc_.presheaves, head[2], "presheaf");
    const PresheafRef& F = pe.value;
    const FinCat& C = *F->site;
    const SlicesRef& slices = doc_.slices(pe.site);
    MapEntry e{head[2].text, {}, MapToOmega{slices, F, {}, {}}};
    std::vector<std::vector<std::optional<SetPresheaf>>> vals(C.object_count());
    e.values.resize(C.object_count());
    for (std::size_t c = 0; c < C.object_count(); ++c) {
      vals[c].resize(F->at(static_cast<Obj>(c)).object_count());
      e.values[c].resize(vals[c].size());
    }
    std::map<std::pair<Obj, Arr>, std::vector<Line>> arrows;
    for (const Line& l : body) {
      if (l[0].text == "value") {
        expect_size(l, 4, 4);
        const Obj c = need_object(C, l[1]);
        const Obj X = need_object(F->at(c), l[2]);
        const SetPresheafEntry& z = need(doc_.set_presheaves, l[3], "set-presheaf");
        if (z.site != pe.site || z.over != c) invalid(l[3], cat("'", l[3].text, "' is not a presheaf on the slice over '", l[1].text, "'"));
        vals[static_cast<std::size_t>(c)][static_cast<std::size_t>(X)] = z.value;
        e.values[static_cast<std::size_t>(c)][static_cast<std::size_t>(X)] = l[3].text;
      } else if (l[0].text == "arrow") {
        expect_size(l, 4, l.size());
        const Obj c = need_object(C, l[1]);
        arrows[{c, need_arrow(F->at(c), l[2])}].push_back(l);
      } else {
        syntax(l[0], cat("unexpected '", l[0].text, "' in map"));
      }
    }
    for (std::size_t c = 0; c < C.object_count(); ++c) {
      const Obj co = static_cast<Obj>(c);
      const FinCat& Fc = F->at(co);
      e.value.object_part.emplace_back();
      for (std::size_t X = 0; X < vals[c].size(); ++X) {
        if (!vals[c][X]) invalid(head[1], cat("no value at ('", C.object_name(co), "', '", Fc.object_name(static_cast<Obj>(X)), "')"));
        e.value.object_part.back().push_back(*vals[c][X]);
      }
      e.value.arrow_part.emplace_back();
      for (std::size_t n = 0; n < Fc.arrow_count(); ++n) {
        const Arr nu = static_cast<Arr>(n);
        const SetPresheaf& S = e.value.at(co, Fc.dom(nu));
        const SetPresheaf& T = e.value.at(co, Fc.cod(nu));
        auto it = arrows.find({co, nu});
        if (it == arrows.end() && Fc.is_identity(nu)) e.value.arrow_part.back().push_back(identity_set_nat(S));
        else e.value.arrow_part.back().push_back(components(head[1], S, T, it == arrows.end() ? std::vector<Line>{} : it->second, 3));
      }
    }
    check_map_to_omega(e.value);
    name(head[1], "map");
    doc_.maps.emplace(head[1].text, std::move(e));
  }

  void topology(const Line& head, const std::vector<Line>& body) {
    if (head.size() != 3 && !(head.size() == 4 && head[3].text == "exact")) syntax(head[0], "expected 'topology NAME SITE [exact]'");
    const CatRef& C = need_category(head[2]);
    TopologyEntry e{head[2].text, head.size() == 4, {}, {}, 0};
    for (const Line& l : body) {
      if (l[0].text != "cover") syntax(l[0], cat("unexpected '", l[0].text, "' in topology"));
      expect_size(l, 2, l.size());
      const Obj c = need_object(*C, l[1]);
      std::vector<Arr> fam;
      for (std::size_t i = 2; i < l.size(); ++i) {
        const Arr f = need_arrow(*C, l[i]);
        if (C->cod(f) != c) throw Error(ErrorKind::MixedCodomain, cat(where(l[i]), ": '", l[i].text, "' does not end at '", l[1].text, "'"));
        fam.push_back(f);
      }
      e.families.push_back({c, std::move(fam)});
    }
    if (e.exact) {
      std::vector<std::vector<Sieve>> covers(C->object_count());
      for (const auto& [c, fam] : e.families) covers[static_cast<std::size_t>(c)].push_back(sieve_generate(*C, c, fam));
      e.value = topology_from_sieves(C, std::move(covers));
    } else {
      Saturation s = generate_topology(C, e.families);
      e.value = std::move(s.topology);
      e.added = s.added;
    }
    name(head[1], "topology");
    doc_.topologies.emplace(head[1].text, std::move(e));
  }

  void sieve(const Line& head, const std::vector<Line>& body) {
    expect_size(head, 4, 4);
    const CatRef& C = need_category(head[2]);
    const Obj c = need_object(*C, head[3]);
    std::vector<Arr> fam;
    for (const Line& l : body) {
      if (l[0].text != "arrows") syntax(l[0], cat("unexpected '", l[0].text, "' in sieve"));
      for (std::size_t i = 1; i < l.size(); ++i) {
        const Arr f = need_arrow(*C, l[i]);
        if (C->cod(f) != c) throw Error(ErrorKind::MixedCodomain, cat(where(l[i]), ": '", l[i].text, "' does not end at '", head[3].text, "'"));
        fam.push_back(f);
      }
    }
    name(head[1], "sieve");
    doc_.sieves.emplace(head[1].text, SieveEntry{head[2].text, sieve_generate(*C, c, fam)});
  }

  const Sieve& sieve_on(const Token& t, const std::string& site) const {
    const SieveEntry& s = need(doc_.sieves, t, "sieve");
    if (s.site != site) invalid(t, cat("sieve '", t.text, "' is not on '", site, "'"));
    return s.value;
  }

  void descent(const Line& head, const std::vector<Line>& body) {
    expect_size(head, 4, 4);
    const PresheafEntry& pe = need(doc_.presheaves, head[2], "presheaf");
    const FinCat& C = *pe.value->site;
    DescentDatum d{pe.value, sieve_on(head[3], pe.site), {}, {}};
    for (const Line& l : body) {
      if (l[0].text == "object") {
        expect_size(l, 3, 3);
        const Arr f = need_arrow(C, l[1]);
        if (!d.sieve.contains(f)) invalid(l[1], cat("'", l[1].text, "' is not in the sieve"));
        d.objects[f] = need_object(pe.value->at(C.dom(f)), l[2]);
      } else if (l[0].text == "iso") {
        expect_size(l, 4, 4);
        const Arr f = need_arrow(C, l[1]);
        const Arr g = need_arrow(C, l[2]);
        if (!d.sieve.contains(f) || C.cod(g) != C.dom(f)) invalid(l[1], "iso indices must be f in the sieve and g into dom f");
        d.isos[{f, g}] = need_arrow(pe.value->at(C.dom(g)), l[3]);
      } else {
        syntax(l[0], cat("unexpected '", l[0].text, "' in descent"));
      }
    }
    for (auto [f, g] : descent_pairs(C, d.sieve))
      if (!d.isos.count({f, g}) && C.is_identity(g) && d.objects.count(f))
        d.isos[{f, g}] = pe.value->at(C.dom(g)).identity(d.objects[f]);
    validate_descent(d);
    name(head[1], "descent");
    doc_.descents.emplace(head[1].text, DescentEntry{head[2].text, head[3].text, std::move(d)});
  }

  void omega_descent(const Line& head, const std::vector<Line>& body) {
    expect_size(head, 4, 4);
    const TopologyEntry& te = need(doc_.topologies, head[2], "topology");
    const FinCat& C = *te.value.cat;
    const SlicesRef& slices = doc_.slices(te.site);
    OmegaDescentEntry e{head[2].text, head[3].text, {}, OmegaDescentDatum{slices, sieve_on(head[3], te.site), {}, {}}};
    OmegaDescentDatum& d = e.value;
    std::map<std::pair<Arr, Arr>, std::vector<Line>> isos;
    for (const Line& l : body) {
      if (l[0].text == "object") {
        expect_size(l, 3, 3);
        const Arr f = need_arrow(C, l[1]);
        if (!d.sieve.contains(f)) invalid(l[1], cat("'", l[1].text, "' is not in the sieve"));
        const SetPresheafEntry& z = need(doc_.set_presheaves, l[2], "set-presheaf");
        if (z.site != te.site || z.over != C.dom(f)) invalid(l[2], cat("'", l[2].text, "' is not on the slice over the domain of '", l[1].text, "'"));
        d.objects.insert_or_assign(f, z.value);
        e.objects[f] = l[2].text;
      } else if (l[0].text == "iso") {
        expect_size(l, 4, l.size());
        const Arr f = need_arrow(C, l[1]);
        const Arr g = need_arrow(C, l[2]);
        if (!d.sieve.contains(f) || C.cod(g) != C.dom(f)) invalid(l[1], "iso indices must be f in the sieve and g into dom f");
        isos[{f, g}].push_back(l);
      } else {
        syntax(l[0], cat("unexpected '", l[0].text, "' in omega-descent"));
      }
    }
    for (Arr f : d.sieve.arrows)
      if (!d.objects.count(f)) invalid(head[1], cat("no sheaf over '", C.arrow_name(f), "'"));
    for (auto [f, g] : descent_pairs(C, d.sieve)) {
      const SetPresheaf S = slices->reindex(d.object(f), g);
      const SetPresheaf& T = d.object(C.compose(f, g));
      auto it = isos.find({f, g});
      if (it == isos.end() && C.is_identity(g)) d.isos.emplace(std::pair{f, g}, identity_set_nat(S));
      else d.isos.emplace(std::pair{f, g}, components(head[1], S, T, it == isos.end() ? std::vector<Line>{} : it->second, 3));
    }
    validate_omega_descent(d, te.value);
    name(head[1], "omega-descent");
    doc_.omega_descents.emplace(head[1].text, std::move(e));
  }
};

}  // namespace detail

inline Document parse_text(std::string_view text, const std::string& origin = "<input>", const std::filesystem::path& base = ".") {
  Document doc;
  std::set<std::filesystem::path> active;
  detail::Parser(doc, origin, base, active).run(text);
  return doc;
}

inline Document parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::SyntaxError, path.string(), ": cannot read file");
  std::stringstream ss;
  ss << in.rdbuf();
  Document doc;
  std::set<std::filesystem::path> active{std::filesystem::weakly_canonical(path)};
  detail::Parser(doc, path.string(), path.parent_path(), active).run(ss.str());
  return doc;
}

namespace detail {

inline const std::string& token(const std::string& s) {
  bool ok = !s.empty() && s[0] != '#';
  for (char ch : s)
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') ok = false;
  if (!ok) fail(ErrorKind::InvariantViolation, "name '", s, "' cannot be written as a token");
  return s;
}

class Writer {
 public:
  std::ostringstream out;

  void line(std::initializer_list<std::string_view> head, const std::vector<std::string>& tail = {}) {
    out << "  ";
    words(head, tail);
  }
  void open(std::initializer_list<std::string_view> head) { words(head, {}); }
  void close() { out << "end\n\n"; }

 private:
  void words(std::initializer_list<std::string_view> head, const std::vector<std::string>& tail) {
    bool first = true;
    for (std::string_view w : head) {
      if (!first) out << ' ';
      out << token(std::string(w));
      first = false;
    }
    for (const std::string& w : tail) out << ' ' << token(w);
    out << '\n';
  }
};

template <typename T, typename Key>
std::vector<T> sorted_by(std::vector<T> v, Key key) {
  std::stable_sort(v.begin(), v.end(), [&](const T& a, const T& b) { return key(a) < key(b); });
  return v;
}

inline std::vector<std::string> images(const SetPresheaf& T, Obj x, const std::vector<int>& comp) {
  std::vector<std::string> out;
  for (int i : comp) out.push_back(T.label(x, i));
  return out;
}

inline void write_category(Writer& w, const std::string& name, const FinCat& C) {
  w.open({"category", name});
  std::vector<std::string> objects = C.object_names();
  std::sort(objects.begin(), objects.end());
  w.line({"objects"}, objects);
  std::vector<Arr> arrows, declared;
  for (std::size_t f = 0; f < C.arrow_count(); ++f) {
    const Arr fa = static_cast<Arr>(f);
    // identities with their own names are declared like any other arrow
    if (!C.is_identity(fa)) arrows.push_back(fa);
    if (!C.is_identity(fa) || C.arrow_name(fa) != "id_" + C.object_name(C.dom(fa))) declared.push_back(fa);
  }
  arrows = sorted_by(arrows, [&](Arr f) { return C.arrow_name(f); });
  declared = sorted_by(declared, [&](Arr f) { return C.arrow_name(f); });
  for (Arr f : declared) w.line({"arrow", C.arrow_name(f), C.object_name(C.dom(f)), C.object_name(C.cod(f))});
  for (const std::string& x : objects) {
    const Arr id = C.identity(C.object(x));
    if (C.arrow_name(id) != "id_" + x) w.line({"identity", x, C.arrow_name(id)});
  }
  for (Arr g : arrows)
    for (Arr f : arrows)
      if (C.composable(g, f)) w.line({"compose", C.arrow_name(g), C.arrow_name(f), C.arrow_name(C.compose(g, f))});
  w.close();
}

inline std::vector<Obj> objects_by_name(const FinCat& C) {
  std::vector<Obj> v;
  for (std::size_t x = 0; x < C.object_count(); ++x) v.push_back(static_cast<Obj>(x));
  return sorted_by(v, [&](Obj x) { return C.object_name(x); });
}

inline std::vector<Arr> arrows_by_name(const FinCat& C) {
  std::vector<Arr> v;
  for (std::size_t f = 0; f < C.arrow_count(); ++f) v.push_back(static_cast<Arr>(f));
  return sorted_by(v, [&](Arr f) { return C.arrow_name(f); });
}

inline void write_components(Writer& w, std::initializer_list<std::string_view> head, const PresheafNat& t, bool skip_empty) {
  const FinCat& B = *t.source.base;
  for (Obj x : objects_by_name(B)) {
    if (skip_empty && t.source.size(x) == 0) continue;
    std::vector<std::string> tail{B.object_name(x)};
    for (const std::string& y : images(t.target, x, t.components[static_cast<std::size_t>(x)])) tail.push_back(y);
    w.line(head, tail);
  }
}

}  // namespace detail

inline std::string serialize(const Document& doc) {
  using namespace detail;
  Writer w;
  for (const auto& [n, C] : doc.categories) write_category(w, n, *C);
  for (const auto& [n, e] : doc.functors) {
    const FinCat& A = *e.value.source;
    const FinCat& B = *e.value.target;
    w.open({"functor", n, e.source, e.target});
    for (Obj x : objects_by_name(A)) w.line({"object", A.object_name(x), B.object_name(e.value(x))});
    for (Arr f : arrows_by_name(A))
      if (!A.is_identity(f)) w.line({"arrow", A.arrow_name(f), B.arrow_name(e.value.arrow(f))});
    w.close();
  }
  for (const auto& [n, e] : doc.presheaves) {
    const FinCat& C = *e.value->site;
    w.open({"presheaf", n, e.site});
    for (Obj c : objects_by_name(C)) w.line({"value", C.object_name(c), e.values[static_cast<std::size_t>(c)]});
    for (Arr f : arrows_by_name(C))
      if (!e.restrictions[static_cast<std::size_t>(f)].empty()) w.line({"restrict", C.arrow_name(f), e.restrictions[static_cast<std::size_t>(f)]});
    w.close();
  }
  for (const auto& [n, e] : doc.set_presheaves) {
    const FinCat& B = *e.value.base;
    if (e.over) w.open({"set-presheaf", n, e.site, "over", doc.categories.at(e.site)->object_name(*e.over)});
    else w.open({"set-presheaf", n, e.site});
    for (Obj x : objects_by_name(B)) w.line({"set", B.object_name(x)}, e.value.elements[static_cast<std::size_t>(x)]);
    for (Arr f : arrows_by_name(B))
      if (!B.is_identity(f) && e.value.size(e.value.from(f)) > 0)
        w.line({"act", B.arrow_name(f)}, images(e.value, e.value.to(f), e.value.action[static_cast<std::size_t>(f)]));
    w.close();
  }
  for (const auto& [n, e] : doc.nats) {
    w.open({"nat", n, e.source, e.target});
    write_components(w, {"component"}, e.value, true);
    w.close();
  }
  for (const auto& [n, e] : doc.two_nats) {
    const FinCat& C = *e.value.source->site;
    w.open({"two-nat", n, e.source, e.target});
    for (Obj c : objects_by_name(C)) w.line({"component", C.object_name(c), e.components[static_cast<std::size_t>(c)]});
    w.close();
  }
  for (const auto& [n, e] : doc.maps) {
    const FinCat& C = *e.value.site();
    w.open({"map", n, e.source});
    for (Obj c : objects_by_name(C)) {
      const FinCat& Fc = e.value.source->at(c);
      for (Obj X : objects_by_name(Fc))
        w.line({"value", C.object_name(c), Fc.object_name(X), e.values[static_cast<std::size_t>(c)][static_cast<std::size_t>(X)]});
    }
    for (Obj c : objects_by_name(C)) {
      const FinCat& Fc = e.value.source->at(c);
      for (Arr nu : arrows_by_name(Fc))
        if (!Fc.is_identity(nu)) write_components(w, {"arrow", C.object_name(c), Fc.arrow_name(nu)}, e.value.on(c, nu), true);
    }
    w.close();
  }
  for (const auto& [n, e] : doc.topologies) {
    const FinCat& C = *e.value.cat;
    if (e.exact) w.open({"topology", n, e.site, "exact"});
    else w.open({"topology", n, e.site});
    std::vector<std::vector<std::string>> rows;
    for (const auto& [c, fam] : e.families) {
      std::vector<std::string> row;
      for (Arr f : e.exact ? sieve_generate(C, c, fam).arrows : fam) row.push_back(C.arrow_name(f));
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
      row.insert(row.begin(), C.object_name(c));
      rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    for (auto& row : rows) {
      const std::string c = row.front();
      row.erase(row.begin());
      w.line({"cover", c}, row);
    }
    w.close();
  }
  for (const auto& [n, e] : doc.sieves) {
    const FinCat& C = *doc.categories.at(e.site);
    w.open({"sieve", n, e.site, C.object_name(e.value.at)});
    std::vector<std::string> names;
    for (Arr f : e.value.arrows) names.push_back(C.arrow_name(f));
    std::sort(names.begin(), names.end());
    if (!names.empty()) w.line({"arrows"}, names);
    w.close();
  }
  for (const auto& [n, e] : doc.descents) {
    const FinCat& C = *e.value.presheaf->site;
    const DescentDatum& d = e.value;
    w.open({"descent", n, e.presheaf, e.sieve});
    for (Arr f : arrows_by_name(C))
      if (d.objects.count(f)) w.line({"object", C.arrow_name(f), d.presheaf->at(C.dom(f)).object_name(d.object(f))});
    auto pairs = sorted_by(descent_pairs(C, d.sieve), [&](std::pair<Arr, Arr> p) { return std::pair{C.arrow_name(p.first), C.arrow_name(p.second)}; });
    for (auto [f, g] : pairs) w.line({"iso", C.arrow_name(f), C.arrow_name(g), d.presheaf->at(C.dom(g)).arrow_name(d.iso(f, g))});
    w.close();
  }
  for (const auto& [n, e] : doc.omega_descents) {
    const FinCat& C = *e.value.slices->site;
    const OmegaDescentDatum& d = e.value;
    w.open({"omega-descent", n, e.topology, e.sieve});
    for (Arr f : arrows_by_name(C))
      if (e.objects.count(f)) w.line({"object", C.arrow_name(f), e.objects.at(f)});
    auto pairs = sorted_by(descent_pairs(C, d.sieve), [&](std::pair<Arr, Arr> p) { return std::pair{C.arrow_name(p.first), C.arrow_name(p.second)}; });
    for (auto [f, g] : pairs) write_components(w, {"iso", C.arrow_name(f), C.arrow_name(g)}, d.iso(f, g), true);
    w.close();
  }
  std::string text = w.out.str();
  if (text.size() >= 2 && text.substr(text.size() - 2) == "\n\n") text.pop_back();
  return text;
}

inline bool operator==(const Document& a, const Document& b) {
  auto same_keys = [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return false;
    for (auto i = x.begin(), j = y.begin(); i != x.end(); ++i, ++j)
      if (i->first != j->first) return false;
    return true;
  };
  if (!same_keys(a.categories, b.categories) || !same_keys(a.functors, b.functors) || !same_keys(a.presheaves, b.presheaves) ||
      !same_keys(a.set_presheaves, b.set_presheaves) || !same_keys(a.nats, b.nats) || !same_keys(a.two_nats, b.two_nats) ||
      !same_keys(a.maps, b.maps) || !same_keys(a.topologies, b.topologies) || !same_keys(a.sieves, b.sieves) ||
      !same_keys(a.descents, b.descents) || !same_keys(a.omega_descents, b.omega_descents))
    return false;
  for (const auto& [n, C] : a.categories)
    if (!(*C == *b.categories.at(n))) return false;
  for (const auto& [n, e] : a.functors) {
    const auto& o = b.functors.at(n);
    if (e.source != o.source || e.target != o.target || !(e.value == o.value)) return false;
  }
  for (const auto& [n, e] : a.presheaves) {
    const auto& o = b.presheaves.at(n);
    if (e.site != o.site || e.values != o.values || !shared_equal(e.value, o.value)) return false;
  }
  for (const auto& [n, e] : a.set_presheaves) {
    const auto& o = b.set_presheaves.at(n);
    if (e.site != o.site || e.over != o.over || !(e.value == o.value)) return false;
  }
  for (const auto& [n, e] : a.nats) {
    const auto& o = b.nats.at(n);
    if (e.source != o.source || e.target != o.target || !(e.value == o.value)) return false;
  }
  for (const auto& [n, e] : a.two_nats) {
    const auto& o = b.two_nats.at(n);
    if (e.source != o.source || e.target != o.target || e.components != o.components || !(e.value == o.value)) return false;
  }
  for (const auto& [n, e] : a.maps) {
    const auto& o = b.maps.at(n);
    if (e.source != o.source || e.values != o.values || !(e.value == o.value)) return false;
  }
  for (const auto& [n, e] : a.topologies) {
    const auto& o = b.topologies.at(n);
    if (e.site != o.site || e.exact != o.exact || !(e.value == o.value)) return false;
  }
  for (const auto& [n, e] : a.sieves) {
    const auto& o = b.sieves.at(n);
    if (e.site != o.site || !(e.value == o.value)) return false;
  }
  for (const auto& [n, e] : a.descents) {
    const auto& o = b.descents.at(n);
    if (e.presheaf != o.presheaf || e.sieve != o.sieve || !(e.value == o.value)) return false;
  }
  for (const auto& [n, e] : a.omega_descents) {
    const auto& o = b.omega_descents.at(n);
    if (e.topology != o.topology || e.sieve != o.sieve || e.objects != o.objects || !(e.value.sieve == o.value.sieve) ||
        !(e.value.objects == o.value.objects) || !(e.value.isos == o.value.isos))
      return false;
  }
  return true;
}

}  // namespace tck
