#pragma once

// Finite categories stored as explicit object/arrow tables with a total
// composition table over composable pairs. Objects and arrows are kept sorted
// by identifier, so two categories with the same tables compare equal no
// matter how they were declared.

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "tck/core.hpp"

namespace tck {

struct RawCategory {
  struct Arrow {
    std::string name, dom, cod;
  };
  struct Composite {
    std::string second, first, result;  // second ∘ first = result
  };
  std::vector<std::string> objects;
  std::vector<Arrow> arrows;
  // object -> identity arrow. Objects without an entry get `id_<object>`,
  // created if no arrow of that name is declared.
  std::vector<std::pair<std::string, std::string>> identities;
  // Non-identity composites. Composites with an identity are implied.
  std::vector<Composite> composites;
};

class FinCat {
 public:
  struct ArrowData {
    std::string name;
    Obj dom;
    Obj cod;
    bool operator==(const ArrowData&) const = default;
  };

  FinCat() = default;

  std::size_t object_count() const noexcept { return objects_.size(); }
  std::size_t arrow_count() const noexcept { return arrows_.size(); }

  const std::string& object_name(Obj x) const { return objects_.at(static_cast<std::size_t>(x)); }
  const std::string& arrow_name(Arr f) const { return arrows_.at(static_cast<std::size_t>(f)).name; }
  const std::vector<std::string>& object_names() const noexcept { return objects_; }
  const std::vector<ArrowData>& arrows() const noexcept { return arrows_; }

  Obj dom(Arr f) const { return arrows_[static_cast<std::size_t>(f)].dom; }
  Obj cod(Arr f) const { return arrows_[static_cast<std::size_t>(f)].cod; }
  Arr identity(Obj x) const { return identities_[static_cast<std::size_t>(x)]; }
  bool is_identity(Arr f) const { return identity(dom(f)) == f; }

  // g ∘ f, or `none` when cod(f) != dom(g).
  Arr compose(Arr g, Arr f) const { return table_[index(g, f)]; }
  bool composable(Arr g, Arr f) const { return cod(f) == dom(g); }

  std::optional<Obj> find_object(std::string_view name) const {
    auto it = object_index_.find(std::string(name));
    if (it == object_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<Arr> find_arrow(std::string_view name) const {
    auto it = arrow_index_.find(std::string(name));
    if (it == arrow_index_.end()) return std::nullopt;
    return it->second;
  }
  Obj object(std::string_view name) const {
    if (auto x = find_object(name)) return *x;
    fail(ErrorKind::UnknownObject, "no object '", name, "'");
  }
  Arr arrow(std::string_view name) const {
    if (auto f = find_arrow(name)) return *f;
    fail(ErrorKind::UnknownArrow, "no arrow '", name, "'");
  }

  const std::vector<Arr>& hom(Obj x, Obj y) const {
    return homs_[static_cast<std::size_t>(x) * objects_.size() + static_cast<std::size_t>(y)];
  }
  const std::vector<Arr>& arrows_into(Obj c) const { return into_[static_cast<std::size_t>(c)]; }
  const std::vector<Arr>& arrows_from(Obj c) const { return from_[static_cast<std::size_t>(c)]; }

  std::optional<Arr> inverse(Arr f) const {
    for (Arr g : hom(cod(f), dom(f))) {
      if (compose(g, f) == identity(dom(f)) && compose(f, g) == identity(cod(f))) return g;
    }
    return std::nullopt;
  }
  bool is_iso(Arr f) const { return inverse(f).has_value(); }

  bool operator==(const FinCat& o) const {
    return objects_ == o.objects_ && arrows_ == o.arrows_ && identities_ == o.identities_ && table_ == o.table_;
  }

  // Builds a category from index-based tables in arbitrary order. `composite`
  // returns the index of g∘f for every composable (g, f). The result is
  // re-sorted by identifier and validated exhaustively.
  template <typename Composite>
  static FinCat assemble(std::vector<std::string> objects, std::vector<ArrowData> arrows,
                         std::vector<Arr> identities, Composite&& composite);

 private:
  std::size_t index(Arr g, Arr f) const {
    return static_cast<std::size_t>(g) * arrows_.size() + static_cast<std::size_t>(f);
  }
  void index_tables();
  void validate() const;

  std::vector<std::string> objects_;
  std::vector<ArrowData> arrows_;
  std::vector<Arr> identities_;
  std::vector<Arr> table_;
  std::vector<std::vector<Arr>> homs_, into_, from_;
  std::unordered_map<std::string, Obj> object_index_, arrow_index_;
};

using CatRef = std::shared_ptr<const FinCat>;

inline CatRef share(FinCat c) { return std::make_shared<const FinCat>(std::move(c)); }

template <typename Composite>
FinCat FinCat::assemble(std::vector<std::string> objects, std::vector<ArrowData> arrows,
                        std::vector<Arr> identities, Composite&& composite) {
  const std::size_t n = objects.size();
  const std::size_t m = arrows.size();
  if (identities.size() != n) fail(ErrorKind::MissingIdentity, "identity table has wrong size");

  std::vector<Obj> obj_order(n);
  std::iota(obj_order.begin(), obj_order.end(), 0);
  std::sort(obj_order.begin(), obj_order.end(),
            [&](Obj a, Obj b) { return objects[static_cast<std::size_t>(a)] < objects[static_cast<std::size_t>(b)]; });
  std::vector<Arr> arr_order(m);
  std::iota(arr_order.begin(), arr_order.end(), 0);
  std::sort(arr_order.begin(), arr_order.end(), [&](Arr a, Arr b) {
    return arrows[static_cast<std::size_t>(a)].name < arrows[static_cast<std::size_t>(b)].name;
  });
  std::vector<Obj> new_obj(n);
  for (std::size_t i = 0; i < n; ++i) new_obj[static_cast<std::size_t>(obj_order[i])] = static_cast<Obj>(i);
  std::vector<Arr> new_arr(m);
  for (std::size_t i = 0; i < m; ++i) new_arr[static_cast<std::size_t>(arr_order[i])] = static_cast<Arr>(i);

  FinCat c;
  c.objects_.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.objects_[i] = std::move(objects[static_cast<std::size_t>(obj_order[i])]);
  c.arrows_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const ArrowData& a = arrows[static_cast<std::size_t>(arr_order[i])];
    if (a.dom < 0 || a.cod < 0 || static_cast<std::size_t>(a.dom) >= n || static_cast<std::size_t>(a.cod) >= n)
      fail(ErrorKind::InvariantViolation, "arrow '", a.name, "' has an endpoint outside the object table");
    c.arrows_[i] = ArrowData{a.name, new_obj[static_cast<std::size_t>(a.dom)], new_obj[static_cast<std::size_t>(a.cod)]};
  }
  c.identities_.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    const Arr id = identities[x];
    if (id < 0 || static_cast<std::size_t>(id) >= m) fail(ErrorKind::MissingIdentity, "object '", c.objects_[new_obj[x]], "' has no identity");
    c.identities_[static_cast<std::size_t>(new_obj[x])] = new_arr[static_cast<std::size_t>(id)];
  }
  for (std::size_t i = 1; i < n; ++i)
    if (c.objects_[i] == c.objects_[i - 1]) fail(ErrorKind::InvariantViolation, "duplicate object '", c.objects_[i], "'");
  for (std::size_t i = 1; i < m; ++i)
    if (c.arrows_[i].name == c.arrows_[i - 1].name)
      fail(ErrorKind::InvariantViolation, "duplicate arrow '", c.arrows_[i].name, "'");

  c.table_.assign(m * m, none);
  for (std::size_t g = 0; g < m; ++g) {
    for (std::size_t f = 0; f < m; ++f) {
      const Arr og = arr_order[g], of = arr_order[f];
      if (arrows[static_cast<std::size_t>(of)].cod != arrows[static_cast<std::size_t>(og)].dom) continue;
      const Arr h = composite(og, of);
      if (h < 0 || static_cast<std::size_t>(h) >= m)
        fail(ErrorKind::MissingComposite, "no composite for ", c.arrows_[g].name, " o ", c.arrows_[f].name);
      c.table_[g * m + f] = new_arr[static_cast<std::size_t>(h)];
    }
  }
  c.index_tables();
  c.validate();
  return c;
}

inline void FinCat::index_tables() {
  const std::size_t n = objects_.size();
  homs_.assign(n * n, {});
  into_.assign(n, {});
  from_.assign(n, {});
  object_index_.clear();
  arrow_index_.clear();
  for (std::size_t x = 0; x < n; ++x) object_index_.emplace(objects_[x], static_cast<Obj>(x));
  for (std::size_t f = 0; f < arrows_.size(); ++f) {
    const ArrowData& a = arrows_[f];
    arrow_index_.emplace(a.name, static_cast<Arr>(f));
    homs_[static_cast<std::size_t>(a.dom) * n + static_cast<std::size_t>(a.cod)].push_back(static_cast<Arr>(f));
    into_[static_cast<std::size_t>(a.cod)].push_back(static_cast<Arr>(f));
    from_[static_cast<std::size_t>(a.dom)].push_back(static_cast<Arr>(f));
  }
}

inline void FinCat::validate() const {
  const std::size_t m = arrows_.size();
  for (std::size_t x = 0; x < objects_.size(); ++x) {
    const Arr id = identities_[x];
    if (dom(id) != static_cast<Obj>(x) || cod(id) != static_cast<Obj>(x))
      fail(ErrorKind::MissingIdentity, "identity '", arrow_name(id), "' of '", objects_[x], "' is not an endomorphism of it");
  }
  for (std::size_t g = 0; g < m; ++g) {
    for (std::size_t f = 0; f < m; ++f) {
      const Arr h = table_[g * m + f];
      if (h == none) continue;
      if (dom(h) != dom(static_cast<Arr>(f)) || cod(h) != cod(static_cast<Arr>(g)))
        fail(ErrorKind::IllTypedComposite, arrows_[g].name, " o ", arrows_[f].name, " = ", arrows_[static_cast<std::size_t>(h)].name,
             " has the wrong domain or codomain");
    }
  }
  for (std::size_t f = 0; f < m; ++f) {
    const Arr fa = static_cast<Arr>(f);
    if (compose(identity(cod(fa)), fa) != fa || compose(fa, identity(dom(fa))) != fa)
      fail(ErrorKind::MissingIdentity, "identity law fails for '", arrows_[f].name, "'");
  }
  for (std::size_t f = 0; f < m; ++f) {
    for (Arr g : from_[static_cast<std::size_t>(cod(static_cast<Arr>(f)))]) {
      const Arr gf = compose(g, static_cast<Arr>(f));
      for (Arr h : from_[static_cast<std::size_t>(cod(g))]) {
        if (compose(h, gf) != compose(compose(h, g), static_cast<Arr>(f)))
          fail(ErrorKind::NonAssociative, "(", arrows_[static_cast<std::size_t>(h)].name, " o ", arrows_[static_cast<std::size_t>(g)].name,
               ") o ", arrows_[f].name, " differs from ", arrows_[static_cast<std::size_t>(h)].name, " o (",
               arrows_[static_cast<std::size_t>(g)].name, " o ", arrows_[f].name, ")");
      }
    }
  }
}

inline FinCat build_category(const RawCategory& raw) {
  std::map<std::string, Obj> obj;
  for (const auto& o : raw.objects) {
    if (!obj.emplace(o, static_cast<Obj>(obj.size())).second) fail(ErrorKind::InvariantViolation, "duplicate object '", o, "'");
  }
  auto lookup_obj = [&](const std::string& name) {
    auto it = obj.find(name);
    if (it == obj.end()) fail(ErrorKind::DanglingReference, "unknown object '", name, "'");
    return it->second;
  };
  std::vector<FinCat::ArrowData> arrows;
  std::map<std::string, Arr> arr;
  for (const auto& a : raw.arrows) {
    if (!arr.emplace(a.name, static_cast<Arr>(arrows.size())).second) fail(ErrorKind::InvariantViolation, "duplicate arrow '", a.name, "'");
    arrows.push_back({a.name, lookup_obj(a.dom), lookup_obj(a.cod)});
  }
  auto lookup_arr = [&](const std::string& name) {
    auto it = arr.find(name);
    if (it == arr.end()) fail(ErrorKind::DanglingReference, "unknown arrow '", name, "'");
    return it->second;
  };
  std::map<std::string, std::string> declared_ids(raw.identities.begin(), raw.identities.end());
  std::vector<Arr> identities(raw.objects.size(), none);
  for (const auto& [o, x] : obj) {
    std::string id_name = "id_" + o;
    if (auto it = declared_ids.find(o); it != declared_ids.end()) {
      auto a = arr.find(it->second);
      if (a == arr.end()) fail(ErrorKind::MissingIdentity, "identity '", it->second, "' of '", o, "' is not a declared arrow");
      identities[static_cast<std::size_t>(x)] = a->second;
      continue;
    }
    if (auto a = arr.find(id_name); a != arr.end()) {
      identities[static_cast<std::size_t>(x)] = a->second;
      continue;
    }
    arr.emplace(id_name, static_cast<Arr>(arrows.size()));
    identities[static_cast<std::size_t>(x)] = static_cast<Arr>(arrows.size());
    arrows.push_back({id_name, x, x});
  }
  for (const auto& [o, name] : declared_ids) lookup_obj(o);
  for (std::size_t x = 0; x < identities.size(); ++x) {
    const auto& a = arrows[static_cast<std::size_t>(identities[x])];
    if (a.dom != static_cast<Obj>(x) || a.cod != static_cast<Obj>(x))
      fail(ErrorKind::MissingIdentity, "identity '", a.name, "' of '", raw.objects[x], "' is not an endomorphism of it");
  }

  const std::size_t m = arrows.size();
  std::vector<Arr> table(m * m, none);
  std::vector<bool> is_id(m, false);
  for (Arr id : identities) is_id[static_cast<std::size_t>(id)] = true;
  for (const auto& c : raw.composites) {
    const Arr g = lookup_arr(c.second), f = lookup_arr(c.first), h = lookup_arr(c.result);
    const auto& ga = arrows[static_cast<std::size_t>(g)];
    const auto& fa = arrows[static_cast<std::size_t>(f)];
    const auto& ha = arrows[static_cast<std::size_t>(h)];
    if (fa.cod != ga.dom) fail(ErrorKind::IllTypedComposite, c.second, " o ", c.first, ": codomain of ", c.first, " is not the domain of ", c.second);
    if (ha.dom != fa.dom || ha.cod != ga.cod)
      fail(ErrorKind::IllTypedComposite, c.second, " o ", c.first, " = ", c.result, " has the wrong domain or codomain");
    Arr& slot = table[static_cast<std::size_t>(g) * m + static_cast<std::size_t>(f)];
    if (slot != none && slot != h) fail(ErrorKind::IllTypedComposite, "conflicting entries for ", c.second, " o ", c.first);
    slot = h;
  }
  for (std::size_t g = 0; g < m; ++g) {
    for (std::size_t f = 0; f < m; ++f) {
      if (arrows[f].cod != arrows[g].dom) continue;
      Arr& slot = table[g * m + f];
      Arr implied = none;
      if (is_id[g]) implied = static_cast<Arr>(f);
      else if (is_id[f]) implied = static_cast<Arr>(g);
      if (implied == none) continue;
      if (slot != none && slot != implied)
        fail(ErrorKind::MissingIdentity, "identity law fails: ", arrows[g].name, " o ", arrows[f].name, " declared as ",
             arrows[static_cast<std::size_t>(slot)].name);
      slot = implied;
    }
  }
  return FinCat::assemble(raw.objects, std::move(arrows), std::move(identities),
                          [&](Arr g, Arr f) { return table[static_cast<std::size_t>(g) * m + static_cast<std::size_t>(f)]; });
}

// Free category on an acyclic graph. Composite paths are named by joining the
// generator names in composition order, e.g. "g.f" for g ∘ f.
inline FinCat free_category(const std::vector<std::string>& objects, const std::vector<RawCategory::Arrow>& generators) {
  std::map<std::string, Obj> obj;
  for (const auto& o : objects) obj.emplace(o, static_cast<Obj>(obj.size()));
  struct Path {
    std::vector<std::size_t> gens;  // first generator applied first
    Obj dom, cod;
  };
  std::vector<Path> paths;
  for (std::size_t x = 0; x < objects.size(); ++x) paths.push_back({{}, static_cast<Obj>(x), static_cast<Obj>(x)});
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    auto d = obj.find(generators[i].dom), c = obj.find(generators[i].cod);
    if (d == obj.end() || c == obj.end()) fail(ErrorKind::DanglingReference, "generator '", generators[i].name, "' has an unknown endpoint");
    frontier.push_back(paths.size());
    paths.push_back({{i}, d->second, c->second});
  }
  while (!frontier.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : frontier) {
      if (paths[p].gens.size() > objects.size()) fail(ErrorKind::InvariantViolation, "free generation needs an acyclic graph");
      for (std::size_t i = 0; i < generators.size(); ++i) {
        if (obj.at(generators[i].dom) != paths[p].cod) continue;
        Path q = paths[p];
        q.gens.push_back(i);
        q.cod = obj.at(generators[i].cod);
        next.push_back(paths.size());
        paths.push_back(std::move(q));
      }
    }
    frontier = std::move(next);
  }
  auto name_of = [&](const Path& p) {
    if (p.gens.empty()) return "id_" + objects[static_cast<std::size_t>(p.dom)];
    std::string s;
    for (auto it = p.gens.rbegin(); it != p.gens.rend(); ++it) {
      if (!s.empty()) s += '.';
      s += generators[*it].name;
    }
    return s;
  };
  std::map<std::pair<Obj, std::vector<std::size_t>>, Arr> index;
  std::vector<FinCat::ArrowData> arrows;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    index.emplace(std::make_pair(paths[i].dom, paths[i].gens), static_cast<Arr>(i));
    arrows.push_back({name_of(paths[i]), paths[i].dom, paths[i].cod});
  }
  std::vector<Arr> ids;
  for (std::size_t x = 0; x < objects.size(); ++x) ids.push_back(static_cast<Arr>(x));
  return FinCat::assemble(objects, std::move(arrows), std::move(ids), [&](Arr g, Arr f) {
    std::vector<std::size_t> gens = paths[static_cast<std::size_t>(f)].gens;
    const auto& tail = paths[static_cast<std::size_t>(g)].gens;
    gens.insert(gens.end(), tail.begin(), tail.end());
    return index.at({paths[static_cast<std::size_t>(f)].dom, gens});
  });
}

inline FinCat discrete_category(std::vector<std::string> objects) {
  std::vector<FinCat::ArrowData> arrows;
  std::vector<Arr> ids;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    arrows.push_back({"id_" + objects[i], static_cast<Obj>(i), static_cast<Obj>(i)});
    ids.push_back(static_cast<Arr>(i));
  }
  return FinCat::assemble(std::move(objects), std::move(arrows), std::move(ids), [](Arr g, Arr) { return g; });
}

inline FinCat opposite(const FinCat& c) {
  std::vector<FinCat::ArrowData> arrows;
  for (const auto& a : c.arrows()) arrows.push_back({a.name, a.cod, a.dom});
  std::vector<Arr> ids;
  for (std::size_t x = 0; x < c.object_count(); ++x) ids.push_back(c.identity(static_cast<Obj>(x)));
  return FinCat::assemble(c.object_names(), std::move(arrows), std::move(ids), [&](Arr g, Arr f) { return c.compose(f, g); });
}

}  // namespace tck
