#include "gemini/types.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cassert>

namespace gemini {

namespace {

TypePtr node(TyTag tag) {
  auto t = std::make_shared<Type>();
  t->tag = tag;
  return t;
}

TypePtr leaf(TyTag tag) {
  static std::unordered_map<int, TypePtr> cache;
  auto it = cache.find(static_cast<int>(tag));
  if (it != cache.end()) return it->second;
  auto t = node(tag);
  cache.emplace(static_cast<int>(tag), t);
  return t;
}

}  // namespace

TypePtr t_int() { return leaf(TyTag::Int); }
TypePtr t_real() { return leaf(TyTag::Real); }
TypePtr t_string() { return leaf(TyTag::String); }
TypePtr t_bit() { return leaf(TyTag::Bit); }
TypePtr t_top() { return leaf(TyTag::Top); }
TypePtr t_bottom() { return leaf(TyTag::Bottom); }
TypePtr t_stop() { return leaf(TyTag::STop); }
TypePtr t_sbottom() { return leaf(TyTag::SBottom); }
TypePtr t_htop() { return leaf(TyTag::HTop); }
TypePtr t_hbottom() { return leaf(TyTag::HBottom); }
TypePtr t_mbottom() { return leaf(TyTag::MBottom); }
TypePtr t_unit() { return t_srecord({}, {}); }

TypePtr t_arrow(TypePtr a, TypePtr b) {
  auto t = node(TyTag::Arrow);
  t->args = {std::move(a), std::move(b)};
  return t;
}

TypePtr t_list(TypePtr elem) {
  auto t = node(TyTag::List);
  t->args = {std::move(elem)};
  return t;
}

TypePtr t_ref(TypePtr elem) {
  auto t = node(TyTag::Ref);
  t->args = {std::move(elem)};
  return t;
}

TypePtr t_sw(TypePtr hw) {
  auto t = node(TyTag::Sw);
  t->args = {std::move(hw)};
  return t;
}

TypePtr t_srecord(std::vector<std::string> labels, std::vector<TypePtr> fields) {
  auto t = node(TyTag::SRecord);
  t->labels = std::move(labels);
  t->args = std::move(fields);
  return t;
}

TypePtr t_hrecord(std::vector<std::string> labels, std::vector<TypePtr> fields) {
  auto t = node(TyTag::HRecord);
  t->labels = std::move(labels);
  t->args = std::move(fields);
  return t;
}

TypePtr t_tuple(std::vector<TypePtr> fields) {
  std::vector<std::string> labels;
  for (size_t i = 0; i < fields.size(); ++i) labels.push_back(std::to_string(i + 1));
  return t_srecord(std::move(labels), std::move(fields));
}

TypePtr t_htuple(std::vector<TypePtr> fields) {
  std::vector<std::string> labels;
  for (size_t i = 0; i < fields.size(); ++i) labels.push_back(std::to_string(i + 1));
  return t_hrecord(std::move(labels), std::move(fields));
}

TypePtr t_array(TypePtr elem, SizeTerm size) {
  auto t = node(TyTag::Array);
  t->args = {std::move(elem)};
  t->size = size;
  return t;
}

TypePtr t_temporal(TypePtr elem, SizeTerm time) {
  if (time.is_concrete() && time.offset == 0) return elem;  // T @ 0 == T
  auto t = node(TyTag::Temporal);
  t->args = {std::move(elem)};
  t->size = time;
  return t;
}

TypePtr t_module(TypePtr in, TypePtr out) {
  auto t = node(TyTag::Module);
  t->args = {std::move(in), std::move(out)};
  return t;
}

TypePtr t_param_module(TypePtr size_ty, TypePtr in, TypePtr out) {
  auto t = node(TyTag::ParamModule);
  t->args = {std::move(size_ty), std::move(in), std::move(out)};
  return t;
}

TypePtr t_meta(int id) {
  auto t = node(TyTag::Meta);
  t->meta_id = id;
  return t;
}

TypePtr t_smeta(int id) {
  auto t = node(TyTag::SMeta);
  t->meta_id = id;
  return t;
}

TypePtr t_hmeta(int id) {
  auto t = node(TyTag::HMeta);
  t->meta_id = id;
  return t;
}

TypePtr t_sdatatype(std::vector<std::string> ctors, std::vector<TypePtr> payloads,
                    uint64_t tag, std::string name) {
  auto t = node(TyTag::SDatatype);
  t->labels = std::move(ctors);
  t->args = std::move(payloads);
  t->dt_tag = tag;
  t->dt_name = std::move(name);
  return t;
}

TypePtr t_hdatatype(std::vector<std::string> ctors, std::vector<TypePtr> payloads,
                    uint64_t tag, std::string name) {
  auto t = node(TyTag::HDatatype);
  t->labels = std::move(ctors);
  t->args = std::move(payloads);
  t->dt_tag = tag;
  t->dt_name = std::move(name);
  return t;
}

TypePtr t_smu(std::vector<int> bound, TypePtr body) {
  auto t = node(TyTag::SMu);
  t->bound = std::move(bound);
  t->args = {std::move(body)};
  return t;
}

TypePtr t_spoly(std::vector<int> bound, std::vector<int> bound_sizes, TypePtr body) {
  auto t = node(TyTag::SPoly);
  t->bound = std::move(bound);
  t->bound_sizes = std::move(bound_sizes);
  t->args = {std::move(body)};
  return t;
}

TypePtr t_mpoly(std::vector<int> bound, std::vector<int> bound_sizes, TypePtr body) {
  auto t = node(TyTag::MPoly);
  t->bound = std::move(bound);
  t->bound_sizes = std::move(bound_sizes);
  t->args = {std::move(body)};
  return t;
}

TypePtr MetaSource::fresh(TyKind kind) {
  int id = next_meta_++;
  switch (kind) {
    case TyKind::Software: return t_smeta(id);
    case TyKind::Hardware: return t_hmeta(id);
    default: return t_meta(id);
  }
}

TyKind kind_of(const TypePtr& t) {
  switch (t->tag) {
    case TyTag::Meta:
    case TyTag::Top:
    case TyTag::Bottom:
      return TyKind::Unknown;
    case TyTag::Int:
    case TyTag::Real:
    case TyTag::String:
    case TyTag::Arrow:
    case TyTag::List:
    case TyTag::Sw:
    case TyTag::SRecord:
    case TyTag::Ref:
    case TyTag::SDatatype:
    case TyTag::SMu:
    case TyTag::SPoly:
    case TyTag::SMeta:
    case TyTag::STop:
    case TyTag::SBottom:
      return TyKind::Software;
    case TyTag::Bit:
    case TyTag::Array:
    case TyTag::Temporal:
    case TyTag::HRecord:
    case TyTag::HDatatype:
    case TyTag::HPoly:
    case TyTag::HMeta:
    case TyTag::HTop:
    case TyTag::HBottom:
      return TyKind::Hardware;
    case TyTag::Module:
    case TyTag::ParamModule:
    case TyTag::MPoly:
    case TyTag::MBottom:
      return TyKind::Module;
  }
  return TyKind::Unknown;
}

bool is_meta(const TypePtr& t) {
  return t->tag == TyTag::Meta || t->tag == TyTag::SMeta || t->tag == TyTag::HMeta;
}

bool is_recovery(const TypePtr& t) {
  switch (t->tag) {
    case TyTag::Top:
    case TyTag::Bottom:
    case TyTag::STop:
    case TyTag::SBottom:
    case TyTag::HTop:
    case TyTag::HBottom:
    case TyTag::MBottom:
      return true;
    default:
      return false;
  }
}

void SubstEnv::bind(int meta_id, TypePtr t) {
  if (map_.count(meta_id)) {
    throw InternalError(
        fmt::format("metavariable {} bound twice in substitution environment", meta_id));
  }
  map_.emplace(meta_id, std::move(t));
}

void SubstEnv::bind_size(int var, SizeTerm s) {
  if (size_map_.count(var)) {
    throw InternalError(fmt::format("size variable {} bound twice", var));
  }
  size_map_.emplace(var, s);
}

const TypePtr* SubstEnv::lookup(int meta_id) const {
  auto it = map_.find(meta_id);
  return it == map_.end() ? nullptr : &it->second;
}

const SizeTerm* SubstEnv::lookup_size(int var) const {
  auto it = size_map_.find(var);
  return it == size_map_.end() ? nullptr : &it->second;
}

SizeTerm resolve_size(const SubstEnv& env, SizeTerm s) {
  int guard = 0;
  while (!s.is_concrete()) {
    const SizeTerm* next = env.lookup_size(s.var);
    if (!next) break;
    s = SizeTerm{next->var, next->offset + s.offset};
    if (++guard > 10000) throw InternalError("size substitution did not terminate");
  }
  return s;
}

TypePtr resolve(const SubstEnv& env, TypePtr t) {
  int guard = 0;
  for (;;) {
    if (is_meta(t)) {
      const TypePtr* next = env.lookup(t->meta_id);
      if (!next) return t;
      t = *next;
    } else if (t->tag == TyTag::Temporal) {
      SizeTerm s = resolve_size(env, t->size);
      if (s.is_concrete() && s.offset == 0) {
        t = t->args[0];
      } else if (!(s == t->size)) {
        return t_temporal(t->args[0], s);
      } else {
        return t;
      }
    } else {
      return t;
    }
    if (++guard > 10000) throw InternalError("metavariable chain did not terminate");
  }
}

namespace {

TypePtr subst_rec(const SubstEnv& env, const TypePtr& t, bool* changed,
                  std::unordered_set<int>& bv, std::unordered_set<int>& bv_sizes) {
  switch (t->tag) {
    case TyTag::Meta:
    case TyTag::SMeta:
    case TyTag::HMeta: {
      if (bv.count(t->meta_id)) return t;
      const TypePtr* mapped = env.lookup(t->meta_id);
      if (!mapped) return t;
      if (is_meta(*mapped) && (*mapped)->meta_id == t->meta_id) return t;
      *changed = true;
      return *mapped;
    }
    default:
      break;
  }

  std::vector<TypePtr> new_args;
  bool any = false;

  bool binder = t->tag == TyTag::SPoly || t->tag == TyTag::SMu ||
                t->tag == TyTag::HPoly || t->tag == TyTag::MPoly;
  std::vector<int> added, added_sizes;
  if (binder) {
    for (int id : t->bound)
      if (bv.insert(id).second) added.push_back(id);
    for (int id : t->bound_sizes)
      if (bv_sizes.insert(id).second) added_sizes.push_back(id);
  }

  new_args.reserve(t->args.size());
  for (const auto& a : t->args) {
    if (!a) {
      new_args.push_back(nullptr);
      continue;
    }
    bool child_changed = false;
    new_args.push_back(subst_rec(env, a, &child_changed, bv, bv_sizes));
    any = any || child_changed;
  }

  SizeTerm new_size = t->size;
  if ((t->tag == TyTag::Array || t->tag == TyTag::Temporal) && !t->size.is_concrete() &&
      !bv_sizes.count(t->size.var)) {
    SizeTerm resolved = resolve_size(env, t->size);
    if (!(resolved == t->size)) {
      new_size = resolved;
      any = true;
    }
  }

  if (binder) {
    for (int id : added) bv.erase(id);
    for (int id : added_sizes) bv_sizes.erase(id);
  }

  if (!any) return t;
  *changed = true;
  auto copy = std::make_shared<Type>(*t);
  copy->args = std::move(new_args);
  copy->size = new_size;
  if (copy->tag == TyTag::Temporal && copy->size.is_concrete() && copy->size.offset == 0) {
    return copy->args[0];  // delay collapsed to zero
  }
  return copy;
}

}  // namespace

TypePtr subst_pass(const SubstEnv& env, const TypePtr& t, bool* changed) {
  std::unordered_set<int> bv, bv_sizes;
  bool local = false;
  TypePtr out = subst_rec(env, t, &local, bv, bv_sizes);
  if (changed) *changed = local;
  return out;
}

TypePtr subst_fully(const SubstEnv& env, TypePtr t, int iteration_cap) {
  for (int i = 0; i < iteration_cap; ++i) {
    bool changed = false;
    t = subst_pass(env, t, &changed);
    if (!changed) return t;
  }
  throw InternalError("substitution exceeded its iteration cap (cyclic mapping?)");
}

bool equal_types(const TypePtr& a, const TypePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->tag != b->tag) return false;
  if (is_meta(a)) return a->meta_id == b->meta_id;
  if (!(a->size == b->size)) return false;
  if (a->labels != b->labels) return false;
  if (a->bound != b->bound || a->bound_sizes != b->bound_sizes) return false;
  if (a->dt_tag != b->dt_tag) return false;
  if (a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i) {
    if (!a->args[i] != !b->args[i]) return false;
    if (a->args[i] && !equal_types(a->args[i], b->args[i])) return false;
  }
  return true;
}

namespace {

void free_rec(const SubstEnv& env, const TypePtr& t, std::vector<int>& metas,
              std::vector<int>& sizes, std::unordered_set<int>& bv,
              std::unordered_set<int>& bv_sizes, int depth) {
  if (depth > 2000) throw InternalError("type too deep while collecting metavariables");
  TypePtr r = resolve(env, t);
  if (is_meta(r)) {
    if (!bv.count(r->meta_id) &&
        std::find(metas.begin(), metas.end(), r->meta_id) == metas.end())
      metas.push_back(r->meta_id);
    return;
  }
  if (r->tag == TyTag::Array || r->tag == TyTag::Temporal) {
    SizeTerm s = resolve_size(env, r->size);
    if (!s.is_concrete() && !bv_sizes.count(s.var) &&
        std::find(sizes.begin(), sizes.end(), s.var) == sizes.end())
      sizes.push_back(s.var);
  }
  bool binder = r->tag == TyTag::SPoly || r->tag == TyTag::SMu ||
                r->tag == TyTag::HPoly || r->tag == TyTag::MPoly;
  std::vector<int> added, added_sizes;
  if (binder) {
    for (int id : r->bound)
      if (bv.insert(id).second) added.push_back(id);
    for (int id : r->bound_sizes)
      if (bv_sizes.insert(id).second) added_sizes.push_back(id);
  }
  for (const auto& a : r->args)
    if (a) free_rec(env, a, metas, sizes, bv, bv_sizes, depth + 1);
  if (binder) {
    for (int id : added) bv.erase(id);
    for (int id : added_sizes) bv_sizes.erase(id);
  }
}

}  // namespace

void free_metas(const SubstEnv& env, const TypePtr& t, std::vector<int>& metas,
                std::vector<int>& sizes) {
  std::unordered_set<int> bv, bv_sizes;
  free_rec(env, t, metas, sizes, bv, bv_sizes, 0);
}

bool occurs(const SubstEnv& env, int id, const TypePtr& t) {
  std::vector<int> metas, sizes;
  free_metas(env, t, metas, sizes);
  return std::find(metas.begin(), metas.end(), id) != metas.end();
}

// ---------------------------------------------------------------------------
// Unification
// ---------------------------------------------------------------------------

namespace {

UnifyResult mismatch(UnifyStatus status, TypePtr a, TypePtr b) {
  return UnifyResult{status, std::move(a), std::move(b)};
}

bool is_hw_type(const TypePtr& t) { return kind_of(t) == TyKind::Hardware; }
bool is_sw_type(const TypePtr& t) { return kind_of(t) == TyKind::Software; }

}  // namespace

UnifyResult Unifier::unify(TypePtr a, TypePtr b) { return unify_inner(std::move(a), std::move(b)); }

bool Unifier::bound_pair(int x, int y) const {
  for (const auto& [l, r] : binder_pairs_)
    if (l == x) return r == y;
  return false;
}

UnifyResult Unifier::bind_meta(const TypePtr& meta, const TypePtr& t) {
  if (is_meta(t) && t->meta_id == meta->meta_id) return {};
  if (occurs(env_, meta->meta_id, t))
    return mismatch(UnifyStatus::OccursError, meta, t);
  env_.bind(meta->meta_id, t);
  bindings_.emplace_back(meta->meta_id, t);
  return {};
}

UnifyResult Unifier::unify_sizes(const TypePtr& a, const TypePtr& b, SizeTerm x,
                                 SizeTerm y) {
  x = resolve_size(env_, x);
  y = resolve_size(env_, y);
  if (x == y) return {};
  if (x.is_concrete() && y.is_concrete()) {
    return x.offset == y.offset ? UnifyResult{}
                                : mismatch(UnifyStatus::TypeError, a, b);
  }
  auto bind_var = [&](const SizeTerm& v, const SizeTerm& other) -> UnifyResult {
    // v.var + v.offset == other  =>  v.var == other - v.offset
    SizeTerm target{other.var, other.offset - v.offset};
    if (target.is_concrete() && target.offset < 0)
      return mismatch(UnifyStatus::TypeError, a, b);
    if (!target.is_concrete() && target.var == v.var) {
      return target.offset == 0 ? UnifyResult{}
                                : mismatch(UnifyStatus::TypeError, a, b);
    }
    env_.bind_size(v.var, target);
    size_bindings_.emplace_back(v.var, target);
    return {};
  };
  if (!x.is_concrete()) return bind_var(x, y);
  return bind_var(y, x);
}

UnifyResult Unifier::unify_children(const TypePtr& a, const TypePtr& b) {
  if (a->args.size() != b->args.size()) return mismatch(UnifyStatus::TypeError, a, b);
  for (size_t i = 0; i < a->args.size(); ++i) {
    if (!a->args[i] != !b->args[i]) return mismatch(UnifyStatus::TypeError, a, b);
    if (!a->args[i]) continue;
    UnifyResult r = unify_inner(a->args[i], b->args[i]);
    if (!r.ok()) return r;
  }
  return {};
}

UnifyResult Unifier::unify_inner(TypePtr a, TypePtr b) {
  // Alpha-paired binder variables (from mu/poly bodies) only match their
  // partner. Mu variables are mapped in Sigma to their own mu type, so the
  // pairing must be checked before resolution.
  if (is_meta(a) && is_meta(b) && bound_pair(a->meta_id, b->meta_id)) return {};

  a = resolve(env_, a);
  b = resolve(env_, b);

  // TOP/BOTTOM are error-recovery types: they unify with anything without
  // producing new mappings, so one mismatch does not cascade.
  if (is_recovery(a) || is_recovery(b)) return {};

  if (is_meta(a) && is_meta(b) && bound_pair(a->meta_id, b->meta_id)) return {};

  if (a->tag == TyTag::Meta) {
    return bind_meta(a, b);
  }
  if (a->tag == TyTag::HMeta) {
    if (b->tag == TyTag::Meta) return bind_meta(b, a);
    if (is_hw_type(b)) return bind_meta(a, b);
    return mismatch(UnifyStatus::KindError, a, b);
  }
  if (a->tag == TyTag::SMeta) {
    if (b->tag == TyTag::Meta) return bind_meta(b, a);
    if (is_sw_type(b)) return bind_meta(a, b);
    return mismatch(UnifyStatus::KindError, a, b);
  }
  if (b->tag == TyTag::Meta) return bind_meta(b, a);
  if (b->tag == TyTag::HMeta) {
    if (is_hw_type(a)) return bind_meta(b, a);
    return mismatch(UnifyStatus::KindError, a, b);
  }
  if (b->tag == TyTag::SMeta) {
    if (is_sw_type(a)) return bind_meta(b, a);
    return mismatch(UnifyStatus::KindError, a, b);
  }

  TyKind ka = kind_of(a), kb = kind_of(b);
  if (ka != kb) return mismatch(UnifyStatus::KindError, a, b);

  // A value of plain hardware type is a zero-delay value: T @ n unifies with
  // a non-temporal T by forcing n to zero.
  if (a->tag == TyTag::Temporal && b->tag != TyTag::Temporal) {
    UnifyResult r = unify_sizes(a, b, a->size, SizeTerm::concrete(0));
    if (!r.ok()) return r;
    return unify_inner(a->args[0], b);
  }
  if (b->tag == TyTag::Temporal && a->tag != TyTag::Temporal) {
    UnifyResult r = unify_sizes(a, b, b->size, SizeTerm::concrete(0));
    if (!r.ok()) return r;
    return unify_inner(a, b->args[0]);
  }

  if (a->tag != b->tag) return mismatch(UnifyStatus::TypeError, a, b);

  switch (a->tag) {
    case TyTag::Int:
    case TyTag::Real:
    case TyTag::String:
    case TyTag::Bit:
      return {};
    case TyTag::Arrow:
    case TyTag::List:
    case TyTag::Ref:
    case TyTag::Sw:
    case TyTag::Module:
    case TyTag::ParamModule:
      return unify_children(a, b);
    case TyTag::SRecord:
    case TyTag::HRecord:
      if (a->labels != b->labels) return mismatch(UnifyStatus::TypeError, a, b);
      return unify_children(a, b);
    case TyTag::Array: {
      UnifyResult r = unify_sizes(a, b, a->size, b->size);
      if (!r.ok()) return r;
      return unify_inner(a->args[0], b->args[0]);
    }
    case TyTag::Temporal: {
      UnifyResult r = unify_sizes(a, b, a->size, b->size);
      if (!r.ok()) return r;
      return unify_inner(a->args[0], b->args[0]);
    }
    case TyTag::SDatatype:
    case TyTag::HDatatype:
      if (a->dt_tag != b->dt_tag) return mismatch(UnifyStatus::TypeError, a, b);
      return unify_children(a, b);
    case TyTag::SMu:
    case TyTag::SPoly:
    case TyTag::HPoly:
    case TyTag::MPoly: {
      if (a->bound.size() != b->bound.size() ||
          a->bound_sizes.size() != b->bound_sizes.size())
        return mismatch(UnifyStatus::TypeError, a, b);
      size_t mark = binder_pairs_.size();
      for (size_t i = 0; i < a->bound.size(); ++i)
        binder_pairs_.emplace_back(a->bound[i], b->bound[i]);
      UnifyResult r = unify_children(a, b);
      binder_pairs_.resize(mark);
      return r;
    }
    default:
      return mismatch(UnifyStatus::TypeError, a, b);
  }
}

UnifyResult unify(TypePtr a, TypePtr b, SubstEnv& env) {
  Unifier u(env);
  return u.unify(std::move(a), std::move(b));
}

// ---------------------------------------------------------------------------
// Instantiation / generalization
// ---------------------------------------------------------------------------

namespace {

TypePtr replace_vars(const TypePtr& t,
                     std::unordered_map<int, TypePtr>& meta_map,
                     const std::unordered_map<int, int>& size_map) {
  if (!t) return nullptr;
  if (is_meta(t)) {
    auto it = meta_map.find(t->meta_id);
    return it == meta_map.end() ? t : it->second;
  }
  auto copy = std::make_shared<Type>(*t);
  bool changed = false;
  for (auto& a : copy->args) {
    TypePtr replaced = replace_vars(a, meta_map, size_map);
    if (replaced != a) changed = true;
    a = replaced;
  }
  if ((t->tag == TyTag::Array || t->tag == TyTag::Temporal) && !t->size.is_concrete()) {
    auto it = size_map.find(t->size.var);
    if (it != size_map.end()) {
      copy->size.var = it->second;
      changed = true;
    }
  }
  return changed ? TypePtr(copy) : t;
}

}  // namespace

TypePtr instantiate(const TypePtr& t, MetaSource& fresh) {
  if (t->tag != TyTag::SPoly && t->tag != TyTag::HPoly && t->tag != TyTag::MPoly)
    return t;
  std::unordered_map<int, TypePtr> meta_map;
  std::unordered_map<int, int> size_map;
  // Bound variables are replaced uniformly; the fresh metavariable keeps the
  // kind of the occurrence it replaces, determined lazily below.
  struct Collect {
    static void visit(const TypePtr& n, const std::vector<int>& ids,
                      std::unordered_map<int, TyTag>& kinds) {
      if (!n) return;
      if (is_meta(n) &&
          std::find(ids.begin(), ids.end(), n->meta_id) != ids.end())
        kinds.emplace(n->meta_id, n->tag);
      for (const auto& a : n->args) visit(a, ids, kinds);
    }
  };
  std::unordered_map<int, TyTag> kinds;
  Collect::visit(t->args[0], t->bound, kinds);
  for (int id : t->bound) {
    TyTag tag = kinds.count(id) ? kinds[id] : TyTag::SMeta;
    TyKind k = tag == TyTag::HMeta   ? TyKind::Hardware
               : tag == TyTag::SMeta ? TyKind::Software
                                     : TyKind::Unknown;
    meta_map.emplace(id, fresh.fresh(k));
  }
  for (int id : t->bound_sizes) size_map.emplace(id, fresh.fresh_size_var());
  return replace_vars(t->args[0], meta_map, size_map);
}

TypePtr unroll_mu(const TypePtr& t) {
  if (t->tag != TyTag::SMu) return t;
  std::unordered_map<int, TypePtr> meta_map;
  for (int id : t->bound) meta_map.emplace(id, t);
  std::unordered_map<int, int> size_map;
  return replace_vars(t->args[0], meta_map, size_map);
}

TypePtr generalize(const SubstEnv& env, TypePtr t,
                   const std::unordered_set<int>& outer_metas,
                   const std::unordered_set<int>& outer_sizes) {
  t = subst_fully(env, t);
  std::vector<int> metas, sizes;
  free_metas(env, t, metas, sizes);
  std::vector<int> gen_metas, gen_sizes;
  for (int id : metas)
    if (!outer_metas.count(id)) gen_metas.push_back(id);
  for (int id : sizes)
    if (!outer_sizes.count(id)) gen_sizes.push_back(id);
  if (gen_metas.empty() && gen_sizes.empty()) return t;
  TyKind k = kind_of(t);
  if (k == TyKind::Software || k == TyKind::Unknown)
    return t_spoly(std::move(gen_metas), std::move(gen_sizes), t);
  if (k == TyKind::Module)
    return t_mpoly(std::move(gen_metas), std::move(gen_sizes), t);
  return t;  // hardware bindings stay monomorphic
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

bool is_tuple_record(const Type& t) {
  if (t.labels.empty()) return false;
  for (size_t i = 0; i < t.labels.size(); ++i)
    if (t.labels[i] != std::to_string(i + 1)) return false;
  return true;
}

}  // namespace

std::string TypeRenderer::meta_name(int id) {
  auto it = meta_names_.find(id);
  if (it != meta_names_.end()) return it->second;
  size_t n = meta_names_.size();
  std::string name = "'";
  name += static_cast<char>('a' + n % 26);
  if (n >= 26) name += std::to_string(n / 26);
  meta_names_.emplace(id, name);
  return name;
}

std::string TypeRenderer::size_name(int var) {
  auto it = size_names_.find(var);
  if (it != size_names_.end()) return it->second;
  static const char letters[] = {'n', 'm', 'k', 'p', 'q'};
  size_t n = size_names_.size();
  std::string name(1, letters[n % 5]);
  if (n >= 5) name += std::to_string(n / 5);
  size_names_.emplace(var, name);
  return name;
}

// Precedence: 0 arrow/module, 1 tuple, 2 postfix constructors, 3 atoms.
std::string TypeRenderer::render_inner(const TypePtr& t, int prec) {
  auto wrap = [&](int mine, std::string s) {
    return mine < prec ? "(" + s + ")" : s;
  };
  switch (t->tag) {
    case TyTag::Int: return "int";
    case TyTag::Real: return "real";
    case TyTag::String: return "string";
    case TyTag::Bit: return "bit";
    case TyTag::Meta:
    case TyTag::SMeta:
    case TyTag::HMeta:
      return meta_name(t->meta_id);
    case TyTag::Top: return "top";
    case TyTag::Bottom: return "bottom";
    case TyTag::STop: return "top";
    case TyTag::SBottom: return "bottom";
    case TyTag::HTop: return "top";
    case TyTag::HBottom: return "bottom";
    case TyTag::MBottom: return "bottom";
    case TyTag::Arrow:
      return wrap(0, render_inner(t->args[0], 1) + " -> " + render_inner(t->args[1], 0));
    case TyTag::Module:
      return wrap(0, render_inner(t->args[0], 1) + " ~> " + render_inner(t->args[1], 0));
    case TyTag::ParamModule:
      return wrap(0, "<:" + render_inner(t->args[0], 0) + ":> " +
                         render_inner(t->args[1], 1) + " ~> " +
                         render_inner(t->args[2], 0));
    case TyTag::List:
      return wrap(2, render_inner(t->args[0], 2) + " list");
    case TyTag::Ref:
      return wrap(2, render_inner(t->args[0], 2) + " ref");
    case TyTag::Sw:
      return wrap(2, render_inner(t->args[0], 2) + " sw");
    case TyTag::Array: {
      std::string size = t->size.is_concrete() ? std::to_string(t->size.offset)
                                               : size_name(t->size.var);
      return wrap(2, render_inner(t->args[0], 2) + "[" + size + "]");
    }
    case TyTag::Temporal: {
      std::string time;
      if (t->size.is_concrete()) {
        time = std::to_string(t->size.offset);
      } else {
        time = size_name(t->size.var);
        if (t->size.offset != 0) time += " + " + std::to_string(t->size.offset);
      }
      return wrap(1, render_inner(t->args[0], 2) + " @ " + time);
    }
    case TyTag::SRecord:
    case TyTag::HRecord: {
      bool hw = t->tag == TyTag::HRecord;
      if (t->labels.empty()) return hw ? "#{}" : "unit";
      if (is_tuple_record(*t)) {
        std::string out;
        for (size_t i = 0; i < t->args.size(); ++i) {
          if (i) out += hw ? " #* " : " * ";
          out += render_inner(t->args[i], 2);
        }
        return wrap(1, out);
      }
      std::string out = hw ? "#{" : "{";
      for (size_t i = 0; i < t->args.size(); ++i) {
        if (i) out += ", ";
        out += t->labels[i] + ": " + render_inner(t->args[i], 0);
      }
      return out + "}";
    }
    case TyTag::SDatatype:
    case TyTag::HDatatype:
      return t->dt_name.empty() ? "<datatype>" : t->dt_name;
    case TyTag::SMu:
      return render_inner(t->args[0], prec);
    case TyTag::SPoly:
    case TyTag::HPoly:
    case TyTag::MPoly:
      return render_inner(t->args[0], prec);
  }
  return "?";
}

std::string TypeRenderer::render(const TypePtr& t) { return render_inner(t, 0); }

std::string render_type(const TypePtr& t) {
  TypeRenderer r;
  return r.render(t);
}

}  // namespace gemini
