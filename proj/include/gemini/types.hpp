#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace gemini {

struct Type;
using TypePtr = std::shared_ptr<const Type>;

enum class TyTag {
  // kind not yet known
  Meta, Top, Bottom,
  // software
  Int, Real, String, Arrow, List, Sw, SRecord, Ref, SDatatype, SMu, SPoly,
  SMeta, STop, SBottom,
  // hardware
  Bit, Array, Temporal, HRecord, HDatatype, HPoly, HMeta, HTop, HBottom,
  // module
  Module, ParamModule, MPoly, MBottom,
};

enum class TyKind { Software, Hardware, Module, Unknown };

// Size/time index of dependent array and temporal types: either a concrete
// value (var == 0) or a variable plus a constant offset. Offsets only arise
// on temporal types (the flip-flop signature adds one cycle).
struct SizeTerm {
  int var = 0;
  int64_t offset = 0;

  static SizeTerm concrete(int64_t n) { return SizeTerm{0, n}; }
  static SizeTerm variable(int v, int64_t off = 0) { return SizeTerm{v, off}; }
  bool is_concrete() const { return var == 0; }
  bool operator==(const SizeTerm& o) const { return var == o.var && offset == o.offset; }
};

// Immutable semantic type node. Field usage by tag:
//   args      — children: Arrow/Module in+out, List/Ref/Sw/Array/Temporal
//               element, SRecord/HRecord field types, SDatatype/HDatatype
//               constructor payloads (null entry = nullary ctor),
//               SMu/SPoly/HPoly/MPoly body (single element)
//   labels    — record field labels or datatype constructor names
//   meta_id   — Meta/SMeta/HMeta identity
//   size      — Array length, Temporal delay
//   bound/bound_sizes — quantified metavariables and size variables
//   dt_tag    — nominal datatype identity; dt_name — display name
struct Type {
  TyTag tag;
  std::vector<TypePtr> args;
  std::vector<std::string> labels;
  int meta_id = 0;
  SizeTerm size;
  std::vector<int> bound;
  std::vector<int> bound_sizes;
  uint64_t dt_tag = 0;
  std::string dt_name;
};

// -- constructors -----------------------------------------------------------

TypePtr t_int();
TypePtr t_real();
TypePtr t_string();
TypePtr t_bit();
TypePtr t_unit();  // empty software record
TypePtr t_arrow(TypePtr a, TypePtr b);
TypePtr t_list(TypePtr elem);
TypePtr t_ref(TypePtr elem);
TypePtr t_sw(TypePtr hw);
TypePtr t_srecord(std::vector<std::string> labels, std::vector<TypePtr> fields);
TypePtr t_hrecord(std::vector<std::string> labels, std::vector<TypePtr> fields);
TypePtr t_tuple(std::vector<TypePtr> fields);    // numeric labels, software
TypePtr t_htuple(std::vector<TypePtr> fields);   // numeric labels, hardware
TypePtr t_array(TypePtr elem, SizeTerm size);
TypePtr t_temporal(TypePtr elem, SizeTerm time);
TypePtr t_module(TypePtr in, TypePtr out);
TypePtr t_param_module(TypePtr size_ty, TypePtr in, TypePtr out);
TypePtr t_meta(int id);
TypePtr t_smeta(int id);
TypePtr t_hmeta(int id);
TypePtr t_top();
TypePtr t_bottom();
TypePtr t_stop();
TypePtr t_sbottom();
TypePtr t_htop();
TypePtr t_hbottom();
TypePtr t_mbottom();
TypePtr t_sdatatype(std::vector<std::string> ctors, std::vector<TypePtr> payloads,
                    uint64_t tag, std::string name);
TypePtr t_hdatatype(std::vector<std::string> ctors, std::vector<TypePtr> payloads,
                    uint64_t tag, std::string name);
TypePtr t_smu(std::vector<int> bound, TypePtr body);
TypePtr t_spoly(std::vector<int> bound, std::vector<int> bound_sizes, TypePtr body);
TypePtr t_mpoly(std::vector<int> bound, std::vector<int> bound_sizes, TypePtr body);

// -- allocation of fresh metavariables and identities ------------------------

class MetaSource {
 public:
  TypePtr fresh(TyKind kind);   // Unknown -> Meta, Software -> SMeta, Hardware -> HMeta
  int fresh_size_var() { return next_size_++; }
  uint64_t fresh_datatype_tag() { return next_dt_++; }
  int fresh_meta_id() { return next_meta_++; }
  int metas_created() const { return next_meta_ - 1; }

 private:
  int next_meta_ = 1;
  int next_size_ = 1;
  uint64_t next_dt_ = 1;
};

// -- the global substitution environment Sigma --------------------------------

class InternalError : public std::exception {
 public:
  explicit InternalError(std::string msg) : msg_(std::move(msg)) {}
  const char* what() const noexcept override { return msg_.c_str(); }

 private:
  std::string msg_;
};

class SubstEnv {
 public:
  // Inserting an id twice is an internal error: metavariables are fresh and
  // the mapping must stay injective on its domain.
  void bind(int meta_id, TypePtr t);
  void bind_size(int var, SizeTerm s);

  const TypePtr* lookup(int meta_id) const;
  const SizeTerm* lookup_size(int var) const;
  size_t size() const { return map_.size(); }

 private:
  std::unordered_map<int, TypePtr> map_;
  std::unordered_map<int, SizeTerm> size_map_;
};

// -- queries ------------------------------------------------------------------

TyKind kind_of(const TypePtr& t);
bool is_meta(const TypePtr& t);      // Meta / SMeta / HMeta
bool is_recovery(const TypePtr& t);  // any TOP/BOTTOM variant

// Chases the root of t through Sigma until it is not a bound metavariable.
// Size terms at the root are also resolved. Does not rewrite children.
TypePtr resolve(const SubstEnv& env, TypePtr t);
SizeTerm resolve_size(const SubstEnv& env, SizeTerm s);

// One full substitution pass (Fig.-10-style SubstituteType): rewrites every
// metavariable bound in Sigma except those bound by an enclosing poly/mu
// binder. Sets *changed when any rewrite happened.
TypePtr subst_pass(const SubstEnv& env, const TypePtr& t, bool* changed);

// Iterates subst_pass to a fixed point; throws InternalError past the
// iteration cap (a cycle escaped the occurs check).
TypePtr subst_fully(const SubstEnv& env, TypePtr t, int iteration_cap = 10000);

// Structural, size-sensitive equality. Metavariables compare by identity.
bool equal_types(const TypePtr& a, const TypePtr& b);

// True when `id` occurs (unbound) in t after resolving through Sigma.
bool occurs(const SubstEnv& env, int id, const TypePtr& t);

void free_metas(const SubstEnv& env, const TypePtr& t,
                std::vector<int>& metas, std::vector<int>& sizes);

// -- unification ---------------------------------------------------------------

enum class UnifyStatus { Ok, TypeError, KindError, OccursError };

struct UnifyResult {
  UnifyStatus status = UnifyStatus::Ok;
  TypePtr left, right;  // offending pair on failure
  bool ok() const { return status == UnifyStatus::Ok; }
};

// Computes the smallest mapping making the two types equal and merges it
// into env. On failure env retains any bindings made before the conflict
// (analysis continues under error recovery). `bindings`/`size_bindings`
// record what was added for minimality checks.
class Unifier {
 public:
  explicit Unifier(SubstEnv& env) : env_(env) {}

  UnifyResult unify(TypePtr a, TypePtr b);

  const std::vector<std::pair<int, TypePtr>>& bindings() const { return bindings_; }
  const std::vector<std::pair<int, SizeTerm>>& size_bindings() const {
    return size_bindings_;
  }

 private:
  UnifyResult unify_inner(TypePtr a, TypePtr b);
  UnifyResult unify_children(const TypePtr& a, const TypePtr& b);
  UnifyResult unify_sizes(const TypePtr& a, const TypePtr& b, SizeTerm x, SizeTerm y);
  UnifyResult bind_meta(const TypePtr& meta, const TypePtr& t);
  bool bound_pair(int a, int b) const;

  SubstEnv& env_;
  std::vector<std::pair<int, TypePtr>> bindings_;
  std::vector<std::pair<int, SizeTerm>> size_bindings_;
  std::vector<std::pair<int, int>> binder_pairs_;  // alpha-paired bound vars
};

UnifyResult unify(TypePtr a, TypePtr b, SubstEnv& env);

// -- polymorphism ----------------------------------------------------------------

// Replaces the bound variables of a SPoly/HPoly/MPoly root with fresh
// metavariables (sheds the universal quantifier). Non-poly types pass through.
TypePtr instantiate(const TypePtr& t, MetaSource& fresh);

// Expands a mu-wrapped recursive type exactly one level: occurrences of the
// mu-bound variables in the body become the mu type itself.
TypePtr unroll_mu(const TypePtr& t);

// Quantifies the free metavariables and size variables of t that are not in
// `outer_metas`/`outer_sizes` (the environment's free variables). Software
// types become SPoly, module types MPoly; other kinds are returned unchanged
// unless they contain nothing to bind.
TypePtr generalize(const SubstEnv& env, TypePtr t,
                   const std::unordered_set<int>& outer_metas,
                   const std::unordered_set<int>& outer_sizes);

// -- rendering --------------------------------------------------------------------

// Stable textual rendering: metavariables print as 'a, 'b, ... and size
// variables as n, m, ... in first-occurrence order per renderer instance.
class TypeRenderer {
 public:
  std::string render(const TypePtr& t);

 private:
  std::string meta_name(int id);
  std::string size_name(int var);
  std::string render_inner(const TypePtr& t, int prec);

  std::unordered_map<int, std::string> meta_names_;
  std::unordered_map<int, std::string> size_names_;
};

std::string render_type(const TypePtr& t);  // one-shot renderer

}  // namespace gemini
