/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#include "gradir/ast.hpp"

#include <algorithm>
#include <functional>
#include <utility>

namespace gradir {

std::string_view to_string(Kind k) {
  switch (k) {
    case Kind::BaseType:
      return "BaseType";
    case Kind::Shape:
      return "Shape";
    case Kind::Type:
      return "Type";
  }
  return "?";
}

bool BaseType::width_supported() const {
  switch (scalar) {
    case Scalar::Int:
    case Scalar::UInt:
      return width == 8 || width == 16 || width == 32 || width == 64;
    case Scalar::Float:
      return width == 32 || width == 64;
    case Scalar::Bool:
      return width == 1;
  }
  return false;
}

std::string_view to_string(BinaryOperator op) {
  switch (op) {
    case BinaryOperator::Add: return "+";
    case BinaryOperator::Sub: return "-";
    case BinaryOperator::Mul: return "*";
    case BinaryOperator::Div: return "/";
    case BinaryOperator::Ne: return "!=";
    case BinaryOperator::Eq: return "=";
    case BinaryOperator::Lt: return "<";
    case BinaryOperator::Le: return "<=";
    case BinaryOperator::Gt: return ">";
    case BinaryOperator::Ge: return ">=";
  }
  return "?";
}

std::string_view to_string(UnaryOperator op) {
  return op == UnaryOperator::Neg ? "-" : "sq";
}

bool is_comparison(BinaryOperator op) {
  switch (op) {
    case BinaryOperator::Add:
    case BinaryOperator::Sub:
    case BinaryOperator::Mul:
    case BinaryOperator::Div:
      return false;
    default:
      return true;
  }
}

// ---------------------------------------------------------------------------
// Type constructors
// ---------------------------------------------------------------------------

namespace {
Type make_type(TypeNode::Variant v, Span span) {
  return std::make_shared<const TypeNode>(TypeNode{std::move(v), span});
}
}  // namespace

Type base_type(BaseType b, Span span) { return make_type(types::Base{b}, span); }
Type shape_type(std::vector<std::int64_t> dims, Span span) {
  return make_type(types::ShapeLit{std::move(dims)}, span);
}
Type tensor_type(Type base, Type shape, Span span) {
  return make_type(types::Tensor{std::move(base), std::move(shape)}, span);
}
Type tensor_type(BaseType base, std::vector<std::int64_t> dims) {
  return tensor_type(base_type(base), shape_type(std::move(dims)));
}
Type arrow_type(Type domain, Type codomain, Span span) {
  return make_type(types::Arrow{std::move(domain), std::move(codomain)}, span);
}
Type function_type(std::vector<Type> params, Type codomain) {
  return arrow_type(product_type(std::move(params)), std::move(codomain));
}
Type type_var(std::string name, Span span) { return make_type(types::Var{std::move(name)}, span); }
Type forall_type(std::string var, Kind kind, Type body, Span span) {
  return make_type(types::Forall{std::move(var), kind, std::move(body)}, span);
}
Type ref_type(Type inner, Span span) { return make_type(types::Ref{std::move(inner)}, span); }
Type product_type(std::vector<Type> elements, Span span) {
  return make_type(types::Product{std::move(elements)}, span);
}
Type unit_type() { return product_type({}); }

std::vector<Type> domain_components(const types::Arrow& arrow) {
  if (auto* p = arrow.domain->as<types::Product>()) return p->elements;
  return {arrow.domain};
}

std::optional<TensorInfo> tensor_info(const Type& t) {
  auto* tt = t->as<types::Tensor>();
  if (!tt) return std::nullopt;
  auto* b = tt->base->as<types::Base>();
  auto* s = tt->shape->as<types::ShapeLit>();
  if (!b || !s) return std::nullopt;
  return TensorInfo{b->base, s->dims};
}

bool is_float_tensor(const Type& t) {
  auto info = tensor_info(t);
  return info && info->base.is_float();
}

// ---------------------------------------------------------------------------
// Expression constructors
// ---------------------------------------------------------------------------

std::string_view node_name(const ExprNode& e) {
  static constexpr std::string_view names[] = {
      "LocalVar", "GlobalVar", "IntLit",     "FloatLit",  "BoolLit", "Call",   "Let",
      "Cast",     "BinOp",     "UnaryOp",    "Tuple",     "Projection", "TensorLit", "If",
      "Zero",     "Grad",      "RefNew",     "RefRead",   "RefWrite", "Function"};
  return names[e.v.index()];
}

namespace ir {
Expr make(ExprNode::Variant v, Span span) {
  return std::make_shared<const ExprNode>(ExprNode{std::move(v), span});
}
Expr local(std::string name) { return make(exprs::LocalVar{std::move(name)}); }
Expr global(std::string name) { return make(exprs::GlobalVar{std::move(name)}); }
Expr int_lit(std::int64_t v) { return make(exprs::IntLit{v}); }
Expr float_lit(double v, unsigned width) { return make(exprs::FloatLit{v, width}); }
Expr bool_lit(bool v) { return make(exprs::BoolLit{v}); }
Expr call(Expr callee, std::vector<Expr> args) {
  return make(exprs::Call{std::move(callee), std::move(args)});
}
Expr let(std::string binder, Expr value, Expr body, Type annotation) {
  return make(exprs::Let{std::move(binder), std::move(annotation), std::move(value), std::move(body)});
}
Expr binop(BinaryOperator op, Expr lhs, Expr rhs) {
  return make(exprs::BinOp{op, std::move(lhs), std::move(rhs)});
}
Expr unop(UnaryOperator op, Expr operand) { return make(exprs::UnaryOp{op, std::move(operand)}); }
Expr tuple(std::vector<Expr> elements) { return make(exprs::Tuple{std::move(elements)}); }
Expr unit() { return tuple({}); }
Expr proj(Expr tuple, std::size_t index) { return make(exprs::Projection{std::move(tuple), index}); }
Expr if_(Expr c, Expr t, Expr e) { return make(exprs::If{std::move(c), std::move(t), std::move(e)}); }
Expr zero(Type t) { return make(exprs::Zero{std::move(t)}); }
Expr grad(Expr fn) { return make(exprs::Grad{std::move(fn)}); }
Expr ref_new(Expr init) { return make(exprs::RefNew{std::move(init)}); }
Expr ref_read(Expr ref) { return make(exprs::RefRead{std::move(ref)}); }
Expr ref_write(Expr ref, Expr value) { return make(exprs::RefWrite{std::move(ref), std::move(value)}); }
Expr fn(std::vector<Param> params, Type ret, Expr body) {
  return make(exprs::Function{std::move(params), std::move(ret), std::move(body)});
}
}  // namespace ir

// ---------------------------------------------------------------------------
// Programs
// ---------------------------------------------------------------------------

Type Definition::type() const {
  std::vector<Type> ps;
  ps.reserve(params.size());
  for (const auto& p : params) ps.push_back(p.type);
  return function_type(std::move(ps), ret);
}

const std::string& item_name(const Item& item) {
  return std::visit([](const auto& it) -> const std::string& { return it.name; }, item);
}

void Program::add(Item item) {
  const auto& name = item_name(item);
  if (index_.count(name)) throw std::invalid_argument("duplicate global name @" + name);
  index_.emplace(name, items_.size());
  items_.push_back(std::move(item));
}

void Program::replace(Item item) {
  auto it = index_.find(item_name(item));
  if (it == index_.end()) throw std::invalid_argument("no global named @" + item_name(item));
  items_[it->second] = std::move(item);
}

const Item* Program::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &items_[it->second];
}

const Definition* Program::find_definition(std::string_view name) const {
  auto* item = find(name);
  return item ? std::get_if<Definition>(item) : nullptr;
}

const OperatorDecl* Program::find_operator(std::string_view name) const {
  auto* item = find(name);
  return item ? std::get_if<OperatorDecl>(item) : nullptr;
}

// ---------------------------------------------------------------------------
// Traversal helpers
// ---------------------------------------------------------------------------

namespace {

template <class F>
void for_each_child(const ExprNode& e, F&& f) {
  std::visit(overloaded{
                 [&](const exprs::Call& c) {
                   f(c.callee);
                   for (auto& a : c.args) f(a);
                 },
                 [&](const exprs::Let& l) {
                   f(l.value);
                   f(l.body);
                 },
                 [&](const exprs::Cast& c) { f(c.inner); },
                 [&](const exprs::BinOp& b) {
                   f(b.lhs);
                   f(b.rhs);
                 },
                 [&](const exprs::UnaryOp& u) { f(u.operand); },
                 [&](const exprs::Tuple& t) {
                   for (auto& x : t.elements) f(x);
                 },
                 [&](const exprs::Projection& p) { f(p.tuple); },
                 [&](const exprs::TensorLit& t) {
                   for (auto& x : t.elements) f(x);
                 },
                 [&](const exprs::If& i) {
                   f(i.cond);
                   f(i.then_branch);
                   f(i.else_branch);
                 },
                 [&](const exprs::Grad& g) { f(g.fn); },
                 [&](const exprs::RefNew& r) { f(r.init); },
                 [&](const exprs::RefRead& r) { f(r.ref); },
                 [&](const exprs::RefWrite& r) {
                   f(r.ref);
                   f(r.value);
                 },
                 [&](const exprs::Function& fn) { f(fn.body); },
                 [](const auto&) {},
             },
             e.v);
}

bool any_node(const Expr& e, const std::function<bool(const ExprNode&)>& pred) {
  if (pred(*e)) return true;
  bool found = false;
  for_each_child(*e, [&](const Expr& c) { found = found || any_node(c, pred); });
  return found;
}

void free_vars_impl(const Expr& e, std::vector<std::string>& bound, std::set<std::string>& out) {
  auto is_bound = [&](const std::string& n) {
    return std::find(bound.begin(), bound.end(), n) != bound.end();
  };
  std::visit(overloaded{
                 [&](const exprs::LocalVar& v) {
                   if (!is_bound(v.name)) out.insert(v.name);
                 },
                 [&](const exprs::Let& l) {
                   free_vars_impl(l.value, bound, out);
                   bound.push_back(l.binder);
                   free_vars_impl(l.body, bound, out);
                   bound.pop_back();
                 },
                 [&](const exprs::Function& f) {
                   for (auto& p : f.params) bound.push_back(p.name);
                   free_vars_impl(f.body, bound, out);
                   bound.resize(bound.size() - f.params.size());
                 },
                 [&](const auto&) {
                   for_each_child(*e, [&](const Expr& c) { free_vars_impl(c, bound, out); });
                 },
             },
             e->v);
}

void ftv_impl(const Type& t, std::vector<std::string>& bound, std::set<std::string>& out) {
  std::visit(overloaded{
                 [&](const types::Var& v) {
                   if (std::find(bound.begin(), bound.end(), v.name) == bound.end()) out.insert(v.name);
                 },
                 [&](const types::Tensor& x) {
                   ftv_impl(x.base, bound, out);
                   ftv_impl(x.shape, bound, out);
                 },
                 [&](const types::Arrow& x) {
                   ftv_impl(x.domain, bound, out);
                   ftv_impl(x.codomain, bound, out);
                 },
                 [&](const types::Forall& x) {
                   bound.push_back(x.var);
                   ftv_impl(x.body, bound, out);
                   bound.pop_back();
                 },
                 [&](const types::Ref& x) { ftv_impl(x.inner, bound, out); },
                 [&](const types::Product& x) {
                   for (auto& e : x.elements) ftv_impl(e, bound, out);
                 },
                 [](const auto&) {},
             },
             t->v);
}

void collect_type_names(const Type& t, std::set<std::string>& out) {
  if (!t) return;
  std::visit(overloaded{
                 [&](const types::Var& v) { out.insert(v.name); },
                 [&](const types::Tensor& x) {
                   collect_type_names(x.base, out);
                   collect_type_names(x.shape, out);
                 },
                 [&](const types::Arrow& x) {
                   collect_type_names(x.domain, out);
                   collect_type_names(x.codomain, out);
                 },
                 [&](const types::Forall& x) {
                   out.insert(x.var);
                   collect_type_names(x.body, out);
                 },
                 [&](const types::Ref& x) { collect_type_names(x.inner, out); },
                 [&](const types::Product& x) {
                   for (auto& e : x.elements) collect_type_names(e, out);
                 },
                 [](const auto&) {},
             },
             t->v);
}

// Scoped correspondence of bound names between the two sides of a comparison.
class Equivalence {
 public:
  explicit Equivalence(bool strict) : strict_(strict) {}

  bool types(const Type& a, const Type& b) {
    if (a->v.index() != b->v.index()) return false;
    return std::visit(
        overloaded{
            [&](const types::Base& x) { return x.base == b->as<types::Base>()->base; },
            [&](const types::ShapeLit& x) { return x.dims == b->as<types::ShapeLit>()->dims; },
            [&](const types::Tensor& x) {
              auto* y = b->as<types::Tensor>();
              return types(x.base, y->base) && types(x.shape, y->shape);
            },
            [&](const types::Arrow& x) {
              auto* y = b->as<types::Arrow>();
              return types(x.domain, y->domain) && types(x.codomain, y->codomain);
            },
            [&](const types::Var& x) { return same(type_scope_, x.name, b->as<types::Var>()->name); },
            [&](const types::Forall& x) {
              auto* y = b->as<types::Forall>();
              if (x.kind != y->kind) return false;
              if (strict_ && x.var != y->var) return false;
              type_scope_.emplace_back(x.var, y->var);
              bool ok = types(x.body, y->body);
              type_scope_.pop_back();
              return ok;
            },
            [&](const types::Ref& x) { return types(x.inner, b->as<types::Ref>()->inner); },
            [&](const types::Product& x) {
              auto* y = b->as<types::Product>();
              return list(x.elements, y->elements, [&](auto& p, auto& q) { return types(p, q); });
            },
        },
        a->v);
  }

  bool opt_types(const Type& a, const Type& b) {
    if (!a || !b) return !a && !b;
    return types(a, b);
  }

  bool exprs(const Expr& a, const Expr& b) {
    if (a->v.index() != b->v.index()) return false;
    return std::visit(
        overloaded{
            [&](const exprs::LocalVar& x) { return same(term_scope_, x.name, b->as<exprs::LocalVar>()->name); },
            [&](const exprs::GlobalVar& x) { return x.name == b->as<exprs::GlobalVar>()->name; },
            [&](const exprs::IntLit& x) { return x.value == b->as<exprs::IntLit>()->value; },
            [&](const exprs::FloatLit& x) {
              auto* y = b->as<exprs::FloatLit>();
              return x.width == y->width &&
                     (x.value == y->value || (x.value != x.value && y->value != y->value));
            },
            [&](const exprs::BoolLit& x) { return x.value == b->as<exprs::BoolLit>()->value; },
            [&](const exprs::Call& x) {
              auto* y = b->as<exprs::Call>();
              return exprs(x.callee, y->callee) && expr_list(x.args, y->args);
            },
            [&](const exprs::Let& x) {
              auto* y = b->as<exprs::Let>();
              if (strict_ && x.binder != y->binder) return false;
              if (!opt_types(x.annotation, y->annotation) || !exprs(x.value, y->value)) return false;
              term_scope_.emplace_back(x.binder, y->binder);
              bool ok = exprs(x.body, y->body);
              term_scope_.pop_back();
              return ok;
            },
            [&](const exprs::Cast& x) {
              auto* y = b->as<exprs::Cast>();
              return types(x.target, y->target) && exprs(x.inner, y->inner);
            },
            [&](const exprs::BinOp& x) {
              auto* y = b->as<exprs::BinOp>();
              return x.op == y->op && exprs(x.lhs, y->lhs) && exprs(x.rhs, y->rhs);
            },
            [&](const exprs::UnaryOp& x) {
              auto* y = b->as<exprs::UnaryOp>();
              return x.op == y->op && exprs(x.operand, y->operand);
            },
            [&](const exprs::Tuple& x) { return expr_list(x.elements, b->as<exprs::Tuple>()->elements); },
            [&](const exprs::Projection& x) {
              auto* y = b->as<exprs::Projection>();
              return x.index == y->index && exprs(x.tuple, y->tuple);
            },
            [&](const exprs::TensorLit& x) { return expr_list(x.elements, b->as<exprs::TensorLit>()->elements); },
            [&](const exprs::If& x) {
              auto* y = b->as<exprs::If>();
              return exprs(x.cond, y->cond) && exprs(x.then_branch, y->then_branch) &&
                     exprs(x.else_branch, y->else_branch);
            },
            [&](const exprs::Zero& x) { return types(x.type, b->as<exprs::Zero>()->type); },
            [&](const exprs::Grad& x) { return exprs(x.fn, b->as<exprs::Grad>()->fn); },
            [&](const exprs::RefNew& x) { return exprs(x.init, b->as<exprs::RefNew>()->init); },
            [&](const exprs::RefRead& x) { return exprs(x.ref, b->as<exprs::RefRead>()->ref); },
            [&](const exprs::RefWrite& x) {
              auto* y = b->as<exprs::RefWrite>();
              return exprs(x.ref, y->ref) && exprs(x.value, y->value);
            },
            [&](const exprs::Function& x) {
              auto* y = b->as<exprs::Function>();
              return params_then(x.params, y->params, [&] {
                return types(x.ret, y->ret) && exprs(x.body, y->body);
              });
            },
        },
        a->v);
  }

  // Parameters bind simultaneously; the continuation runs with them in scope.
  template <class K>
  bool params_then(const std::vector<Param>& xs, const std::vector<Param>& ys, K&& k) {
    if (xs.size() != ys.size()) return false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (strict_ && xs[i].name != ys[i].name) return false;
      if (!types(xs[i].type, ys[i].type)) return false;
    }
    for (std::size_t i = 0; i < xs.size(); ++i) term_scope_.emplace_back(xs[i].name, ys[i].name);
    bool ok = k();
    term_scope_.resize(term_scope_.size() - xs.size());
    return ok;
  }

 private:
  using Scope = std::vector<std::pair<std::string, std::string>>;

  static bool same(const Scope& scope, const std::string& a, const std::string& b) {
    std::ptrdiff_t ia = -1, ib = -1;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(scope.size()) - 1; i >= 0; --i) {
      if (ia < 0 && scope[i].first == a) ia = i;
      if (ib < 0 && scope[i].second == b) ib = i;
    }
    if (ia < 0 && ib < 0) return a == b;
    return ia == ib;
  }

  template <class T, class F>
  static bool list(const std::vector<T>& xs, const std::vector<T>& ys, F&& eq) {
    if (xs.size() != ys.size()) return false;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (!eq(xs[i], ys[i])) return false;
    return true;
  }

  bool expr_list(const std::vector<Expr>& xs, const std::vector<Expr>& ys) {
    return list(xs, ys, [&](auto& p, auto& q) { return exprs(p, q); });
  }

  bool strict_;
  Scope type_scope_;
  Scope term_scope_;
};

bool programs_equal(const Program& a, const Program& b, bool strict) {
  if (a.items().size() != b.items().size()) return false;
  for (std::size_t i = 0; i < a.items().size(); ++i) {
    const auto& x = a.items()[i];
    const auto& y = b.items()[i];
    if (x.index() != y.index() || item_name(x) != item_name(y)) return false;
    Equivalence eq(strict);
    if (auto* op = std::get_if<OperatorDecl>(&x)) {
      if (!eq.types(op->type, std::get<OperatorDecl>(y).type)) return false;
      continue;
    }
    const auto& dx = std::get<Definition>(x);
    const auto& dy = std::get<Definition>(y);
    bool ok = eq.params_then(dx.params, dy.params,
                             [&] { return eq.types(dx.ret, dy.ret) && eq.exprs(dx.body, dy.body); });
    if (!ok) return false;
  }
  return true;
}

}  // namespace

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  free_vars_impl(e, bound, out);
  return out;
}

std::set<std::string> free_type_vars(const Type& t) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  ftv_impl(t, bound, out);
  return out;
}

Type subst_type(const Type& t, const std::string& var, const Type& replacement) {
  return std::visit(
      overloaded{
          [&](const types::Var& v) -> Type { return v.name == var ? replacement : t; },
          [&](const types::Tensor& x) -> Type {
            return tensor_type(subst_type(x.base, var, replacement), subst_type(x.shape, var, replacement),
                               t->span);
          },
          [&](const types::Arrow& x) -> Type {
            return arrow_type(subst_type(x.domain, var, replacement),
                              subst_type(x.codomain, var, replacement), t->span);
          },
          [&](const types::Forall& x) -> Type {
            if (x.var == var) return t;
            auto repl_free = free_type_vars(replacement);
            if (!repl_free.count(x.var)) {
              return forall_type(x.var, x.kind, subst_type(x.body, var, replacement), t->span);
            }
            // Rename the binder away from the replacement's free variables.
            auto body_free = free_type_vars(x.body);
            std::string fresh = x.var;
            for (int i = 1; repl_free.count(fresh) || body_free.count(fresh) || fresh == var; ++i)
              fresh = x.var + std::to_string(i);
            auto renamed = subst_type(x.body, x.var, type_var(fresh));
            return forall_type(fresh, x.kind, subst_type(renamed, var, replacement), t->span);
          },
          [&](const types::Ref& x) -> Type {
            return ref_type(subst_type(x.inner, var, replacement), t->span);
          },
          [&](const types::Product& x) -> Type {
            std::vector<Type> elems;
            elems.reserve(x.elements.size());
            for (auto& e : x.elements) elems.push_back(subst_type(e, var, replacement));
            return product_type(std::move(elems), t->span);
          },
          [&](const auto&) -> Type { return t; },
      },
      t->v);
}

bool alpha_equal(const Type& a, const Type& b) { return Equivalence(false).types(a, b); }
bool alpha_equal(const Expr& a, const Expr& b) { return Equivalence(false).exprs(a, b); }
bool alpha_equal(const Program& a, const Program& b) { return programs_equal(a, b, false); }

bool structurally_equal(const Type& a, const Type& b) { return Equivalence(true).types(a, b); }
bool structurally_equal(const Expr& a, const Expr& b) { return Equivalence(true).exprs(a, b); }
bool structurally_equal(const Program& a, const Program& b) { return programs_equal(a, b, true); }

void collect_names(const Expr& e, std::set<std::string>& out) {
  std::visit(overloaded{
                 [&](const exprs::LocalVar& v) { out.insert(v.name); },
                 [&](const exprs::GlobalVar& v) { out.insert(v.name); },
                 [&](const exprs::Let& l) {
                   out.insert(l.binder);
                   collect_type_names(l.annotation, out);
                 },
                 [&](const exprs::Function& f) {
                   for (auto& p : f.params) {
                     out.insert(p.name);
                     collect_type_names(p.type, out);
                   }
                 },
                 [&](const exprs::Cast& c) { collect_type_names(c.target, out); },
                 [&](const exprs::Zero& z) { collect_type_names(z.type, out); },
                 [](const auto&) {},
             },
             e->v);
  for_each_child(*e, [&](const Expr& c) { collect_names(c, out); });
}

std::set<std::string> all_names(const Program& p) {
  std::set<std::string> out;
  for (const auto& item : p.items()) {
    out.insert(item_name(item));
    if (auto* op = std::get_if<OperatorDecl>(&item)) {
      collect_type_names(op->type, out);
      continue;
    }
    const auto& d = std::get<Definition>(item);
    for (auto& param : d.params) {
      out.insert(param.name);
      collect_type_names(param.type, out);
    }
    collect_type_names(d.ret, out);
    collect_names(d.body, out);
  }
  return out;
}

std::vector<Expr> children(const Expr& e) {
  std::vector<Expr> out;
  for_each_child(*e, [&](const Expr& c) { out.push_back(c); });
  return out;
}

Expr map_children(const Expr& e, const std::function<Expr(const Expr&)>& f,
                  const std::function<Type(const Type&)>& g) {
  auto ty = [&](const Type& t) { return t && g ? g(t) : t; };
  auto many = [&](const std::vector<Expr>& xs) {
    std::vector<Expr> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(f(x));
    return out;
  };
  ExprNode::Variant v = std::visit(
      overloaded{
          [&](const exprs::Call& c) -> ExprNode::Variant {
            // Evaluate the callee first so traversal order matches evaluation order.
            auto callee = f(c.callee);
            return exprs::Call{callee, many(c.args)};
          },
          [&](const exprs::Let& l) -> ExprNode::Variant {
            auto value = f(l.value);
            return exprs::Let{l.binder, ty(l.annotation), value, f(l.body)};
          },
          [&](const exprs::Cast& c) -> ExprNode::Variant { return exprs::Cast{ty(c.target), f(c.inner)}; },
          [&](const exprs::BinOp& b) -> ExprNode::Variant {
            auto lhs = f(b.lhs);
            return exprs::BinOp{b.op, lhs, f(b.rhs)};
          },
          [&](const exprs::UnaryOp& u) -> ExprNode::Variant { return exprs::UnaryOp{u.op, f(u.operand)}; },
          [&](const exprs::Tuple& t) -> ExprNode::Variant { return exprs::Tuple{many(t.elements)}; },
          [&](const exprs::Projection& p) -> ExprNode::Variant { return exprs::Projection{f(p.tuple), p.index}; },
          [&](const exprs::TensorLit& t) -> ExprNode::Variant { return exprs::TensorLit{many(t.elements)}; },
          [&](const exprs::If& i) -> ExprNode::Variant {
            auto c = f(i.cond);
            auto t = f(i.then_branch);
            return exprs::If{c, t, f(i.else_branch)};
          },
          [&](const exprs::Zero& z) -> ExprNode::Variant { return exprs::Zero{ty(z.type)}; },
          [&](const exprs::Grad& gr) -> ExprNode::Variant { return exprs::Grad{f(gr.fn)}; },
          [&](const exprs::RefNew& r) -> ExprNode::Variant { return exprs::RefNew{f(r.init)}; },
          [&](const exprs::RefRead& r) -> ExprNode::Variant { return exprs::RefRead{f(r.ref)}; },
          [&](const exprs::RefWrite& r) -> ExprNode::Variant {
            auto ref = f(r.ref);
            return exprs::RefWrite{ref, f(r.value)};
          },
          [&](const exprs::Function& fn) -> ExprNode::Variant {
            std::vector<Param> params;
            for (const auto& p : fn.params) params.push_back({p.name, ty(p.type)});
            return exprs::Function{std::move(params), ty(fn.ret), f(fn.body)};
          },
          [&](const auto& leaf) -> ExprNode::Variant { return leaf; },
      },
      e->v);
  return ir::make(std::move(v), e->span);
}

std::set<std::string> referenced_globals(const Expr& e) {
  std::set<std::string> out;
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    if (auto* g = x->as<exprs::GlobalVar>()) out.insert(g->name);
    for_each_child(*x, walk);
  };
  walk(e);
  return out;
}

bool contains_grad(const Expr& e) {
  return any_node(e, [](const ExprNode& n) { return n.is<exprs::Grad>(); });
}

bool contains_ref_forms(const Expr& e) {
  return any_node(e, [](const ExprNode& n) {
    return n.is<exprs::RefNew>() || n.is<exprs::RefRead>() || n.is<exprs::RefWrite>();
  });
}

bool contains_ref_forms(const Program& p) {
  for (const auto& item : p.items())
    if (auto* d = std::get_if<Definition>(&item); d && contains_ref_forms(d->body)) return true;
  return false;
}

}  // namespace gradir
