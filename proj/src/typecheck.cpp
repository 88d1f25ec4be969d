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

#include "gradir/typecheck.hpp"

#include <cmath>
#include <limits>

#include "gradir/autodiff.hpp"
#include "gradir/pretty.hpp"
#include "gradir/registry.hpp"

namespace gradir {

TypeError::TypeError(std::string rule, std::string message, Span span)
    : std::runtime_error(rule + ": " + message),
      rule_(std::move(rule)),
      message_(std::move(message)),
      span_(span) {}

namespace {
std::string failure_summary(const std::vector<TypeError>& errors) {
  if (errors.empty()) return "type checking failed";
  std::string s = errors.front().what();
  if (errors.size() > 1) s += " (and " + std::to_string(errors.size() - 1) + " more)";
  return s;
}
}  // namespace

TypeFailure::TypeFailure(std::vector<TypeError> errors)
    : std::runtime_error(failure_summary(errors)), errors_(std::move(errors)) {}

const Kind* TypeEnv::find_kind(std::string_view name) const {
  for (auto it = delta.rbegin(); it != delta.rend(); ++it)
    if (it->first == name) return &it->second;
  return nullptr;
}

const Type* TypeEnv::find_local(std::string_view name) const {
  for (auto it = gamma.rbegin(); it != gamma.rend(); ++it)
    if (it->first == name) return &it->second;
  return nullptr;
}

const Type* TypeEnv::find_global(std::string_view name) const {
  auto it = globals.find(name);
  return it == globals.end() ? nullptr : &it->second;
}

const Type& TypedProgram::type_of(const Expr& e) const {
  auto it = types.find(e.get());
  if (it == types.end()) throw std::out_of_range("expression was not typechecked");
  return it->second;
}

// ---------------------------------------------------------------------------
// Kinding
// ---------------------------------------------------------------------------

namespace {

struct DeltaScope {
  TypeEnv& env;
  std::size_t mark;
  explicit DeltaScope(TypeEnv& e) : env(e), mark(e.delta.size()) {}
  ~DeltaScope() { env.delta.resize(mark); }
};

struct GammaScope {
  TypeEnv& env;
  std::size_t mark;
  explicit GammaScope(TypeEnv& e) : env(e), mark(e.gamma.size()) {}
  ~GammaScope() { env.gamma.resize(mark); }
};

std::string kind_text(Kind k) { return std::string(to_string(k)); }

Kind kind_in(TypeEnv& env, const Type& t) {
  return std::visit(
      overloaded{
          [&](const types::Base& b) {
            if (!b.base.width_supported())
              throw TypeError("BaseType-T", "unsupported width " + std::to_string(b.base.width) + " for " +
                                                pretty(b.base),
                              t->span);
            return Kind::BaseType;
          },
          [&](const types::ShapeLit& s) {
            for (auto d : s.dims)
              if (d < 1) throw TypeError("Shape-T", "shape dimensions must be at least 1", t->span);
            return Kind::Shape;
          },
          [&](const types::Tensor& x) {
            Kind kb = kind_in(env, x.base);
            if (kb != Kind::BaseType)
              throw TypeError("Tensor-T", "tensor base " + pretty(x.base) + " has kind " + kind_text(kb) +
                                              ", expected BaseType",
                              t->span);
            Kind ks = kind_in(env, x.shape);
            if (ks != Kind::Shape)
              throw TypeError("Tensor-T", "tensor shape " + pretty(x.shape) + " has kind " + kind_text(ks) +
                                              ", expected Shape",
                              t->span);
            return Kind::Type;
          },
          [&](const types::Arrow& a) {
            for (const auto& part : {a.domain, a.codomain}) {
              Kind k = kind_in(env, part);
              if (k != Kind::Type)
                throw TypeError("Arrow-T", pretty(part) + " has kind " + kind_text(k) + ", expected Type", t->span);
            }
            return Kind::Type;
          },
          [&](const types::Var& v) {
            const Kind* k = env.find_kind(v.name);
            if (!k) throw TypeError("Quantifier-T", "unbound type variable " + v.name, t->span);
            return *k;
          },
          [&](const types::Forall& f) {
            DeltaScope scope(env);
            env.delta.emplace_back(f.var, f.kind);
            Kind k = kind_in(env, f.body);
            if (k != Kind::Type)
              throw TypeError("Quantifier-T", "quantified body has kind " + kind_text(k) + ", expected Type",
                              t->span);
            return Kind::Type;
          },
          [&](const types::Ref& r) {
            Kind k = kind_in(env, r.inner);
            if (k != Kind::Type)
              throw TypeError("Ref-T", "reference to " + pretty(r.inner) + " of kind " + kind_text(k), t->span);
            return Kind::Type;
          },
          [&](const types::Product& p) {
            for (const auto& e : p.elements) {
              Kind k = kind_in(env, e);
              if (k != Kind::Type)
                throw TypeError("Product-T", pretty(e) + " has kind " + kind_text(k) + ", expected Type", t->span);
            }
            return Kind::Type;
          },
      },
      t->v);
}

// ---------------------------------------------------------------------------
// Matching for instantiation
// ---------------------------------------------------------------------------

struct Matcher {
  const std::set<std::string>& vars;
  std::map<std::string, Type>& solution;
  std::string rule;
  Span span;

  [[noreturn]] void clash(const Type& p, const Type& a) const {
    throw TypeError(rule, "cannot match " + pretty(p) + " with " + pretty(a), span);
  }

  void match(const Type& p, const Type& a) {
    if (auto* v = p->as<types::Var>(); v && vars.count(v->name)) {
      auto it = solution.find(v->name);
      if (it == solution.end()) {
        solution.emplace(v->name, a);
      } else if (!alpha_equal(it->second, a)) {
        throw TypeError(rule,
                        "type variable " + v->name + " bound to both " + pretty(it->second) + " and " + pretty(a),
                        span);
      }
      return;
    }
    if (p->v.index() != a->v.index()) clash(p, a);
    std::visit(overloaded{
                   [&](const types::Base& b) {
                     if (!(b.base == a->as<types::Base>()->base)) clash(p, a);
                   },
                   [&](const types::ShapeLit& s) {
                     if (s.dims != a->as<types::ShapeLit>()->dims) clash(p, a);
                   },
                   [&](const types::Tensor& x) {
                     auto* y = a->as<types::Tensor>();
                     match(x.base, y->base);
                     match(x.shape, y->shape);
                   },
                   [&](const types::Arrow& x) {
                     auto* y = a->as<types::Arrow>();
                     match(x.domain, y->domain);
                     match(x.codomain, y->codomain);
                   },
                   [&](const types::Var& x) {
                     if (x.name != a->as<types::Var>()->name) clash(p, a);
                   },
                   [&](const types::Forall&) {
                     for (const auto& fv : free_type_vars(p))
                       if (vars.count(fv)) clash(p, a);
                     if (!alpha_equal(p, a)) clash(p, a);
                   },
                   [&](const types::Ref& x) { match(x.inner, a->as<types::Ref>()->inner); },
                   [&](const types::Product& x) {
                     auto* y = a->as<types::Product>();
                     if (x.elements.size() != y->elements.size()) clash(p, a);
                     for (std::size_t i = 0; i < x.elements.size(); ++i) match(x.elements[i], y->elements[i]);
                   },
               },
               p->v);
  }
};

struct Quantified {
  std::vector<std::pair<std::string, Kind>> binders;
  Type body;
};

Quantified peel(const Type& t) {
  Quantified q;
  q.body = t;
  while (auto* f = q.body->as<types::Forall>()) {
    q.binders.emplace_back(f->var, f->kind);
    q.body = f->body;
  }
  return q;
}

}  // namespace

Kind kind_of(const TypeEnv& env, const Type& t) {
  TypeEnv scratch;
  scratch.delta = env.delta;
  return kind_in(scratch, t);
}

Instantiation instantiate(const TypeEnv& env, const Type& poly, const std::vector<Type>& arg_types) {
  Quantified q = peel(poly);
  auto* arrow = q.body->as<types::Arrow>();
  if (!arrow) throw TypeError("Instantiate", "polymorphic type " + pretty(poly) + " is not a function type", poly->span);
  auto domain = domain_components(*arrow);
  if (domain.size() != arg_types.size())
    throw TypeError("Type-Call",
                    "expected " + std::to_string(domain.size()) + " arguments, got " + std::to_string(arg_types.size()),
                    poly->span);
  std::set<std::string> vars;
  for (const auto& [name, kind] : q.binders) vars.insert(name);
  Instantiation inst;
  Matcher m{vars, inst.substitution, "Instantiate", poly->span};
  for (std::size_t i = 0; i < domain.size(); ++i) m.match(domain[i], arg_types[i]);
  Type result = q.body;
  for (const auto& [name, kind] : q.binders) {
    auto it = inst.substitution.find(name);
    if (it == inst.substitution.end())
      throw TypeError("Instantiate", "type variable " + name + " is not determined by the arguments", poly->span);
    Kind actual = kind_of(env, it->second);
    if (actual != kind)
      throw TypeError("Instantiate",
                      "type variable " + name + " of kind " + kind_text(kind) + " bound to " + pretty(it->second) +
                          " of kind " + kind_text(actual),
                      poly->span);
  }
  for (const auto& [name, t] : inst.substitution) result = subst_type(result, name, t);
  inst.arrow = result;
  return inst;
}

// ---------------------------------------------------------------------------
// Typing
// ---------------------------------------------------------------------------

namespace {

class Checker {
 public:
  Checker(TypeEnv& env, TypeTable* table) : env_(env), table_(table) {}

  Type check(const Expr& e) { return record(e, std::visit([&](const auto& n) { return rule(e, n); }, e->v)); }

  void require_type_kind(const Type& t, const char* rule, const std::string& what, Span span) {
    Kind k = kind_in(env_, t);
    if (k != Kind::Type)
      throw TypeError(rule, what + " " + pretty(t) + " has kind " + kind_text(k) + ", expected Type", span);
  }

  Type function(const std::vector<Param>& params, const Type& ret, const Expr& body, Span span) {
    std::vector<Type> domain;
    for (const auto& p : params) {
      require_type_kind(p.type, "Type-Function-Definition", "parameter " + p.name + " type", span);
      domain.push_back(p.type);
    }
    require_type_kind(ret, "Type-Function-Definition", "return type", span);
    GammaScope scope(env_);
    for (const auto& p : params) env_.gamma.emplace_back(p.name, p.type);
    Type bt = check(body);
    if (!alpha_equal(bt, ret))
      throw TypeError("Type-Function-Definition", "body has type " + pretty(bt) + " but return type is " + pretty(ret),
                      span);
    return function_type(std::move(domain), ret);
  }

 private:
  Type record(const Expr& e, Type t) {
    if (table_) (*table_)[e.get()] = t;
    return t;
  }

  static Type scalar(BaseType b) { return tensor_type(b, {}); }

  Type rule(const Expr& e, const exprs::LocalVar& n) {
    if (const Type* t = env_.find_local(n.name)) return *t;
    throw TypeError("Scope", "unbound variable " + n.name, e->span);
  }

  Type rule(const Expr& e, const exprs::GlobalVar& n) {
    const Type* t = env_.find_global(n.name);
    if (!t) throw TypeError("Scope", "unknown global @" + n.name, e->span);
    if ((*t)->is<types::Forall>())
      throw TypeError("Instantiate", "polymorphic operator @" + n.name + " must be called directly", e->span);
    return *t;
  }

  Type rule(const Expr& e, const exprs::IntLit& n) {
    if (n.value < std::numeric_limits<std::int32_t>::min() || n.value > std::numeric_limits<std::int32_t>::max())
      throw TypeError("Type-Int-Literal", "literal " + std::to_string(n.value) + " does not fit IntType(32)", e->span);
    return scalar(BaseType::Int(32));
  }

  Type rule(const Expr& e, const exprs::FloatLit& n) {
    if (!std::isfinite(n.value)) throw TypeError("Type-Float-Literal", "literal is not finite", e->span);
    if (n.width != 32 && n.width != 64)
      throw TypeError("Type-Float-Literal", "unsupported literal width " + std::to_string(n.width), e->span);
    if (n.width == 32 && std::fabs(n.value) > std::numeric_limits<float>::max())
      throw TypeError("Type-Float-Literal", "literal overflows FloatType(32)", e->span);
    return scalar(BaseType::Float(n.width));
  }

  Type rule(const Expr&, const exprs::BoolLit&) { return scalar(BaseType::Bool()); }

  Type rule(const Expr& e, const exprs::Call& n) {
    std::vector<Type> args;
    args.reserve(n.args.size());
    if (auto* g = n.callee->as<exprs::GlobalVar>()) {
      const Type* gt = env_.find_global(g->name);
      if (!gt) throw TypeError("Scope", "unknown global @" + g->name, n.callee->span);
      if ((*gt)->is<types::Forall>()) {
        for (const auto& a : n.args) args.push_back(check(a));
        Instantiation inst = instantiate(env_, *gt, args);
        record(n.callee, inst.arrow);
        return inst.arrow->as<types::Arrow>()->codomain;
      }
    }
    Type ct = check(n.callee);
    for (const auto& a : n.args) args.push_back(check(a));
    auto* arrow = ct->as<types::Arrow>();
    if (!arrow) throw TypeError("Type-Call", "callee of type " + pretty(ct) + " is not a function", e->span);
    auto domain = domain_components(*arrow);
    if (domain.size() != args.size())
      throw TypeError("Type-Call",
                      "expected " + std::to_string(domain.size()) + " arguments, got " + std::to_string(args.size()),
                      e->span);
    for (std::size_t i = 0; i < args.size(); ++i)
      if (!alpha_equal(domain[i], args[i]))
        throw TypeError("Type-Call",
                        "argument " + std::to_string(i) + " has type " + pretty(args[i]) + ", expected " +
                            pretty(domain[i]),
                        n.args[i]->span);
    return arrow->codomain;
  }

  Type rule(const Expr& e, const exprs::Let& n) {
    Type vt = check(n.value);
    if (n.annotation) {
      require_type_kind(n.annotation, "Type-Let", "annotation", e->span);
      if (!alpha_equal(vt, n.annotation))
        throw TypeError("Type-Let",
                        "bound value has type " + pretty(vt) + " but " + n.binder + " is annotated " +
                            pretty(n.annotation),
                        e->span);
    }
    GammaScope scope(env_);
    env_.gamma.emplace_back(n.binder, n.annotation ? n.annotation : vt);
    return check(n.body);
  }

  Type rule(const Expr& e, const exprs::Cast& n) {
    require_type_kind(n.target, "Cast-Ascription", "cast target", e->span);
    Type it = check(n.inner);
    if (!alpha_equal(it, n.target))
      throw TypeError("Cast-Ascription",
                      "expression has type " + pretty(it) + ", cannot ascribe " + pretty(n.target) +
                          " (casts do not convert)",
                      e->span);
    return n.target;
  }

  Type rule(const Expr& e, const exprs::BinOp& n) {
    const char* r = is_comparison(n.op) ? "Type-Comp-BinaryOp" : "Type-Noncomp-BinaryOp";
    Type lt = check(n.lhs);
    Type rt = check(n.rhs);
    auto li = tensor_info(lt);
    if (!li) throw TypeError(r, "operand of " + std::string(to_string(n.op)) + " has non-tensor type " + pretty(lt), e->span);
    if (!alpha_equal(lt, rt))
      throw TypeError(r,
                      "operands of " + std::string(to_string(n.op)) + " have types " + pretty(lt) + " and " +
                          pretty(rt),
                      e->span);
    if (is_comparison(n.op)) return tensor_type(BaseType::Bool(), li->dims);
    return lt;
  }

  Type rule(const Expr& e, const exprs::UnaryOp& n) {
    Type t = check(n.operand);
    if (!tensor_info(t))
      throw TypeError("Type-UnaryOp", "operand of " + std::string(to_string(n.op)) + " has non-tensor type " + pretty(t),
                      e->span);
    return t;
  }

  Type rule(const Expr&, const exprs::Tuple& n) {
    std::vector<Type> ts;
    for (const auto& el : n.elements) ts.push_back(check(el));
    return product_type(std::move(ts));
  }

  Type rule(const Expr& e, const exprs::Projection& n) {
    Type t = check(n.tuple);
    auto* p = t->as<types::Product>();
    if (!p) throw TypeError("Type-Projection", "projection from non-tuple type " + pretty(t), e->span);
    if (n.index >= p->elements.size())
      throw TypeError("Type-Projection",
                      "index " + std::to_string(n.index) + " out of range for " + pretty(t), e->span);
    return p->elements[n.index];
  }

  Type rule(const Expr& e, const exprs::TensorLit& n) {
    if (n.elements.empty()) throw TypeError("Type-Tensor-Literal", "tensor literal has no elements", e->span);
    Type first;
    for (const auto& el : n.elements) {
      Type t = check(el);
      if (!tensor_info(t))
        throw TypeError("Type-Tensor-Literal", "element has non-tensor type " + pretty(t), el->span);
      if (!first) {
        first = t;
      } else if (!alpha_equal(first, t)) {
        throw TypeError("Type-Tensor-Literal", "elements have types " + pretty(first) + " and " + pretty(t), el->span);
      }
    }
    auto info = *tensor_info(first);
    std::vector<std::int64_t> dims{static_cast<std::int64_t>(n.elements.size())};
    dims.insert(dims.end(), info.dims.begin(), info.dims.end());
    return tensor_type(info.base, std::move(dims));
  }

  Type rule(const Expr& e, const exprs::If& n) {
    Type ct = check(n.cond);
    if (!alpha_equal(ct, scalar(BaseType::Bool())))
      throw TypeError("Type-If", "condition has type " + pretty(ct) + ", expected a scalar BoolType tensor", e->span);
    Type tt = check(n.then_branch);
    Type et = check(n.else_branch);
    if (!alpha_equal(tt, et))
      throw TypeError("Type-If", "branches have types " + pretty(tt) + " and " + pretty(et), e->span);
    return tt;
  }

  Type rule(const Expr& e, const exprs::Zero& n) {
    require_type_kind(n.type, "Type-Zero", "argument", e->span);
    if (!tensor_info(n.type)) throw TypeError("Type-Zero", "Zero needs a tensor type, got " + pretty(n.type), e->span);
    return n.type;
  }

  Type rule(const Expr& e, const exprs::Grad& n) {
    if (auto* g = n.fn->as<exprs::GlobalVar>()) {
      if (env_.operator_names.count(g->name))
        throw TypeError("Type-Gradient", "Grad of operator @" + g->name + "; wrap it in a def", e->span);
    } else if (!n.fn->is<exprs::Function>()) {
      throw TypeError("Type-Gradient", "Grad expects a global function or a function literal", e->span);
    }
    Type ft = check(n.fn);
    try {
      assert_closed(n.fn);
      return gradient_type(ft);
    } catch (const AdError& err) {
      throw TypeError("Type-Gradient", err.what(), e->span);
    }
  }

  Type rule(const Expr&, const exprs::RefNew& n) { return ref_type(check(n.init)); }

  Type rule(const Expr& e, const exprs::RefRead& n) {
    Type t = check(n.ref);
    auto* r = t->as<types::Ref>();
    if (!r) throw TypeError("Type-Val-Ref", "dereference of non-reference type " + pretty(t), e->span);
    return r->inner;
  }

  Type rule(const Expr& e, const exprs::RefWrite& n) {
    Type t = check(n.ref);
    auto* r = t->as<types::Ref>();
    if (!r) throw TypeError("Type-Set-Ref", "assignment to non-reference type " + pretty(t), e->span);
    Type vt = check(n.value);
    if (!alpha_equal(r->inner, vt))
      throw TypeError("Type-Set-Ref", "assigning " + pretty(vt) + " to " + pretty(t), e->span);
    return unit_type();
  }

  Type rule(const Expr& e, const exprs::Function& n) { return function(n.params, n.ret, n.body, e->span); }

  TypeEnv& env_;
  TypeTable* table_;
};

/*! Declared operator types must be instances of the registered type. */
void check_declaration(TypeEnv& env, const OperatorDecl& d, const OperatorImpl& impl) {
  Quantified reg = peel(impl.type);
  Quantified decl = peel(d.type);
  DeltaScope scope(env);
  for (const auto& b : decl.binders) env.delta.push_back(b);
  std::set<std::string> vars;
  for (const auto& [name, kind] : reg.binders) vars.insert(name);
  std::map<std::string, Type> solution;
  Matcher m{vars, solution, "Operator-Declaration", d.span};
  try {
    m.match(reg.body, decl.body);
  } catch (const TypeError&) {
    throw TypeError("Operator-Declaration",
                    "declared type of @" + d.name + " is not an instance of its registered type " + pretty(impl.type),
                    d.span);
  }
  for (const auto& [name, kind] : reg.binders) {
    auto it = solution.find(name);
    if (it != solution.end() && kind_in(env, it->second) != kind)
      throw TypeError("Operator-Declaration",
                      "declared type of @" + d.name + " instantiates " + name + " at the wrong kind", d.span);
  }
}

}  // namespace

Type type_of(TypeEnv& env, const Expr& e, TypeTable* table) { return Checker(env, table).check(e); }

TypedProgram check_program(const Program& p, const Registry& registry) {
  TypedProgram tp;
  tp.program = p;
  tp.registry = &registry;
  std::vector<TypeError> errors;
  TypeEnv env;
  for (const auto& [name, impl] : registry.operators()) {
    env.globals[name] = impl.type;
    env.operator_names.insert(name);
  }
  for (const auto& item : p.items()) {
    if (auto* d = std::get_if<OperatorDecl>(&item)) {
      try {
        Kind k = kind_in(env, d->type);
        if (k != Kind::Type)
          throw TypeError("Operator-Declaration", "type of @" + d->name + " has kind " + kind_text(k), d->span);
        if (const OperatorImpl* impl = registry.find(d->name)) check_declaration(env, *d, *impl);
      } catch (const TypeError& err) {
        errors.push_back(err);
      }
      env.globals[d->name] = d->type;
      env.operator_names.insert(d->name);
    } else {
      const auto& def = std::get<Definition>(item);
      if (registry.contains(def.name))
        errors.emplace_back("Operator-Declaration", "def @" + def.name + " reuses the name of a registered operator",
                            def.span);
      env.globals[def.name] = def.type();
      env.operator_names.erase(def.name);
    }
  }
  for (const auto& item : p.items()) {
    auto* def = std::get_if<Definition>(&item);
    if (!def) continue;
    try {
      Checker(env, &tp.types).function(def->params, def->ret, def->body, def->span);
    } catch (const TypeError& err) {
      errors.push_back(err);
    }
  }
  if (!errors.empty()) throw TypeFailure(std::move(errors));
  tp.globals = env.globals;
  return tp;
}

}  // namespace gradir
