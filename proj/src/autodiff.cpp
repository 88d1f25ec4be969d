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

#include "gradir/autodiff.hpp"

#include <functional>

#include "gradir/pretty.hpp"

namespace gradir {

std::string NameSupply::fresh(std::string_view hint) {
  std::string name(hint);
  for (int i = 1; taken_.count(name); ++i) name = std::string(hint) + "_" + std::to_string(i);
  taken_.insert(name);
  return name;
}

Type lift_type(const Type& t) {
  return std::visit(
      overloaded{
          [&](const types::Tensor&) -> Type {
            if (is_float_tensor(t)) return product_type({t, ref_type(t)});
            return t;
          },
          [&](const types::Arrow& a) -> Type { return arrow_type(lift_type(a.domain), lift_type(a.codomain)); },
          [&](const types::Product& p) -> Type {
            std::vector<Type> elems;
            for (const auto& e : p.elements) elems.push_back(lift_type(e));
            return product_type(std::move(elems));
          },
          [&](const types::Ref& r) -> Type { return ref_type(lift_type(r.inner)); },
          [&](const auto&) -> Type { throw AdError("cannot lift non-value type " + pretty(t)); },
      },
      t->v);
}

Type gradient_type(const Type& fn_type) {
  auto* arrow = fn_type->as<types::Arrow>();
  if (!arrow) throw AdError("Grad operand has type " + pretty(fn_type) + ", which is not a function type");
  auto domain = domain_components(*arrow);
  for (std::size_t i = 0; i < domain.size(); ++i)
    if (!is_float_tensor(domain[i]))
      throw AdError("Grad parameter " + std::to_string(i) + " has type " + pretty(domain[i]) +
                    "; every parameter must be a float tensor");
  auto cod = tensor_info(arrow->codomain);
  if (!cod || !cod->base.is_float())
    throw AdError("Grad result type " + pretty(arrow->codomain) + " is not a float tensor");
  if (!cod->dims.empty())
    throw AdError("Grad result type " + pretty(arrow->codomain) +
                  " is not a scalar; Jacobians of tensor-valued functions are not supported");
  return function_type(domain, product_type({arrow->codomain, product_type(domain)}));
}

void assert_closed(const Expr& e) {
  auto fv = free_vars(e);
  if (fv.empty()) return;
  std::string names;
  for (const auto& v : fv) names += (names.empty() ? "" : ", ") + v;
  throw AdError("Grad operand has free variables {" + names +
                "}; lambda-lift them into parameters of a top-level definition");
}

namespace {

using Accumulations = std::function<std::vector<Expr>(const Expr& g)>;

Expr add(Expr a, Expr b) { return ir::binop(BinaryOperator::Add, std::move(a), std::move(b)); }
Expr sub(Expr a, Expr b) { return ir::binop(BinaryOperator::Sub, std::move(a), std::move(b)); }
Expr mul(Expr a, Expr b) { return ir::binop(BinaryOperator::Mul, std::move(a), std::move(b)); }
Expr div(Expr a, Expr b) { return ir::binop(BinaryOperator::Div, std::move(a), std::move(b)); }

Expr decrement(const Expr& ref, Expr delta) { return ir::ref_write(ref, sub(ir::ref_read(ref), std::move(delta))); }

class Transformer {
 public:
  explicit Transformer(AdContext& ctx) : ctx_(ctx) {}

  Expr run(const Expr& e) {
    return std::visit([&](const auto& n) { return rule(e, n); }, e->v);
  }

  /*! Makes sure @g has a transformed twin and returns its name. */
  std::string transformed_definition(const std::string& g) {
    if (auto it = ctx_.transformed.find(g); it != ctx_.transformed.end()) return it->second;
    const Definition* def = ctx_.program->program.find_definition(g);
    if (!def) throw AdError("@" + g + " is not a definition");
    std::string name = ctx_.names.fresh(g + "__ad");
    ctx_.transformed[g] = name;
    std::string saved = ctx_.backprop;
    ctx_.backprop = ctx_.names.fresh("bp");
    std::vector<Param> params{{ctx_.backprop, backprop_type()}};
    for (const auto& p : def->params) params.push_back({p.name, lift_type(p.type)});
    Expr body = run(def->body);
    ctx_.new_definitions.push_back(Definition{name, std::move(params), lift_type(def->ret), body, def->span});
    ctx_.backprop = saved;
    return name;
  }

  static Type backprop_type() { return ref_type(function_type({}, unit_type())); }

  std::string fresh(std::string_view hint) { return ctx_.names.fresh(hint); }

  /*! `let u1 = s1 in ... let un = sn in last` */
  Expr sequence(const std::vector<Expr>& stmts, Expr last) {
    for (auto it = stmts.rbegin(); it != stmts.rend(); ++it) last = ir::let(fresh("u"), *it, last);
    return last;
  }

 private:
  const Type& type(const Expr& e) const {
    auto it = ctx_.program->types.find(e.get());
    if (it == ctx_.program->types.end()) throw AdError("expression has no recorded type: " + pretty(e));
    return it->second;
  }

  Expr bp() const { return ir::local(ctx_.backprop); }

  /*!
   * let <binds> in let v = value in let r = Ref(Zero tau) in let old = !bp in
   * bp := fn() -> () { let g = !r in <accumulations g>; r := Zero tau; old() };
   * (v, r)
   */
  Expr primitive(std::vector<std::pair<std::string, Expr>> binds, Expr value, const Type& tau,
                 const Accumulations& accumulations) {
    std::string v = fresh("v"), r = fresh("r"), old = fresh("old"), g = fresh("g");
    Expr rv = ir::local(r);
    std::vector<Expr> stmts = accumulations(ir::local(g));
    stmts.push_back(ir::ref_write(rv, ir::zero(tau)));
    Expr backprop = ir::fn({}, unit_type(),
                           ir::let(g, ir::ref_read(rv), sequence(stmts, ir::call(ir::local(old), {}))));
    Expr result = ir::let(
        v, std::move(value),
        ir::let(r, ir::ref_new(ir::zero(tau)),
                ir::let(old, ir::ref_read(bp()),
                        sequence({ir::ref_write(bp(), backprop)}, ir::tuple({ir::local(v), rv})))));
    for (auto it = binds.rbegin(); it != binds.rend(); ++it) result = ir::let(it->first, it->second, result);
    return result;
  }

  Expr rule(const Expr& e, const exprs::LocalVar&) { return e; }

  Expr rule(const Expr& e, const exprs::GlobalVar& n) {
    if (ctx_.program->program.find_definition(n.name)) {
      // A definition used as a first-class value: wrap its transformed twin so
      // it captures the current backpropagator.
      auto* arrow = type(e)->as<types::Arrow>();
      std::vector<Param> params;
      std::vector<Expr> args{bp()};
      for (const auto& t : domain_components(*arrow)) {
        auto p = fresh("p");
        params.push_back({p, lift_type(t)});
        args.push_back(ir::local(p));
      }
      return ir::fn(std::move(params), lift_type(arrow->codomain),
                    ir::call(ir::global(transformed_definition(n.name)), std::move(args)));
    }
    throw AdError("operator @" + n.name + " used as a value cannot be differentiated; call it directly");
  }

  Expr rule(const Expr& e, const exprs::IntLit&) { return e; }
  Expr rule(const Expr& e, const exprs::BoolLit&) { return e; }

  Expr rule(const Expr& e, const exprs::FloatLit&) {
    return primitive({}, e, type(e), [](const Expr&) { return std::vector<Expr>{}; });
  }

  Expr rule(const Expr& e, const exprs::Zero& n) {
    if (!is_float_tensor(n.type)) return e;
    return primitive({}, e, n.type, [](const Expr&) { return std::vector<Expr>{}; });
  }

  static bool constant_literal(const Expr& e) {
    if (e->is<exprs::FloatLit>()) return true;
    auto* t = e->as<exprs::TensorLit>();
    if (!t) return false;
    for (const auto& el : t->elements)
      if (!constant_literal(el)) return false;
    return true;
  }

  Expr rule(const Expr& e, const exprs::TensorLit&) {
    if (!is_float_tensor(type(e))) return map_children(e, [&](const Expr& c) { return run(c); });
    if (!constant_literal(e))
      throw AdError("tensor literal with computed float elements cannot be differentiated: " + pretty(e));
    return primitive({}, e, type(e), [](const Expr&) { return std::vector<Expr>{}; });
  }

  Expr rule(const Expr& e, const exprs::BinOp& n) {
    const Type& operand_type = type(n.lhs);
    if (!is_float_tensor(operand_type)) return map_children(e, [&](const Expr& c) { return run(c); });
    if (is_comparison(n.op)) return ir::binop(n.op, ir::proj(run(n.lhs), 0), ir::proj(run(n.rhs), 0));
    std::string a = fresh("a"), b = fresh("b");
    Expr x = ir::proj(ir::local(a), 0), xr = ir::proj(ir::local(a), 1);
    Expr y = ir::proj(ir::local(b), 0), yr = ir::proj(ir::local(b), 1);
    std::vector<std::pair<std::string, Expr>> binds{{a, run(n.lhs)}, {b, run(n.rhs)}};
    BinaryOperator op = n.op;
    return primitive(std::move(binds), ir::binop(op, x, y), type(e), [=](const Expr& g) {
      switch (op) {
        case BinaryOperator::Add:
          return std::vector<Expr>{accumulate(xr, g), accumulate(yr, g)};
        case BinaryOperator::Sub:
          return std::vector<Expr>{accumulate(xr, g), decrement(yr, g)};
        case BinaryOperator::Mul:
          return std::vector<Expr>{accumulate(xr, mul(g, y)), accumulate(yr, mul(g, x))};
        default:
          return std::vector<Expr>{accumulate(xr, div(g, y)), decrement(yr, div(mul(g, x), mul(y, y)))};
      }
    });
  }

  Expr rule(const Expr& e, const exprs::UnaryOp& n) {
    if (!is_float_tensor(type(e))) return map_children(e, [&](const Expr& c) { return run(c); });
    std::string a = fresh("a");
    Expr x = ir::proj(ir::local(a), 0), xr = ir::proj(ir::local(a), 1);
    UnaryOperator op = n.op;
    return primitive({{a, run(n.operand)}}, ir::unop(op, x), type(e), [=](const Expr& g) {
      if (op == UnaryOperator::Neg) return std::vector<Expr>{decrement(xr, g)};
      // d(sq x) = 2 x dx, written without a literal so it works at every shape.
      return std::vector<Expr>{accumulate(xr, add(mul(g, x), mul(g, x)))};
    });
  }

  Expr rule(const Expr& e, const exprs::Call& n) {
    if (auto* g = n.callee->as<exprs::GlobalVar>()) {
      if (ctx_.program->program.find_definition(g->name)) {
        std::vector<Expr> args{bp()};
        for (const auto& a : n.args) args.push_back(run(a));
        return ir::call(ir::global(transformed_definition(g->name)), std::move(args));
      }
      return operator_call(e, n, g->name);
    }
    return map_children(e, [&](const Expr& c) { return run(c); });
  }

  Expr operator_call(const Expr& e, const exprs::Call& n, const std::string& name) {
    std::vector<std::pair<std::string, Expr>> binds;
    AdjointInputs in;
    std::vector<Expr> values;
    for (const auto& arg : n.args) {
      const Type& t = type(arg);
      if (!tensor_info(t)) throw AdError("operator @" + name + " takes a non-tensor argument " + pretty(t));
      std::string a = fresh("a");
      binds.emplace_back(a, run(arg));
      if (is_float_tensor(t)) {
        in.args.push_back(ir::proj(ir::local(a), 0));
        in.arg_adjoints.push_back(ir::proj(ir::local(a), 1));
      } else {
        in.args.push_back(ir::local(a));
        in.arg_adjoints.push_back(nullptr);
      }
      in.arg_types.push_back(t);
    }
    Expr value = ir::make(exprs::Call{n.callee, in.args}, e->span);
    if (!is_float_tensor(type(e))) {
      for (auto it = binds.rbegin(); it != binds.rend(); ++it) value = ir::let(it->first, it->second, value);
      return value;
    }
    const OperatorImpl* impl = ctx_.registry ? ctx_.registry->find(name) : nullptr;
    if (!impl) throw AdError("operator @" + name + " is not registered, so it has no adjoint");
    if (!impl->adjoint) throw AdError("operator @" + name + " has no adjoint rule");
    AdjointRule rule_fn = *impl->adjoint;
    return primitive(std::move(binds), value, type(e), [in, rule_fn](const Expr& g) {
      AdjointInputs with_g = in;
      with_g.result_adjoint = g;
      return rule_fn(with_g);
    });
  }

  Expr rule(const Expr&, const exprs::Grad&) {
    throw AdError("nested Grad must be elaborated before its enclosing Grad");
  }

  // Let, Cast, Function, Tuple, Projection, If and the reference forms keep
  // their structure; only their type annotations are lifted.
  template <class N>
  Expr rule(const Expr& e, const N&) {
    return map_children(e, [&](const Expr& c) { return run(c); }, lift_type);
  }

  AdContext& ctx_;
};

}  // namespace

Expr transform(const Expr& e, AdContext& ctx) { return Transformer(ctx).run(e); }

Expr elaborate_grad(const Expr& fn, const Type& fn_type, AdContext& ctx) {
  if (!fn->is<exprs::GlobalVar>() && !fn->is<exprs::Function>())
    throw AdError("Grad expects a global function or a function literal");
  assert_closed(fn);
  Type result_type = gradient_type(fn_type);
  auto domain = domain_components(*fn_type->as<types::Arrow>());
  Type cod = fn_type->as<types::Arrow>()->codomain;
  unsigned width = tensor_info(cod)->base.width;

  Transformer tr(ctx);
  std::string saved = ctx.backprop;
  std::string bp = ctx.names.fresh("bp");
  ctx.backprop = bp;

  std::vector<Param> params;
  std::vector<std::string> pairs;
  for (const auto& t : domain) {
    params.push_back({ctx.names.fresh("x"), t});
    pairs.push_back(ctx.names.fresh("a"));
  }
  std::string res = ctx.names.fresh("res");

  Expr callee;
  std::string fn_name;
  if (auto* g = fn->as<exprs::GlobalVar>()) {
    callee = ir::global(tr.transformed_definition(g->name));
  } else {
    fn_name = ctx.names.fresh("f");
    callee = ir::local(fn_name);
  }
  std::vector<Expr> args;
  if (!fn_name.empty()) {
    for (const auto& a : pairs) args.push_back(ir::local(a));
  } else {
    args.push_back(ir::local(bp));
    for (const auto& a : pairs) args.push_back(ir::local(a));
  }

  // Read each argument adjoint, clear it, and return (value, gradients).
  std::vector<std::string> grads;
  for (std::size_t i = 0; i < domain.size(); ++i) grads.push_back(ctx.names.fresh("d"));
  std::vector<Expr> grad_vars;
  for (const auto& d : grads) grad_vars.push_back(ir::local(d));
  Expr tail = ir::tuple({ir::proj(ir::local(res), 0), ir::tuple(grad_vars)});
  for (std::size_t i = domain.size(); i-- > 0;) {
    Expr adj = ir::proj(ir::local(pairs[i]), 1);
    tail = ir::let(grads[i], ir::ref_read(adj), tr.sequence({ir::ref_write(adj, ir::zero(domain[i]))}, tail));
  }
  tail = tr.sequence({ir::ref_write(ir::proj(ir::local(res), 1), ir::float_lit(1.0, width)),
                      ir::call(ir::ref_read(ir::local(bp)), {})},
                     tail);
  Expr body = ir::let(res, ir::call(callee, std::move(args)), tail);
  if (!fn_name.empty()) body = ir::let(fn_name, transform(fn, ctx), body);
  for (std::size_t i = domain.size(); i-- > 0;)
    body = ir::let(pairs[i], ir::tuple({ir::local(params[i].name), ir::ref_new(ir::zero(domain[i]))}), body);
  body = ir::let(bp, ir::ref_new(ir::fn({}, unit_type(), ir::unit())), body);

  ctx.backprop = saved;
  return ir::fn(std::move(params), result_type->as<types::Arrow>()->codomain, body);
}

namespace {

Expr replace_node(const Expr& e, const ExprNode* target, const Expr& with) {
  if (e.get() == target) return with;
  return map_children(e, [&](const Expr& c) { return replace_node(c, target, with); });
}

const ExprNode* first_grad(const Expr& e, const std::function<bool(const exprs::Grad&)>& ready) {
  if (auto* g = e->as<exprs::Grad>(); g && ready(*g)) return e.get();
  for (const auto& c : children(e))
    if (auto* found = first_grad(c, ready)) return found;
  return nullptr;
}

/*! Definitions reachable from \p e through global references. */
std::set<std::string> reachable_definitions(const Program& p, const Expr& e) {
  std::set<std::string> seen;
  std::vector<std::string> work;
  for (const auto& g : referenced_globals(e)) work.push_back(g);
  while (!work.empty()) {
    auto name = work.back();
    work.pop_back();
    const Definition* d = p.find_definition(name);
    if (!d || !seen.insert(name).second) continue;
    for (const auto& g : referenced_globals(d->body)) work.push_back(g);
  }
  return seen;
}

}  // namespace

TypedProgram elaborate_program(const TypedProgram& p) {
  TypedProgram cur = p;
  std::map<std::string, std::string> memo;
  for (;;) {
    std::set<std::string> with_grad;
    for (const auto& item : cur.program.items())
      if (auto* d = std::get_if<Definition>(&item); d && contains_grad(d->body)) with_grad.insert(d->name);
    if (with_grad.empty()) return cur;

    auto ready = [&](const exprs::Grad& g) {
      if (contains_grad(g.fn)) return false;
      for (const auto& d : reachable_definitions(cur.program, g.fn))
        if (with_grad.count(d)) return false;
      return true;
    };
    const Definition* host = nullptr;
    const ExprNode* node = nullptr;
    for (const auto& name : with_grad) {
      const Definition* d = cur.program.find_definition(name);
      if ((node = first_grad(d->body, ready))) {
        host = d;
        break;
      }
    }
    if (!node) {
      std::string names;
      for (const auto& n : with_grad) names += (names.empty() ? "@" : ", @") + n;
      throw AdError("Grad operands depend on each other cyclically through " + names);
    }

    const Expr* operand = nullptr;
    std::function<void(const Expr&)> locate = [&](const Expr& e) {
      if (e.get() == node) operand = &e->as<exprs::Grad>()->fn;
      for (const auto& c : children(e))
        if (!operand) locate(c);
    };
    locate(host->body);

    AdContext ctx;
    ctx.program = &cur;
    ctx.registry = cur.registry;
    ctx.names = NameSupply(all_names(cur.program));
    ctx.transformed = memo;
    Expr elaborated = elaborate_grad(*operand, cur.type_of(*operand), ctx);

    Program next = cur.program;
    Definition updated = *host;
    updated.body = replace_node(host->body, node, elaborated);
    next.replace(updated);
    for (auto& d : ctx.new_definitions) next.add(std::move(d));
    memo = ctx.transformed;
    cur = check_program(next, *cur.registry);
  }
}

std::pair<Program, std::string> add_gradient_entry(const Program& p, const std::string& entry) {
  const Definition* def = p.find_definition(entry);
  if (!def) throw AdError("no definition named @" + entry);
  Program out = p;
  NameSupply names(all_names(p));
  std::string name = names.fresh(entry + "__grad");
  std::vector<Param> params;
  std::vector<Expr> args;
  for (const auto& param : def->params) {
    params.push_back(param);
    args.push_back(ir::local(param.name));
  }
  Type ret = gradient_type(def->type())->as<types::Arrow>()->codomain;
  out.add(Definition{name, params, ret, ir::call(ir::grad(ir::global(entry)), std::move(args)), def->span});
  return {std::move(out), name};
}

}  // namespace gradir
