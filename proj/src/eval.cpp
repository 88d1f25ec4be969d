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

#include "gradir/eval.hpp"

#include <pthread.h>

#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>

#include "gradir/autodiff.hpp"

namespace gradir {

std::size_t default_max_depth() {
  if (const char* s = std::getenv("GRADIR_DEPTH")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end != s && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 10000;
}

// ---------------------------------------------------------------------------
// Elementwise arithmetic
// ---------------------------------------------------------------------------

namespace {

struct IntRange {
  std::int64_t lo;
  std::int64_t hi;
};

IntRange signed_range(const BaseType& b) {
  if (b.scalar == Scalar::Bool) return {0, 1};
  if (b.width >= 64) return {std::numeric_limits<std::int64_t>::min(), std::numeric_limits<std::int64_t>::max()};
  std::int64_t hi = (std::int64_t{1} << (b.width - 1)) - 1;
  return {-hi - 1, hi};
}

std::uint64_t unsigned_max(const BaseType& b) {
  if (b.width >= 64) return std::numeric_limits<std::uint64_t>::max();
  return (std::uint64_t{1} << b.width) - 1;
}

[[noreturn]] void overflow(const BaseType& b) {
  throw EvalError("integer overflow in " + std::string(b.scalar == Scalar::Bool ? "BoolType" : "integer") +
                  " arithmetic");
}

std::int64_t signed_op(BinaryOperator op, std::int64_t a, std::int64_t b, const BaseType& base) {
  std::int64_t r = 0;
  bool ovf = false;
  switch (op) {
    case BinaryOperator::Add:
      ovf = __builtin_add_overflow(a, b, &r);
      break;
    case BinaryOperator::Sub:
      ovf = __builtin_sub_overflow(a, b, &r);
      break;
    case BinaryOperator::Mul:
      ovf = __builtin_mul_overflow(a, b, &r);
      break;
    case BinaryOperator::Div:
      if (b == 0) throw EvalError("integer division by zero");
      if (a == std::numeric_limits<std::int64_t>::min() && b == -1) overflow(base);
      r = a / b;
      break;
    default:
      break;
  }
  auto range = signed_range(base);
  if (ovf || r < range.lo || r > range.hi) overflow(base);
  return r;
}

std::uint64_t unsigned_op(BinaryOperator op, std::uint64_t a, std::uint64_t b, const BaseType& base) {
  std::uint64_t r = 0;
  bool ovf = false;
  switch (op) {
    case BinaryOperator::Add:
      ovf = __builtin_add_overflow(a, b, &r);
      break;
    case BinaryOperator::Sub:
      ovf = __builtin_sub_overflow(a, b, &r);
      break;
    case BinaryOperator::Mul:
      ovf = __builtin_mul_overflow(a, b, &r);
      break;
    case BinaryOperator::Div:
      if (b == 0) throw EvalError("integer division by zero");
      r = a / b;
      break;
    default:
      break;
  }
  if (ovf || r > unsigned_max(base)) overflow(base);
  return r;
}

double float_op(BinaryOperator op, double a, double b) {
  switch (op) {
    case BinaryOperator::Add:
      return a + b;
    case BinaryOperator::Sub:
      return a - b;
    case BinaryOperator::Mul:
      return a * b;
    default:
      return a / b;
  }
}

template <class T>
bool compare(BinaryOperator op, T a, T b) {
  switch (op) {
    case BinaryOperator::Eq:
      return a == b;
    case BinaryOperator::Ne:
      return a != b;
    case BinaryOperator::Lt:
      return a < b;
    case BinaryOperator::Le:
      return a <= b;
    case BinaryOperator::Gt:
      return a > b;
    default:
      return a >= b;
  }
}

double round_to(const BaseType& b, double v) {
  return b.width == 32 ? static_cast<double>(static_cast<float>(v)) : v;
}

}  // namespace

TensorValue eval_primop(BinaryOperator op, const TensorValue& lhs, const TensorValue& rhs) {
  if (!(lhs.base == rhs.base) || lhs.shape != rhs.shape)
    throw EvalError("operands of " + std::string(to_string(op)) + " differ in base type or shape");
  const std::size_t n = lhs.size();
  const BaseType& base = lhs.base;
  if (is_comparison(op)) {
    std::vector<std::int64_t> out(n);
    std::visit(
        [&](const auto& a) {
          using V = std::decay_t<decltype(a)>;
          const auto& b = std::get<V>(rhs.data);
          for (std::size_t i = 0; i < n; ++i) out[i] = compare(op, a[i], b[i]) ? 1 : 0;
        },
        lhs.data);
    return TensorValue{BaseType::Bool(), lhs.shape, std::move(out)};
  }
  TensorValue result{base, lhs.shape, {}};
  switch (base.scalar) {
    case Scalar::Float: {
      const auto& a = lhs.floats();
      const auto& b = rhs.floats();
      std::vector<double> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = round_to(base, float_op(op, a[i], b[i]));
      result.data = std::move(out);
      break;
    }
    case Scalar::UInt: {
      const auto& a = lhs.uints();
      const auto& b = rhs.uints();
      std::vector<std::uint64_t> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = unsigned_op(op, a[i], b[i], base);
      result.data = std::move(out);
      break;
    }
    default: {
      const auto& a = lhs.ints();
      const auto& b = rhs.ints();
      std::vector<std::int64_t> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = signed_op(op, a[i], b[i], base);
      result.data = std::move(out);
      break;
    }
  }
  return result;
}

TensorValue eval_primop(UnaryOperator op, const TensorValue& operand) {
  if (op == UnaryOperator::Sq) return eval_primop(BinaryOperator::Mul, operand, operand);
  if (operand.base.is_float()) {
    std::vector<double> out(operand.floats());
    for (auto& x : out) x = -x;
    return TensorValue{operand.base, operand.shape, std::move(out)};
  }
  return eval_primop(BinaryOperator::Sub, TensorValue::zeros(operand.base, operand.shape), operand);
}

// ---------------------------------------------------------------------------
// Interpreter
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kEvalStackBytes = std::size_t{1} << 30;

/*! Runs \p body on a thread with a large stack so deep recursion reports an error instead of crashing. */
void run_on_large_stack(const std::function<void()>& body) {
  struct Job {
    const std::function<void()>* body;
    std::exception_ptr error;
  } job{&body, nullptr};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, kEvalStackBytes);
  pthread_t thread;
  int rc = pthread_create(
      &thread, &attr,
      [](void* p) -> void* {
        auto* j = static_cast<Job*>(p);
        try {
          (*j->body)();
        } catch (...) {
          j->error = std::current_exception();
        }
        return nullptr;
      },
      &job);
  pthread_attr_destroy(&attr);
  if (rc != 0) {
    body();
    return;
  }
  pthread_join(thread, nullptr);
  if (job.error) std::rethrow_exception(job.error);
}

const TensorValue& as_tensor(const Value& v, const char* what) {
  auto* t = v->as<TensorValue>();
  if (!t) throw EvalError(std::string(what) + " is not a tensor");
  return *t;
}

}  // namespace

struct Interpreter::Impl {
  TypedProgram program;
  EvalOptions options;
  Store store;
  std::size_t depth = 0;
  std::map<std::string, Value, std::less<>> globals;

  struct DepthGuard {
    Impl& impl;
    explicit DepthGuard(Impl& i) : impl(i) {
      if (++impl.depth > impl.options.max_depth) {
        --impl.depth;
        throw EvalError("recursion depth exceeded (limit " + std::to_string(impl.options.max_depth) + ")");
      }
    }
    ~DepthGuard() { --impl.depth; }
  };

  Value global(const std::string& name) {
    if (auto it = globals.find(name); it != globals.end()) return it->second;
    Value v;
    if (const Definition* d = program.program.find_definition(name)) {
      v = std::make_shared<const ValueNode>(ValueNode{ClosureValue{d->params, d->body, nullptr}});
    } else if (program.program.find_operator(name) || (program.registry && program.registry->contains(name))) {
      v = std::make_shared<const ValueNode>(ValueNode{OperatorValue{name}});
    } else {
      throw EvalError("unknown global @" + name);
    }
    globals.emplace(name, v);
    return v;
  }

  Value apply(const Value& callee, std::vector<Value> args) {
    if (auto* c = callee->as<ClosureValue>()) {
      if (c->params.size() != args.size())
        throw EvalError("function expects " + std::to_string(c->params.size()) + " arguments, got " +
                        std::to_string(args.size()));
      DepthGuard guard(*this);
      Env env = c->env;
      for (std::size_t i = 0; i < args.size(); ++i) env = env_extend(env, c->params[i].name, std::move(args[i]));
      return eval(c->body, env);
    }
    if (auto* o = callee->as<OperatorValue>()) {
      const OperatorImpl* impl = program.registry ? program.registry->find(o->name) : nullptr;
      if (!impl) throw EvalError("operator @" + o->name + " is not registered");
      return impl->eval(args);
    }
    throw EvalError("callee is not a function");
  }

  void observe(BinaryOperator op, const TensorValue& a, const TensorValue& b) {
    if (!options.on_compare || !is_comparison(op)) return;
    for (std::size_t i = 0; i < a.size(); ++i) options.on_compare(std::fabs(a.as_double(i) - b.as_double(i)));
  }

  Value eval(Expr e, Env env) {
    for (;;) {
      if (auto* l = e->as<exprs::Let>()) {
        env = env_extend(env, l->binder, eval(l->value, env));
        e = l->body;
        continue;
      }
      if (auto* i = e->as<exprs::If>()) {
        Value cv = eval(i->cond, env);
        const auto& c = as_tensor(cv, "if condition");
        if (c.base.scalar != Scalar::Bool || !c.shape.empty()) throw EvalError("if condition is not a scalar bool");
        e = c.ints()[0] ? i->then_branch : i->else_branch;
        continue;
      }
      return step(e, env);
    }
  }

  Value step(const Expr& e, const Env& env) {
    return std::visit(
        overloaded{
            [&](const exprs::LocalVar& n) -> Value {
              if (const Value* v = env_lookup(env, n.name)) return *v;
              throw EvalError("unbound variable " + n.name);
            },
            [&](const exprs::GlobalVar& n) -> Value { return global(n.name); },
            [&](const exprs::IntLit& n) -> Value {
              return make_value(TensorValue{BaseType::Int(32), {}, std::vector<std::int64_t>{n.value}});
            },
            [&](const exprs::FloatLit& n) -> Value {
              return make_value(TensorValue::from_floats({n.value}, {}, n.width));
            },
            [&](const exprs::BoolLit& n) -> Value { return make_value(TensorValue::boolean(n.value)); },
            [&](const exprs::Call& n) -> Value {
              Value callee = eval(n.callee, env);
              std::vector<Value> args;
              args.reserve(n.args.size());
              for (const auto& a : n.args) args.push_back(eval(a, env));
              return apply(callee, std::move(args));
            },
            [&](const exprs::Cast& n) -> Value { return eval(n.inner, env); },
            [&](const exprs::BinOp& n) -> Value {
              Value l = eval(n.lhs, env);
              Value r = eval(n.rhs, env);
              const auto& a = as_tensor(l, "operand");
              const auto& b = as_tensor(r, "operand");
              observe(n.op, a, b);
              return make_value(eval_primop(n.op, a, b));
            },
            [&](const exprs::UnaryOp& n) -> Value {
              Value v = eval(n.operand, env);
              return make_value(eval_primop(n.op, as_tensor(v, "operand")));
            },
            [&](const exprs::Tuple& n) -> Value {
              std::vector<Value> elems;
              elems.reserve(n.elements.size());
              for (const auto& x : n.elements) elems.push_back(eval(x, env));
              return make_tuple(std::move(elems));
            },
            [&](const exprs::Projection& n) -> Value {
              Value t = eval(n.tuple, env);
              auto* tv = t->as<TupleValue>();
              if (!tv) throw EvalError("projection from a non-tuple");
              if (n.index >= tv->elements.size()) throw EvalError("projection index out of bounds");
              return tv->elements[n.index];
            },
            [&](const exprs::TensorLit& n) -> Value {
              std::vector<Value> elems;
              for (const auto& x : n.elements) elems.push_back(eval(x, env));
              const auto& first = as_tensor(elems.front(), "tensor literal element");
              std::vector<std::int64_t> shape{static_cast<std::int64_t>(elems.size())};
              shape.insert(shape.end(), first.shape.begin(), first.shape.end());
              TensorValue out{first.base, shape, {}};
              std::visit(
                  [&](const auto& proto) {
                    using V = std::decay_t<decltype(proto)>;
                    V data;
                    for (const auto& v : elems) {
                      const auto& t = as_tensor(v, "tensor literal element");
                      if (!(t.base == first.base) || t.shape != first.shape)
                        throw EvalError("tensor literal elements differ in base type or shape");
                      const auto& d = std::get<V>(t.data);
                      data.insert(data.end(), d.begin(), d.end());
                    }
                    out.data = std::move(data);
                  },
                  first.data);
              return make_value(std::move(out));
            },
            [&](const exprs::Zero& n) -> Value {
              auto info = tensor_info(n.type);
              if (!info) throw EvalError("Zero of a non-tensor type");
              return make_value(TensorValue::zeros(info->base, info->dims));
            },
            [&](const exprs::Grad&) -> Value { throw EvalError("Grad must be elaborated before evaluation"); },
            [&](const exprs::RefNew& n) -> Value {
              std::size_t addr = store.allocate(eval(n.init, env));
              return std::make_shared<const ValueNode>(ValueNode{RefValue{addr}});
            },
            [&](const exprs::RefRead& n) -> Value {
              Value r = eval(n.ref, env);
              auto* rv = r->as<RefValue>();
              if (!rv) throw EvalError("dereference of a non-reference");
              return store.read(rv->address);
            },
            [&](const exprs::RefWrite& n) -> Value {
              Value r = eval(n.ref, env);
              Value v = eval(n.value, env);
              auto* rv = r->as<RefValue>();
              if (!rv) throw EvalError("assignment to a non-reference");
              store.write(rv->address, std::move(v));
              return unit_value();
            },
            [&](const exprs::Function& n) -> Value {
              return std::make_shared<const ValueNode>(ValueNode{ClosureValue{n.params, n.body, env}});
            },
            [&](const auto&) -> Value { throw EvalError("unexpected expression form"); },
        },
        e->v);
  }
};

Interpreter::Interpreter(const TypedProgram& program, EvalOptions options) : impl_(std::make_unique<Impl>()) {
  bool has_grad = false;
  for (const auto& item : program.program.items())
    if (auto* d = std::get_if<Definition>(&item); d && contains_grad(d->body)) has_grad = true;
  impl_->program = has_grad ? elaborate_program(program) : program;
  impl_->options = std::move(options);
}

Interpreter::~Interpreter() = default;

Value Interpreter::call(std::string_view entry, std::vector<Value> args) {
  Value result;
  run_on_large_stack([&] {
    Value callee = impl_->global(std::string(entry));
    if (!callee->as<ClosureValue>() && !callee->as<OperatorValue>())
      throw EvalError("@" + std::string(entry) + " is not callable");
    result = impl_->apply(callee, std::move(args));
  });
  return result;
}

Value Interpreter::eval(const Expr& e) {
  Value result;
  run_on_large_stack([&] { result = impl_->eval(e, nullptr); });
  return result;
}

const Store& Interpreter::store() const { return impl_->store; }
const TypedProgram& Interpreter::program() const { return impl_->program; }

Value evaluate(const TypedProgram& p, std::string_view entry, std::vector<Value> args, const EvalOptions& options) {
  Interpreter interp(p, options);
  return interp.call(entry, std::move(args));
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

namespace {

Type widen_type(const Type& t) {
  if (auto* b = t->as<types::Base>(); b && b->base == BaseType::Float(32)) return base_type(BaseType::Float(64), t->span);
  return std::visit(
      overloaded{
          [&](const types::Tensor& x) { return tensor_type(widen_type(x.base), widen_type(x.shape), t->span); },
          [&](const types::Arrow& x) { return arrow_type(widen_type(x.domain), widen_type(x.codomain), t->span); },
          [&](const types::Forall& x) { return forall_type(x.var, x.kind, widen_type(x.body), t->span); },
          [&](const types::Ref& x) { return ref_type(widen_type(x.inner), t->span); },
          [&](const types::Product& x) {
            std::vector<Type> elems;
            for (const auto& e : x.elements) elems.push_back(widen_type(e));
            return product_type(std::move(elems), t->span);
          },
          [&](const auto&) { return t; },
      },
      t->v);
}

Expr widen_expr(const Expr& e) {
  if (auto* f = e->as<exprs::FloatLit>(); f && f->width == 32) return ir::make(exprs::FloatLit{f->value, 64}, e->span);
  return map_children(e, widen_expr, widen_type);
}

TensorValue to_width(const TensorValue& t, unsigned width) {
  return TensorValue::from_floats(t.floats(), t.shape, width);
}

double scalar_result(const Value& v) {
  auto* t = v->as<TensorValue>();
  if (!t || !t->base.is_float() || t->size() != 1) throw EvalError("finite differences need a scalar float result");
  return t->floats()[0];
}

}  // namespace

Program widen_floats(const Program& p) {
  Program out;
  for (const auto& item : p.items()) {
    if (auto* d = std::get_if<OperatorDecl>(&item)) {
      out.add(OperatorDecl{d->name, widen_type(d->type), d->span});
      continue;
    }
    const auto& def = std::get<Definition>(item);
    std::vector<Param> params;
    for (const auto& param : def.params) params.push_back({param.name, widen_type(param.type)});
    out.add(Definition{def.name, std::move(params), widen_type(def.ret), widen_expr(def.body), def.span});
  }
  return out;
}

std::vector<TensorValue> finite_diff(const TypedProgram& p, std::string_view entry,
                                     const std::vector<TensorValue>& point, double h, const EvalOptions& options) {
  if (!(h > 0)) throw EvalError("finite difference step must be positive");
  if (!p.registry) throw EvalError("program has no operator registry");
  TypedProgram wide = check_program(widen_floats(p.program), *p.registry);
  Interpreter interp(wide, options);

  std::vector<Value> base;
  for (const auto& t : point) {
    if (!t.base.is_float()) throw EvalError("finite differences need float tensor arguments");
    base.push_back(make_value(to_width(t, 64)));
  }
  auto f = [&](std::size_t arg, std::size_t slot, double delta) {
    std::vector<Value> args = base;
    TensorValue moved = *args[arg]->as<TensorValue>();
    auto data = moved.floats();
    data[slot] += delta;
    moved.data = std::move(data);
    args[arg] = make_value(std::move(moved));
    return scalar_result(interp.call(entry, std::move(args)));
  };

  std::vector<TensorValue> grads;
  for (std::size_t i = 0; i < point.size(); ++i) {
    std::vector<double> g(point[i].size());
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = (f(i, j, h) - f(i, j, -h)) / (2 * h);
    grads.push_back(TensorValue::from_floats(std::move(g), point[i].shape, point[i].base.width));
  }
  return grads;
}

}  // namespace gradir
