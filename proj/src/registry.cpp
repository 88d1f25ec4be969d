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

#include "gradir/registry.hpp"

#include <stdexcept>

#include "gradir/eval.hpp"
#include "gradir/pretty.hpp"
#include "gradir/syntax.hpp"
#include "gradir/typecheck.hpp"

namespace gradir {

namespace {

const TensorValue& tensor_arg(std::span<const Value> args, std::size_t i, std::string_view op) {
  if (i >= args.size()) throw EvalError(std::string(op) + ": missing argument");
  auto* t = args[i]->as<TensorValue>();
  if (!t) throw EvalError(std::string(op) + ": argument " + std::to_string(i) + " is not a tensor");
  return *t;
}

TensorValue element(const TensorValue& t, std::size_t i) {
  TensorValue out{t.base, {}, {}};
  std::visit([&](const auto& v) { out.data = std::decay_t<decltype(v)>{v[i]}; }, t.data);
  return out;
}

TensorValue filled(const TensorValue& s, std::vector<std::int64_t> shape) {
  auto n = element_count(shape);
  TensorValue out{s.base, std::move(shape), {}};
  std::visit([&](const auto& v) { out.data = std::decay_t<decltype(v)>(n, v[0]); }, s.data);
  return out;
}

TensorValue sum_of(const TensorValue& t) {
  TensorValue acc = TensorValue::zeros(t.base, {});
  for (std::size_t i = 0; i < t.size(); ++i) acc = eval_primop(BinaryOperator::Add, acc, element(t, i));
  return acc;
}

Value op_sum(std::span<const Value> args) { return make_value(sum_of(tensor_arg(args, 0, "@sum"))); }

Value op_dot(std::span<const Value> args) {
  const auto& x = tensor_arg(args, 0, "@dot");
  const auto& y = tensor_arg(args, 1, "@dot");
  if (x.shape != y.shape) throw EvalError("@dot: shape mismatch");
  return make_value(sum_of(eval_primop(BinaryOperator::Mul, x, y)));
}

Value op_broadcast(std::span<const Value> args) {
  const auto& s = tensor_arg(args, 0, "@broadcast");
  const auto& like = tensor_arg(args, 1, "@broadcast");
  if (!s.shape.empty()) throw EvalError("@broadcast: first argument must be a scalar");
  return make_value(filled(s, like.shape));
}

Expr call_op(const char* name, std::vector<Expr> args) { return ir::call(ir::global(name), std::move(args)); }

std::vector<Expr> sum_adjoint(const AdjointInputs& in) {
  std::vector<Expr> out;
  if (in.arg_adjoints[0])
    out.push_back(accumulate(in.arg_adjoints[0], call_op("broadcast", {in.result_adjoint, in.args[0]})));
  return out;
}

std::vector<Expr> dot_adjoint(const AdjointInputs& in) {
  std::vector<Expr> out;
  for (std::size_t i = 0; i < 2; ++i) {
    if (!in.arg_adjoints[i]) continue;
    const Expr& other = in.args[1 - i];
    out.push_back(accumulate(
        in.arg_adjoints[i],
        ir::binop(BinaryOperator::Mul, call_op("broadcast", {in.result_adjoint, other}), other)));
  }
  return out;
}

std::vector<Expr> broadcast_adjoint(const AdjointInputs& in) {
  std::vector<Expr> out;
  if (in.arg_adjoints[0]) out.push_back(accumulate(in.arg_adjoints[0], call_op("sum", {in.result_adjoint})));
  return out;
}

}  // namespace

Expr accumulate(const Expr& ref, Expr delta) {
  return ir::ref_write(ref, ir::binop(BinaryOperator::Add, ir::ref_read(ref), std::move(delta)));
}

void Registry::register_operator(OperatorImpl impl) {
  if (ops_.count(impl.name)) throw std::invalid_argument("operator @" + impl.name + " is already registered");
  if (!impl.type) throw std::invalid_argument("operator @" + impl.name + " has no type");
  try {
    if (kind_of(TypeEnv{}, impl.type) != Kind::Type)
      throw std::invalid_argument("operator @" + impl.name + " type " + pretty(impl.type) + " is not of kind Type");
  } catch (const TypeError& e) {
    throw std::invalid_argument("operator @" + impl.name + ": " + e.message());
  }
  auto name = impl.name;
  ops_.emplace(std::move(name), std::move(impl));
}

const OperatorImpl* Registry::find(std::string_view name) const {
  auto it = ops_.find(name);
  return it == ops_.end() ? nullptr : &it->second;
}

Registry Registry::with_builtins() {
  Registry r;
  r.register_operator({"sum",
                       parse_type("forall (B : BaseType), forall (S : Shape), "
                                  "(Tensor(B, S)) -> Tensor(B, Shape())"),
                       op_sum, sum_adjoint});
  r.register_operator({"dot",
                       parse_type("forall (B : BaseType), forall (S : Shape), "
                                  "(Tensor(B, S), Tensor(B, S)) -> Tensor(B, Shape())"),
                       op_dot, dot_adjoint});
  r.register_operator({"broadcast",
                       parse_type("forall (B : BaseType), forall (S : Shape), "
                                  "(Tensor(B, Shape()), Tensor(B, S)) -> Tensor(B, S)"),
                       op_broadcast, broadcast_adjoint});
  return r;
}

}  // namespace gradir
