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

#include "gradir/value.hpp"

namespace gradir {

std::size_t element_count(const std::vector<std::int64_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

std::size_t TensorValue::size() const {
  return std::visit([](const auto& v) { return v.size(); }, data);
}

double TensorValue::as_double(std::size_t i) const {
  return std::visit([i](const auto& v) { return static_cast<double>(v[i]); }, data);
}

TensorValue TensorValue::zeros(BaseType base, std::vector<std::int64_t> shape) {
  auto n = element_count(shape);
  TensorValue t{base, std::move(shape), {}};
  switch (base.scalar) {
    case Scalar::Float:
      t.data = std::vector<double>(n, 0.0);
      break;
    case Scalar::UInt:
      t.data = std::vector<std::uint64_t>(n, 0);
      break;
    default:
      t.data = std::vector<std::int64_t>(n, 0);
      break;
  }
  return t;
}

TensorValue TensorValue::scalar(double v, unsigned width) {
  return from_floats({v}, {}, width);
}

TensorValue TensorValue::from_floats(std::vector<double> v, std::vector<std::int64_t> shape, unsigned width) {
  if (width == 32)
    for (auto& x : v) x = static_cast<double>(static_cast<float>(x));
  return TensorValue{BaseType::Float(width), std::move(shape), std::move(v)};
}

TensorValue TensorValue::boolean(bool v) {
  return TensorValue{BaseType::Bool(), {}, std::vector<std::int64_t>{v ? 1 : 0}};
}

Env env_extend(Env env, std::string name, Value v) {
  return std::make_shared<const EnvFrame>(EnvFrame{std::move(name), std::move(v), std::move(env)});
}

const Value* env_lookup(const Env& env, const std::string& name) {
  for (const EnvFrame* f = env.get(); f; f = f->parent.get())
    if (f->name == name) return &f->value;
  return nullptr;
}

Value make_value(TensorValue t) { return std::make_shared<const ValueNode>(ValueNode{std::move(t)}); }

Value make_tuple(std::vector<Value> elements) {
  return std::make_shared<const ValueNode>(ValueNode{TupleValue{std::move(elements)}});
}

Value unit_value() {
  static const Value unit = make_tuple({});
  return unit;
}

std::size_t Store::allocate(Value v) {
  cells_.push_back(std::move(v));
  return cells_.size() - 1;
}

const Value& Store::read(std::size_t address) const {
  if (address >= cells_.size()) throw EvalError("dangling reference " + std::to_string(address));
  return cells_[address];
}

void Store::write(std::size_t address, Value v) {
  if (address >= cells_.size()) throw EvalError("dangling reference " + std::to_string(address));
  cells_[address] = std::move(v);
}

bool value_matches_type(const Value& v, const Type& t, const Store* store) {
  if (auto info = tensor_info(t)) {
    auto* tv = v->as<TensorValue>();
    return tv && tv->base == info->base && tv->shape == info->dims && tv->size() == element_count(tv->shape);
  }
  if (auto* p = t->as<types::Product>()) {
    auto* tv = v->as<TupleValue>();
    if (!tv || tv->elements.size() != p->elements.size()) return false;
    for (std::size_t i = 0; i < p->elements.size(); ++i)
      if (!value_matches_type(tv->elements[i], p->elements[i], store)) return false;
    return true;
  }
  if (auto* a = t->as<types::Arrow>()) {
    if (auto* c = v->as<ClosureValue>()) return c->params.size() == domain_components(*a).size();
    return v->as<OperatorValue>() != nullptr;
  }
  if (auto* r = t->as<types::Ref>()) {
    auto* rv = v->as<RefValue>();
    if (!rv) return false;
    if (!store) return true;
    return rv->address < store->size() && value_matches_type(store->read(rv->address), r->inner, store);
  }
  return false;
}

bool values_equal(const Value& a, const Value& b) {
  if (a->v.index() != b->v.index()) return false;
  if (auto* x = a->as<TensorValue>()) {
    auto* y = b->as<TensorValue>();
    return x->base == y->base && x->shape == y->shape && x->data == y->data;
  }
  if (auto* x = a->as<TupleValue>()) {
    auto* y = b->as<TupleValue>();
    if (x->elements.size() != y->elements.size()) return false;
    for (std::size_t i = 0; i < x->elements.size(); ++i)
      if (!values_equal(x->elements[i], y->elements[i])) return false;
    return true;
  }
  if (auto* x = a->as<RefValue>()) return x->address == b->as<RefValue>()->address;
  if (auto* x = a->as<OperatorValue>()) return x->name == b->as<OperatorValue>()->name;
  // Closures compare by identity of their code.
  auto* x = a->as<ClosureValue>();
  auto* y = b->as<ClosureValue>();
  return x->body == y->body && x->env == y->env;
}

}  // namespace gradir
