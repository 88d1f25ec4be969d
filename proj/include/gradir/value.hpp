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

/*!
 * \file gradir/value.hpp
 * \brief Runtime values of the reference interpreter.
 */
#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gradir/ast.hpp"

namespace gradir {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/*!
 * \brief Dense row-major tensor. Floats are held as doubles (32-bit values
 *  are rounded on every store), Int and Bool as int64, UInt as uint64.
 */
struct TensorValue {
  using Data = std::variant<std::vector<double>, std::vector<std::int64_t>, std::vector<std::uint64_t>>;

  BaseType base;
  std::vector<std::int64_t> shape;
  Data data;

  std::size_t size() const;
  const std::vector<double>& floats() const { return std::get<std::vector<double>>(data); }
  const std::vector<std::int64_t>& ints() const { return std::get<std::vector<std::int64_t>>(data); }
  const std::vector<std::uint64_t>& uints() const { return std::get<std::vector<std::uint64_t>>(data); }
  /*! Element \p i widened to double, whatever the base. */
  double as_double(std::size_t i) const;

  static TensorValue zeros(BaseType base, std::vector<std::int64_t> shape);
  static TensorValue scalar(double v, unsigned width = 64);
  static TensorValue from_floats(std::vector<double> v, std::vector<std::int64_t> shape, unsigned width = 64);
  static TensorValue boolean(bool v);
};

std::size_t element_count(const std::vector<std::int64_t>& shape);

struct ValueNode;
using Value = std::shared_ptr<const ValueNode>;

/*! Persistent environment; extending never mutates an existing frame. */
struct EnvFrame {
  std::string name;
  Value value;
  std::shared_ptr<const EnvFrame> parent;
};
using Env = std::shared_ptr<const EnvFrame>;

Env env_extend(Env env, std::string name, Value v);
const Value* env_lookup(const Env& env, const std::string& name);

struct TupleValue {
  std::vector<Value> elements;
};
struct ClosureValue {
  std::vector<Param> params;
  Expr body;
  Env env;
};
struct OperatorValue {
  std::string name;
};
struct RefValue {
  std::size_t address;
};

struct ValueNode {
  std::variant<TensorValue, TupleValue, ClosureValue, OperatorValue, RefValue> v;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&v);
  }
};

Value make_value(TensorValue t);
Value make_tuple(std::vector<Value> elements);
Value unit_value();

/*! Address-to-value cells for Ref/!/:=. Addresses are never reused. */
class Store {
 public:
  std::size_t allocate(Value v);
  const Value& read(std::size_t address) const;
  void write(std::size_t address, Value v);
  std::size_t size() const { return cells_.size(); }

 private:
  std::vector<Value> cells_;
};

/*! True when \p v inhabits \p t: tensor base and shape, tuple arity, arrow arity. */
bool value_matches_type(const Value& v, const Type& t, const Store* store = nullptr);

bool values_equal(const Value& a, const Value& b);

}  // namespace gradir
