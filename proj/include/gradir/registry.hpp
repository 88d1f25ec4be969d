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
 * \file gradir/registry.hpp
 * \brief Primitive operators implemented natively and registered with the runtime.
 *
 * An operator pairs a declared (usually polymorphic) type with a native
 * evaluator and, optionally, an adjoint rule that lets autodiff
 * differentiate through calls to it.
 */
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradir/ast.hpp"
#include "gradir/value.hpp"

namespace gradir {

/*!
 * \brief What an adjoint rule sees for one call `@op(a1, ..., an)`.
 *
 * All expressions are variables bound by the transformed code, so the rule
 * may mention them any number of times.
 */
struct AdjointInputs {
  /*! Value components of the arguments. */
  std::vector<Expr> args;
  /*! Adjoint reference of each argument; null when the argument is not differentiable. */
  std::vector<Expr> arg_adjoints;
  /*! The adjoint of the call result (already read from its reference). */
  Expr result_adjoint;
  /*! Static types of the arguments. */
  std::vector<Type> arg_types;
};

/*! Returns unit-typed statements that accumulate into the argument adjoints. */
using AdjointRule = std::function<std::vector<Expr>(const AdjointInputs&)>;

using OperatorEval = std::function<Value(std::span<const Value>)>;

struct OperatorImpl {
  std::string name;
  Type type;
  OperatorEval eval;
  std::optional<AdjointRule> adjoint;
};

/*! `ref := !ref + delta`, the accumulation statement adjoint rules are made of. */
Expr accumulate(const Expr& ref, Expr delta);

class Registry {
 public:
  /*! Throws std::invalid_argument on a duplicate id or an ill-kinded type. */
  void register_operator(OperatorImpl impl);

  const OperatorImpl* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  const std::map<std::string, OperatorImpl, std::less<>>& operators() const { return ops_; }

  /*! A registry preloaded with @sum, @dot and @broadcast. */
  static Registry with_builtins();

 private:
  std::map<std::string, OperatorImpl, std::less<>> ops_;
};

}  // namespace gradir
