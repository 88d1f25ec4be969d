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
 * \file gradir/eval.hpp
 * \brief Tree-walking reference interpreter and finite-difference oracle.
 *
 * Evaluation is strict and left to right. Grad nodes are elaborated away
 * before evaluation starts. Integer overflow and integer division by zero
 * are runtime errors; float arithmetic is IEEE-754, with 32-bit results
 * rounded after every operation.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "gradir/registry.hpp"
#include "gradir/typecheck.hpp"
#include "gradir/value.hpp"

namespace gradir {

/*! Default call depth limit: $GRADIR_DEPTH if set and positive, otherwise 10000. */
std::size_t default_max_depth();

struct EvalOptions {
  std::size_t max_depth = default_max_depth();
  /*!
   * Called for every scalar comparison with |lhs - rhs|. Lets callers
   * detect evaluation points that sit close to a branch boundary.
   */
  std::function<void(double gap)> on_compare;
};

TensorValue eval_primop(BinaryOperator op, const TensorValue& lhs, const TensorValue& rhs);
TensorValue eval_primop(UnaryOperator op, const TensorValue& operand);

class Interpreter {
 public:
  /*! Elaborates Grad nodes first when \p program has any; may throw TypeFailure. */
  Interpreter(const TypedProgram& program, EvalOptions options = {});
  ~Interpreter();
  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  /*! Calls global \p entry. Throws EvalError. */
  Value call(std::string_view entry, std::vector<Value> args);
  /*! Evaluates a closed expression. Throws EvalError. */
  Value eval(const Expr& e);

  const Store& store() const;
  const TypedProgram& program() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/*! Runs \p entry in a fresh interpreter. */
Value evaluate(const TypedProgram& p, std::string_view entry, std::vector<Value> args,
               const EvalOptions& options = {});

/*!
 * \brief Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every
 *  scalar slot of every argument. 32-bit floats are widened so the oracle
 *  always runs in 64-bit arithmetic; gradients come back in the argument
 *  types.
 */
std::vector<TensorValue> finite_diff(const TypedProgram& p, std::string_view entry,
                                     const std::vector<TensorValue>& point, double h,
                                     const EvalOptions& options = {});

/*! Every 32-bit float type and literal replaced by its 64-bit counterpart. */
Program widen_floats(const Program& p);

}  // namespace gradir
