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
 * \file gradir/autodiff.hpp
 * \brief Reverse-mode AD as a source-to-source transformation.
 *
 * Every float tensor is paired with a reference holding its adjoint. A
 * reference `bp : RefType(() -> ())` holds the backpropagator; each float
 * primitive prepends a closure to it that pushes the result adjoint to the
 * operand adjoints and then calls the previous backpropagator. Running
 * `(!bp)()` once at the end therefore walks the recorded operations in
 * reverse.
 *
 * A definition `@g` reached from a Grad operand is transformed into
 * `@g__ad(bp, lifted params...)`. Transformed code uses references and may
 * itself be transformed again, which is how nested Grad works.
 */
#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gradir/ast.hpp"
#include "gradir/registry.hpp"
#include "gradir/typecheck.hpp"

namespace gradir {

class AdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/*! Fresh identifiers that avoid every name in the seed set and every name handed out so far. */
class NameSupply {
 public:
  NameSupply() = default;
  explicit NameSupply(std::set<std::string> taken) : taken_(std::move(taken)) {}

  std::string fresh(std::string_view hint);
  void reserve(const std::string& name) { taken_.insert(name); }

 private:
  std::set<std::string> taken_;
};

/*!
 * Float tensors become (value, RefType(value)); arrows, products and
 * references lift componentwise; other tensors are unchanged. Lifting a
 * lifted type pairs again.
 */
Type lift_type(const Type& t);

/*!
 * For (T1, ..., Tn) -> Tensor(Float w, Shape()) with float tensor Ti, the
 * type (T1, ..., Tn) -> (Tensor(Float w, Shape()), (T1, ..., Tn)). Throws
 * AdError naming the violated constraint.
 */
Type gradient_type(const Type& fn_type);

/*! Throws AdError listing the free variables of \p e, if any. */
void assert_closed(const Expr& e);

/*! Per-program state shared by all Grad elaborations in that program. */
struct AdContext {
  const TypedProgram* program = nullptr;
  const Registry* registry = nullptr;
  NameSupply names;
  /*! Original definition name -> transformed definition name. */
  std::map<std::string, std::string> transformed;
  /*! Transformed definitions produced so far and not yet added to the program. */
  std::vector<Definition> new_definitions;
  /*! Name of the local holding the current backpropagator reference. */
  std::string backprop;
};

/*! T[e] under \p ctx; \p e must have been typechecked in ctx.program. */
Expr transform(const Expr& e, AdContext& ctx);

/*!
 * The function that Grad \p fn denotes: allocates the backpropagator, pairs
 * each argument with a zero adjoint, runs the transformed function, seeds
 * the result adjoint with one, backpropagates, then reads and clears the
 * argument adjoints.
 */
Expr elaborate_grad(const Expr& fn, const Type& fn_type, AdContext& ctx);

/*!
 * Replaces every Grad node, innermost dependencies first, re-typechecking
 * after each step. Throws AdError or TypeFailure.
 */
TypedProgram elaborate_program(const TypedProgram& p);

/*!
 * Adds `def @<entry>__grad(params) -> (ret, (params)) { Grad(@entry)(params) }`
 * to a copy of \p p; returns the new program and the wrapper's name.
 */
std::pair<Program, std::string> add_gradient_entry(const Program& p, const std::string& entry);

}  // namespace gradir
