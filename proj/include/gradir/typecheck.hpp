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
 * \file gradir/typecheck.hpp
 * \brief Kinding and typing with shape-dependent tensor types.
 *
 * Errors name the inference rule that failed: BaseType-T, Shape-T,
 * Tensor-T, Arrow-T, Quantifier-T, Product-T, Ref-T for kinds and
 * Type-Int-Literal ... Type-Set-Ref for terms. Four more labels cover
 * checks outside that core set: Cast-Ascription (a cast only asserts the
 * type of its operand), Instantiate (call-site instantiation of a
 * polymorphic operator), Operator-Declaration (declared vs registered
 * operators) and Scope (unbound local or global names).
 */
#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gradir/ast.hpp"

namespace gradir {

class Registry;

class TypeError : public std::runtime_error {
 public:
  TypeError(std::string rule, std::string message, Span span = {});

  const std::string& rule() const { return rule_; }
  const std::string& message() const { return message_; }
  const Span& span() const { return span_; }

 private:
  std::string rule_;
  std::string message_;
  Span span_;
};

class TypeFailure : public std::runtime_error {
 public:
  explicit TypeFailure(std::vector<TypeError> errors);
  const std::vector<TypeError>& errors() const { return errors_; }

 private:
  std::vector<TypeError> errors_;
};

/*!
 * \brief Typing context: type variables with their kinds (delta), term
 *  variables with their types (gamma), and the global signature.
 *
 * Scopes are stacks; the innermost binding of a name wins.
 */
struct TypeEnv {
  std::vector<std::pair<std::string, Kind>> delta;
  std::vector<std::pair<std::string, Type>> gamma;
  std::map<std::string, Type, std::less<>> globals;
  /*! Globals that name operators rather than definitions. */
  std::set<std::string, std::less<>> operator_names;

  const Kind* find_kind(std::string_view name) const;
  const Type* find_local(std::string_view name) const;
  const Type* find_global(std::string_view name) const;
};

/*! Derived types of every subexpression, keyed by node identity. */
using TypeTable = std::unordered_map<const ExprNode*, Type>;

struct TypedProgram {
  Program program;
  TypeTable types;
  std::map<std::string, Type, std::less<>> globals;
  const Registry* registry = nullptr;

  /*! Throws std::out_of_range if \p e was not checked. */
  const Type& type_of(const Expr& e) const;
};

Kind kind_of(const TypeEnv& env, const Type& t);

struct Instantiation {
  std::map<std::string, Type> substitution;
  Type arrow;
};

/*! Solves the quantified variables of \p poly from the argument types by first-order matching. */
Instantiation instantiate(const TypeEnv& env, const Type& poly, const std::vector<Type>& arg_types);

/*! Derives the type of \p e, recording subexpression types in \p table when given. */
Type type_of(TypeEnv& env, const Expr& e, TypeTable* table = nullptr);

/*! Checks every item; throws TypeFailure with all per-item errors. */
TypedProgram check_program(const Program& p, const Registry& registry);

}  // namespace gradir
