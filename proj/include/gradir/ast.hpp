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
 * \file gradir/ast.hpp
 * \brief Abstract syntax of kinds, types, expressions and programs.
 *
 * Every node is immutable once built and is shared through a
 * shared_ptr-to-const handle, so subtrees can be reused freely by the
 * transformations (autodiff in particular builds a lot of sharing).
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace gradir {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/*! \brief Source region, 1-based line/column plus byte offsets [begin, end). */
struct Span {
  std::uint32_t line = 0;
  std::uint32_t column = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// ---------------------------------------------------------------------------
// Kinds and types
// ---------------------------------------------------------------------------

enum class Kind { BaseType, Shape, Type };

std::string_view to_string(Kind k);

enum class Scalar { Int, UInt, Float, Bool };

struct BaseType {
  Scalar scalar = Scalar::Float;
  /*! Bit width; 1 for Bool. */
  unsigned width = 32;

  bool operator==(const BaseType&) const = default;
  bool is_float() const { return scalar == Scalar::Float; }
  /*! Widths admitted by the kinding rule: 8/16/32/64 for ints, 32/64 for floats. */
  bool width_supported() const;

  static BaseType Int(unsigned w) { return {Scalar::Int, w}; }
  static BaseType UInt(unsigned w) { return {Scalar::UInt, w}; }
  static BaseType Float(unsigned w) { return {Scalar::Float, w}; }
  static BaseType Bool() { return {Scalar::Bool, 1}; }
};

struct TypeNode;
using Type = std::shared_ptr<const TypeNode>;

namespace types {
struct Base {
  BaseType base;
};
struct ShapeLit {
  std::vector<std::int64_t> dims;
};
struct Tensor {
  Type base;
  Type shape;
};
struct Arrow {
  Type domain;
  Type codomain;
};
struct Var {
  std::string name;
};
struct Forall {
  std::string var;
  Kind kind;
  Type body;
};
struct Ref {
  Type inner;
};
/*! Unit is the empty product. */
struct Product {
  std::vector<Type> elements;
};
}  // namespace types

struct TypeNode {
  using Variant = std::variant<types::Base, types::ShapeLit, types::Tensor, types::Arrow,
                               types::Var, types::Forall, types::Ref, types::Product>;
  Variant v;
  Span span;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&v);
  }
  template <class T>
  bool is() const {
    return std::holds_alternative<T>(v);
  }
};

Type base_type(BaseType b, Span span = {});
Type shape_type(std::vector<std::int64_t> dims, Span span = {});
Type tensor_type(Type base, Type shape, Span span = {});
Type tensor_type(BaseType base, std::vector<std::int64_t> dims);
Type arrow_type(Type domain, Type codomain, Span span = {});
/*! Arrow whose domain is the product of \p params. */
Type function_type(std::vector<Type> params, Type codomain);
Type type_var(std::string name, Span span = {});
Type forall_type(std::string var, Kind kind, Type body, Span span = {});
Type ref_type(Type inner, Span span = {});
Type product_type(std::vector<Type> elements, Span span = {});
Type unit_type();

/*! Returns the element types of an arrow domain; a non-product domain counts as one element. */
std::vector<Type> domain_components(const types::Arrow& arrow);

/*! If \p t is Tensor(Base b, Shape(ds)), the base and dims. */
struct TensorInfo {
  BaseType base;
  std::vector<std::int64_t> dims;
};
std::optional<TensorInfo> tensor_info(const Type& t);
bool is_float_tensor(const Type& t);

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class BinaryOperator { Add, Sub, Mul, Div, Ne, Eq, Lt, Le, Gt, Ge };
enum class UnaryOperator { Neg, Sq };

std::string_view to_string(BinaryOperator op);
std::string_view to_string(UnaryOperator op);
bool is_comparison(BinaryOperator op);

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct Param {
  std::string name;
  Type type;
};

namespace exprs {
struct LocalVar {
  std::string name;
};
struct GlobalVar {
  std::string name;
};
struct IntLit {
  std::int64_t value;
};
/*! Width 32 unless written with an `f64` suffix. */
struct FloatLit {
  double value;
  unsigned width = 32;
};
struct BoolLit {
  bool value;
};
struct Call {
  Expr callee;
  std::vector<Expr> args;
};
struct Let {
  std::string binder;
  Type annotation;  // may be null
  Expr value;
  Expr body;
};
struct Cast {
  Type target;
  Expr inner;
};
struct BinOp {
  BinaryOperator op;
  Expr lhs;
  Expr rhs;
};
struct UnaryOp {
  UnaryOperator op;
  Expr operand;
};
struct Tuple {
  std::vector<Expr> elements;
};
struct Projection {
  Expr tuple;
  std::size_t index;
};
struct TensorLit {
  std::vector<Expr> elements;
};
struct If {
  Expr cond;
  Expr then_branch;
  Expr else_branch;
};
struct Zero {
  Type type;
};
struct Grad {
  Expr fn;
};
struct RefNew {
  Expr init;
};
struct RefRead {
  Expr ref;
};
struct RefWrite {
  Expr ref;
  Expr value;
};
struct Function {
  std::vector<Param> params;
  Type ret;
  Expr body;
};
}  // namespace exprs

struct ExprNode {
  using Variant =
      std::variant<exprs::LocalVar, exprs::GlobalVar, exprs::IntLit, exprs::FloatLit,
                   exprs::BoolLit, exprs::Call, exprs::Let, exprs::Cast, exprs::BinOp,
                   exprs::UnaryOp, exprs::Tuple, exprs::Projection, exprs::TensorLit, exprs::If,
                   exprs::Zero, exprs::Grad, exprs::RefNew, exprs::RefRead, exprs::RefWrite,
                   exprs::Function>;
  Variant v;
  Span span;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&v);
  }
  template <class T>
  bool is() const {
    return std::holds_alternative<T>(v);
  }
};

/*! Variant tag name, e.g. "BinOp"; also the JSON "node" tag. */
std::string_view node_name(const ExprNode& e);

/*! Terse constructors, used by the parser and heavily by autodiff. */
namespace ir {
Expr make(ExprNode::Variant v, Span span = {});
Expr local(std::string name);
Expr global(std::string name);
Expr int_lit(std::int64_t v);
Expr float_lit(double v, unsigned width = 32);
Expr bool_lit(bool v);
Expr call(Expr callee, std::vector<Expr> args);
Expr let(std::string binder, Expr value, Expr body, Type annotation = nullptr);
Expr binop(BinaryOperator op, Expr lhs, Expr rhs);
Expr unop(UnaryOperator op, Expr operand);
Expr tuple(std::vector<Expr> elements);
Expr unit();
Expr proj(Expr tuple, std::size_t index);
Expr if_(Expr c, Expr t, Expr e);
Expr zero(Type t);
Expr grad(Expr fn);
Expr ref_new(Expr init);
Expr ref_read(Expr ref);
Expr ref_write(Expr ref, Expr value);
Expr fn(std::vector<Param> params, Type ret, Expr body);
}  // namespace ir

// ---------------------------------------------------------------------------
// Programs
// ---------------------------------------------------------------------------

struct OperatorDecl {
  std::string name;
  Type type;
  Span span;
};

struct Definition {
  std::string name;
  std::vector<Param> params;
  Type ret;
  Expr body;
  Span span;

  /*! (T1 x ... x Tn) -> T' */
  Type type() const;
};

using Item = std::variant<OperatorDecl, Definition>;

const std::string& item_name(const Item& item);

class Program {
 public:
  Program() = default;

  /*! Appends an item; throws std::invalid_argument on a duplicate global name. */
  void add(Item item);
  /*! Replaces the item with the same name. */
  void replace(Item item);

  const std::vector<Item>& items() const { return items_; }
  const Item* find(std::string_view name) const;
  const Definition* find_definition(std::string_view name) const;
  const OperatorDecl* find_operator(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

 private:
  std::vector<Item> items_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// ---------------------------------------------------------------------------
// Structural utilities
// ---------------------------------------------------------------------------

/*! Locals referenced but not bound by an enclosing binder; globals excluded. */
std::set<std::string> free_vars(const Expr& e);

std::set<std::string> free_type_vars(const Type& t);

/*! Capture-avoiding substitution of \p var by \p replacement. */
Type subst_type(const Type& t, const std::string& var, const Type& replacement);

/*! Equality up to consistent renaming of bound variables. */
bool alpha_equal(const Type& a, const Type& b);
bool alpha_equal(const Expr& a, const Expr& b);
bool alpha_equal(const Program& a, const Program& b);

/*! Exact equality, binder names included. Spans are ignored. */
bool structurally_equal(const Type& a, const Type& b);
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Program& a, const Program& b);

/*! Every local, global and type identifier mentioned anywhere in the program. */
std::set<std::string> all_names(const Program& p);
void collect_names(const Expr& e, std::set<std::string>& out);

/*! Direct subexpressions, left to right. */
std::vector<Expr> children(const Expr& e);

/*!
 * Copy of \p e with each direct child replaced by \p f(child) and, when
 * \p g is given, each type annotation by \p g(type). The span is kept.
 */
Expr map_children(const Expr& e, const std::function<Expr(const Expr&)>& f,
                  const std::function<Type(const Type&)>& g = {});

/*! Global names referenced anywhere in \p e. */
std::set<std::string> referenced_globals(const Expr& e);

bool contains_grad(const Expr& e);
bool contains_ref_forms(const Expr& e);
bool contains_ref_forms(const Program& p);

}  // namespace gradir
