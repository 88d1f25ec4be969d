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

#include <gtest/gtest.h>

#include "gradir/ast.hpp"
#include "gradir/pretty.hpp"
#include "gradir/syntax.hpp"

namespace {

using namespace gradir;

ParseOptions internal() {
  ParseOptions o;
  o.internal = true;
  return o;
}

Expr E(const char* s) { return parse_expr(s, internal()); }
Type T(const char* s) { return parse_type(s, internal()); }

TEST(FreeVars, LetBindsOnlyInBody) {
  EXPECT_EQ(free_vars(E("let x = x + y in x * z")), (std::set<std::string>{"x", "y", "z"}));
  EXPECT_EQ(free_vars(E("let x = 1.0 in x")), std::set<std::string>{});
}

TEST(FreeVars, FunctionParametersAreBound) {
  EXPECT_EQ(free_vars(E("fn(a : Tensor(FloatType(32), Shape())) -> Tensor(FloatType(32), Shape()) { a + b }")),
            std::set<std::string>{"b"});
}

TEST(FreeVars, GlobalsAreNotFree) { EXPECT_TRUE(free_vars(E("@f(1.0)")).empty()); }

TEST(FreeTypeVars, ForallBinds) {
  EXPECT_EQ(free_type_vars(T("forall (S : Shape), (Tensor(B, S)) -> Tensor(B, Shape())")),
            std::set<std::string>{"B"});
}

TEST(SubstType, ReplacesFreeOccurrences) {
  Type t = subst_type(T("Tensor(FloatType(32), S)"), "S", shape_type({2, 3}));
  EXPECT_TRUE(alpha_equal(t, T("Tensor(FloatType(32), Shape(2, 3))")));
}

TEST(SubstType, StopsAtShadowingBinder) {
  Type t = T("forall (S : Shape), Tensor(FloatType(32), S)");
  EXPECT_TRUE(alpha_equal(subst_type(t, "S", shape_type({4})), t));
}

TEST(SubstType, AvoidsCapture) {
  // [B := T] under a binder named T must rename the binder.
  Type t = T("forall (T : Shape), Tensor(B, T)");
  Type r = subst_type(t, "B", type_var("T"));
  auto* f = r->as<types::Forall>();
  ASSERT_NE(f, nullptr);
  EXPECT_NE(f->var, "T");
  EXPECT_EQ(free_type_vars(r), std::set<std::string>{"T"});
}

TEST(AlphaEqual, RenamedBindersAreEqual) {
  EXPECT_TRUE(alpha_equal(E("let x = 1.0 in x + x"), E("let y = 1.0 in y + y")));
  EXPECT_TRUE(alpha_equal(T("forall (S : Shape), Tensor(FloatType(32), S)"),
                          T("forall (R : Shape), Tensor(FloatType(32), R)")));
  EXPECT_FALSE(structurally_equal(E("let x = 1.0 in x"), E("let y = 1.0 in y")));
}

TEST(AlphaEqual, DistinguishesFreeNames) {
  EXPECT_FALSE(alpha_equal(E("let x = 1.0 in y"), E("let z = 1.0 in z")));
  EXPECT_FALSE(alpha_equal(E("a"), E("b")));
}

TEST(AlphaEqual, DistinguishesLiteralWidths) { EXPECT_FALSE(alpha_equal(E("1.0"), E("1.0f64"))); }

TEST(Program, DuplicateNameThrows) {
  Program p = parse_program("def @f() -> () { () }\n");
  EXPECT_THROW(p.add(Definition{"f", {}, unit_type(), ir::unit(), {}}), std::invalid_argument);
}

TEST(Program, DefinitionTypeIsArrowOverProduct) {
  Program p = parse_program(
      "def @f(x : Tensor(FloatType(32), Shape()), n : Tensor(IntType(32), Shape())) -> Tensor(FloatType(32), Shape()) "
      "{ x }\n");
  EXPECT_TRUE(alpha_equal(p.find_definition("f")->type(),
                          T("(Tensor(FloatType(32), Shape()), Tensor(IntType(32), Shape())) -> "
                            "Tensor(FloatType(32), Shape())")));
}

TEST(Structure, MapChildrenVisitsEvaluationOrder) {
  Expr e = E("(a, b, c)");
  std::vector<std::string> order;
  map_children(e, [&](const Expr& c) {
    order.push_back(c->as<exprs::LocalVar>()->name);
    return c;
  });
  EXPECT_EQ(order, (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Structure, Queries) {
  EXPECT_TRUE(contains_grad(E("(Grad @f)(1.0)")));
  EXPECT_FALSE(contains_grad(E("@f(1.0)")));
  EXPECT_TRUE(contains_ref_forms(E("!(Ref 1.0)")));
  EXPECT_EQ(referenced_globals(E("@f(@g, 1.0)")), (std::set<std::string>{"f", "g"}));
}

TEST(TensorInfo, ReadsConcreteTensorTypes) {
  auto info = tensor_info(T("Tensor(IntType(8), Shape(2, 5))"));
  ASSERT_TRUE(info);
  EXPECT_EQ(info->base, BaseType::Int(8));
  EXPECT_EQ(info->dims, (std::vector<std::int64_t>{2, 5}));
  EXPECT_FALSE(tensor_info(T("(Tensor(IntType(8), Shape()))")));
  EXPECT_TRUE(is_float_tensor(T("Tensor(FloatType(64), Shape())")));
}

TEST(Pretty, PrintsTypes) {
  EXPECT_EQ(pretty(T("Tensor(FloatType(32), Shape(2, 3))")), "Tensor(FloatType(32), Shape(2, 3))");
  EXPECT_EQ(pretty(T("RefType(Tensor(BoolType, Shape()))")), "RefType(Tensor(BoolType, Shape()))");
  EXPECT_EQ(pretty(unit_type()), "()");
}

TEST(Pretty, ReparsesToAlphaEqualExpression) {
  for (const char* src : {"1.0 + 2.0 * 3.0", "(1.0 + 2.0) * 3.0", "- (x - y)", "sq sq x", "if x < y then x else y",
                          "let t : Tensor(FloatType(32), Shape()) = x in t[0]", "(x,)[0]", "@f(x)(y)",
                          "!r := 1.0", "fn() -> () { () }", "Zero Tensor(FloatType(64), Shape(3))",
                          "(Tensor(FloatType(32), Shape())) x", "[[1, 2], [3, 4]]", "x - (y - z)", "x / y / z"}) {
    Expr e = E(src);
    EXPECT_TRUE(alpha_equal(parse_expr(pretty(e), internal()), e)) << src << " printed as " << pretty(e);
  }
}

}  // namespace
