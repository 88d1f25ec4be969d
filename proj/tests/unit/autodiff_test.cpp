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

#include "gradir/autodiff.hpp"
#include "gradir/pretty.hpp"
#include "gradir/syntax.hpp"
#include "test_support.hpp"

namespace {

using namespace gradir;
using gradir::testing::builtins;

ParseOptions internal() {
  ParseOptions o;
  o.internal = true;
  return o;
}

Type T(const char* s) { return parse_type(s, internal()); }

constexpr const char* kS64 = "Tensor(FloatType(64), Shape())";

TEST(LiftType, TensorsBecomeValueAdjointPairs) {
  EXPECT_TRUE(alpha_equal(lift_type(T("Tensor(FloatType(32), Shape(2))")),
                          T("(Tensor(FloatType(32), Shape(2)), RefType(Tensor(FloatType(32), Shape(2))))")));
}

TEST(LiftType, StructuralOnProductsAndArrows) {
  Type lifted = lift_type(T("(Tensor(FloatType(64), Shape()), Tensor(IntType(32), Shape()))"));
  auto* p = lifted->as<types::Product>();
  ASSERT_NE(p, nullptr);
  ASSERT_EQ(p->elements.size(), 2u);
  EXPECT_NE(p->elements[0]->as<types::Product>(), nullptr);
  Type arrow = lift_type(T("(Tensor(FloatType(64), Shape())) -> Tensor(FloatType(64), Shape())"));
  auto* a = arrow->as<types::Arrow>();
  ASSERT_NE(a, nullptr);
  EXPECT_TRUE(alpha_equal(a->codomain, lift_type(T(kS64))));
}

TEST(GradientType, PairsValueWithTupleOfGradients) {
  Type g = gradient_type(T("(Tensor(FloatType(64), Shape()), Tensor(FloatType(64), Shape(3))) -> "
                           "Tensor(FloatType(64), Shape())"));
  EXPECT_EQ(pretty(g),
            "(Tensor(FloatType(64), Shape()), Tensor(FloatType(64), Shape(3))) -> (Tensor(FloatType(64), Shape()), "
            "(Tensor(FloatType(64), Shape()), Tensor(FloatType(64), Shape(3))))");
}

TEST(GradientType, RejectsNonScalarOrNonFloat) {
  EXPECT_THROW(gradient_type(T("(Tensor(FloatType(64), Shape())) -> Tensor(FloatType(64), Shape(2))")), AdError);
  EXPECT_THROW(gradient_type(T("(Tensor(IntType(32), Shape())) -> Tensor(FloatType(64), Shape())")), AdError);
  EXPECT_THROW(gradient_type(T("Tensor(FloatType(64), Shape())")), AdError);
}

TEST(AssertClosed, DetectsFreeVariables) {
  EXPECT_NO_THROW(assert_closed(parse_expr("fn(x : Tensor(FloatType(32), Shape())) -> Tensor(FloatType(32), Shape()) "
                                           "{ x }",
                                           internal())));
  EXPECT_THROW(assert_closed(parse_expr("fn(x : Tensor(FloatType(32), Shape())) -> Tensor(FloatType(32), Shape()) "
                                        "{ x * y }",
                                        internal())),
               AdError);
}

TEST(NameSupply, AvoidsTakenNames) {
  NameSupply names({"x", "x_1"});
  EXPECT_EQ(names.fresh("y"), "y");
  EXPECT_EQ(names.fresh("y"), "y_1");
  EXPECT_EQ(names.fresh("x"), "x_2");
}

TypedProgram elaborate_entry(const Program& p, const std::string& entry, std::string* name = nullptr) {
  auto [with_grad, n] = add_gradient_entry(p, entry);
  if (name) *name = n;
  return elaborate_program(check_program(with_grad, builtins()));
}

TEST(Elaborate, RemovesEveryGradAndRetypechecks) {
  for (const auto& file : gradir::testing::corpus_files()) {
    Program p = gradir::testing::load_program(file);
    TypedProgram tp = elaborate_program(check_program(p, builtins()));
    for (const auto& item : tp.program.items())
      if (const auto* d = std::get_if<Definition>(&item)) {
        EXPECT_FALSE(contains_grad(d->body)) << file << " @" << d->name;
      }
    EXPECT_NO_THROW(check_program(tp.program, builtins())) << file;
  }
}

TEST(Elaborate, AddsTransformedDefinitions) {
  Program p = gradir::testing::load_program(gradir::testing::corpus_dir() / "twice.rly");
  std::string name;
  TypedProgram tp = elaborate_entry(p, "quartic", &name);
  EXPECT_EQ(name, "quartic__grad");
  for (const char* def : {"quartic__ad", "twice__ad", "square__ad"})
    EXPECT_NE(tp.program.find_definition(def), nullptr) << def;
  EXPECT_TRUE(alpha_equal(tp.globals.at(name), gradient_type(tp.globals.at("quartic"))));
}

TEST(Elaborate, ResultIsValidInternalSource) {
  Program p = gradir::testing::load_program(gradir::testing::corpus_dir() / "mlp.rly");
  TypedProgram tp = elaborate_entry(p, "net");
  Program reparsed = parse_program(pretty(tp.program), internal());
  EXPECT_TRUE(alpha_equal(reparsed, tp.program));
  EXPECT_NO_THROW(check_program(reparsed, builtins()));
}

TEST(Elaborate, NestedGradient) {
  Program p = gradir::testing::load_program(gradir::testing::corpus_dir() / "cube.rly");
  TypedProgram tp = elaborate_entry(p, "dcube");
  Value v = evaluate(tp, "dcube__grad", {make_value(TensorValue::scalar(2.0))});
  auto slots = gradir::testing::gradient_slots(v);
  EXPECT_DOUBLE_EQ(slots[0][0], 12.0);
}

TEST(Elaborate, GradOfFunctionLiteral) {
  Program p = gradir::testing::load_program(gradir::testing::corpus_dir() / "refs.internal.rly");
  TypedProgram tp = check_program(p, builtins());
  Value v = evaluate(tp, "closure", {make_value(TensorValue::scalar(3.0))});
  EXPECT_DOUBLE_EQ(v->as<TensorValue>()->floats()[0], 7.0);
}

TEST(Elaborate, ComputedTensorLiteralUnsupported) {
  Program p = parse_program(std::string("def @f(x : ") + kS64 + ") -> " + kS64 + " { @sum([x, x]) }\n");
  EXPECT_THROW(elaborate_entry(p, "f"), AdError);
}

TEST(Elaborate, ConstantTensorLiteralSupported) {
  Program p = parse_program(std::string("def @f(x : ") + kS64 + ") -> " + kS64 +
                            " { x * @dot([1.0f64, 2.0f64], [3.0f64, 4.0f64]) }\n");
  TypedProgram tp = elaborate_entry(p, "f");
  auto slots = gradir::testing::gradient_slots(evaluate(tp, "f__grad", {make_value(TensorValue::scalar(1.0))}));
  EXPECT_DOUBLE_EQ(slots[0][0], 11.0);
}

TEST(Elaborate, UserNamesDoNotCollideWithGeneratedNames) {
  Program p = parse_program(std::string("def @f(bp : ") + kS64 + ", old : " + kS64 + ") -> " + kS64 +
                            " { let g = bp * old in let r = g + bp in r }\n");
  TypedProgram tp = elaborate_entry(p, "f");
  auto slots = gradir::testing::gradient_slots(
      evaluate(tp, "f__grad", {make_value(TensorValue::scalar(2.0)), make_value(TensorValue::scalar(5.0))}));
  EXPECT_DOUBLE_EQ(slots[0][0], 6.0);
  EXPECT_DOUBLE_EQ(slots[1][0], 2.0);
}

TEST(Registry, CustomOperatorWithAdjointDifferentiates) {
  Registry r = Registry::with_builtins();
  r.register_operator({"triple", T("(Tensor(FloatType(64), Shape())) -> Tensor(FloatType(64), Shape())"),
                       [](std::span<const Value> args) {
                         return make_value(TensorValue::scalar(3.0 * args[0]->as<TensorValue>()->floats()[0]));
                       },
                       [](const AdjointInputs& in) {
                         return std::vector<Expr>{accumulate(
                             in.arg_adjoints[0],
                             ir::binop(BinaryOperator::Mul, in.result_adjoint, ir::float_lit(3.0, 64)))};
                       }});
  Program p = parse_program(std::string("def @f(x : ") + kS64 + ") -> " + kS64 + " { x * @triple(x) }\n");
  auto [with_grad, name] = add_gradient_entry(p, "f");
  TypedProgram tp = check_program(with_grad, r);
  auto slots = gradir::testing::gradient_slots(evaluate(tp, name, {make_value(TensorValue::scalar(2.0))}));
  EXPECT_DOUBLE_EQ(slots[0][0], 12.0);
}

TEST(Registry, OperatorWithoutAdjointCannotBeDifferentiated) {
  Registry r = Registry::with_builtins();
  r.register_operator({"opaque", T("(Tensor(FloatType(64), Shape())) -> Tensor(FloatType(64), Shape())"),
                       [](std::span<const Value> args) { return args[0]; }, std::nullopt});
  Program p = parse_program(std::string("def @f(x : ") + kS64 + ") -> " + kS64 + " { @opaque(x) }\n");
  auto [with_grad, name] = add_gradient_entry(p, "f");
  EXPECT_ANY_THROW(elaborate_program(check_program(with_grad, r)));
}

TEST(Registry, DuplicateAndIllKindedRegistrationsRejected) {
  Registry r = Registry::with_builtins();
  auto eval = [](std::span<const Value> args) { return args[0]; };
  EXPECT_THROW(r.register_operator({"sum", T(kS64), eval, std::nullopt}), std::invalid_argument);
  EXPECT_THROW(r.register_operator({"bad", T("Shape(2)"), eval, std::nullopt}), std::invalid_argument);
}

}  // namespace
