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

#include <cmath>

#include "gradir/eval.hpp"
#include "gradir/literal.hpp"
#include "gradir/syntax.hpp"
#include "test_support.hpp"

namespace {

using namespace gradir;
using gradir::testing::builtins;
using gradir::testing::corpus_dir;
using gradir::testing::load_program;

ParseOptions internal() {
  ParseOptions o;
  o.internal = true;
  return o;
}

Value run_expr(const char* src, EvalOptions opts = {}) {
  Program empty;
  TypedProgram tp = check_program(empty, builtins());
  Interpreter interp(tp, std::move(opts));
  return interp.eval(parse_expr(src, internal()));
}

std::string show(const char* src) { return format_value(run_expr(src)); }

Value run(const char* file, const char* entry, std::vector<std::string> args, EvalOptions opts = {}) {
  Program p = load_program(corpus_dir() / file);
  TypedProgram tp = check_program(p, builtins());
  return evaluate(tp, entry, gradir::testing::parse_args(*p.find_definition(entry), args), opts);
}

double scalar(const Value& v) { return v->as<TensorValue>()->as_double(0); }

TEST(Primops, ElementwiseArithmetic) {
  EXPECT_EQ(show("[1, 2, 3] * [4, 5, 6]"), "[4, 10, 18]");
  EXPECT_EQ(show("[1.5f64, 2.0f64] - [0.5f64, 4.0f64]"), "[1, -2]");
  EXPECT_EQ(show("- [1, -2]"), "[-1, 2]");
  EXPECT_EQ(show("sq [3, -4]"), "[9, 16]");
  EXPECT_EQ(show("[1.0, 5.0] < [2.0, 5.0]"), "[true, false]");
  EXPECT_EQ(show("[1, 5] = [2, 5]"), "[false, true]");
}

TEST(Primops, IntegerDivisionTruncates) {
  EXPECT_EQ(show("7 / 2"), "3");
  EXPECT_EQ(show("-7 / 2"), "-3");
}

TEST(Primops, Float32ResultsAreRounded) {
  float expected = 0.1f + 0.2f;
  EXPECT_EQ(scalar(run_expr("0.1 + 0.2")), static_cast<double>(expected));
  EXPECT_NE(scalar(run_expr("0.1f64 + 0.2f64")), static_cast<double>(expected));
}

TEST(Primops, FloatDivisionByZeroIsInfinite) { EXPECT_TRUE(std::isinf(scalar(run_expr("1.0f64 / 0.0f64")))); }

TEST(Primops, IntegerDivisionByZeroFails) {
  try {
    run_expr("1 / 0");
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_NE(std::string(e.what()).find("division by zero"), std::string::npos);
  }
}

TEST(Primops, IntegerOverflowFails) {
  EXPECT_THROW(run_expr("2147483647 + 1"), EvalError);
  EXPECT_THROW(run_expr("(Tensor(IntType(32), Shape())) 65536 * 65536"), EvalError);
  EXPECT_EQ(show("2147483646 + 1"), "2147483647");
}

TEST(Primops, UnsignedUnderflowFails) {
  Program p = load_program(corpus_dir() / "casts.rly");
  EXPECT_NO_THROW(check_program(p, builtins()));
  TensorValue a{BaseType::UInt(8), {}, std::vector<std::uint64_t>{1}};
  TensorValue b{BaseType::UInt(8), {}, std::vector<std::uint64_t>{2}};
  EXPECT_THROW(eval_primop(BinaryOperator::Sub, a, b), EvalError);
  TensorValue c{BaseType::UInt(8), {}, std::vector<std::uint64_t>{200}};
  EXPECT_THROW(eval_primop(BinaryOperator::Add, c, c), EvalError);
}

TEST(Primops, MismatchedOperandsFail) {
  EXPECT_THROW(eval_primop(BinaryOperator::Add, TensorValue::scalar(1.0), TensorValue::from_floats({1.0, 2.0}, {2})),
               EvalError);
}

TEST(Eval, LetTuplesAndProjections) {
  EXPECT_EQ(show("let t = (1, (2.5f64, True)) in t[1][0]"), "2.5");
  EXPECT_EQ(show("()"), "()");
  EXPECT_EQ(show("(1,)"), "(1)");
}

TEST(Eval, IfEvaluatesOnlyTakenBranch) { EXPECT_EQ(show("if 1 < 2 then 10 else 1 / 0"), "10"); }

TEST(Eval, ZeroBuildsZeros) { EXPECT_EQ(show("Zero Tensor(FloatType(32), Shape(2, 2))"), "[[0, 0], [0, 0]]"); }

TEST(Eval, References) {
  EXPECT_EQ(show("let r = Ref 1 in let u = r := !r + 41 in !r"), "42");
  Program empty;
  TypedProgram tp = check_program(empty, builtins());
  Interpreter interp(tp);
  interp.eval(parse_expr("let a = Ref 1 in let b = Ref 2 in !a", internal()));
  EXPECT_EQ(interp.store().size(), 2u);
}

TEST(Eval, ClosuresCaptureEnvironment) {
  EXPECT_EQ(show("let k = 5 in let f = fn(x : Tensor(IntType(32), Shape())) -> Tensor(IntType(32), Shape()) "
                 "{ x + k } in let k = 100 in f(1)"),
            "6");
}

TEST(Eval, OperatorsAsValues) {
  EXPECT_EQ(show("@sum([1, 2, 3])"), "6");
  EXPECT_EQ(show("@dot([1.0f64, 2.0f64], [3.0f64, 4.0f64])"), "11");
  EXPECT_EQ(show("@broadcast(2, [[0, 0], [0, 0]])"), "[[2, 2], [2, 2]]");
}

TEST(Corpus, RecursionMatchesOracle) {
  std::int64_t fact = 1;
  for (int i = 2; i <= 10; ++i) fact *= i;
  EXPECT_EQ(scalar(run("fact.rly", "fact", {"10"})), static_cast<double>(fact));
  int steps = 0;
  for (std::int64_t n = 27; n != 1; n = n % 2 ? 3 * n + 1 : n / 2) ++steps;
  EXPECT_EQ(scalar(run("fact.rly", "collatz", {"27", "0"})), steps);
  EXPECT_DOUBLE_EQ(scalar(run("pow.rly", "pow", {"2.0", "10"})), std::pow(2.0, 10));
}

TEST(Corpus, HigherOrderDefinitions) {
  double x = 2.0;
  EXPECT_DOUBLE_EQ(scalar(run("twice.rly", "quartic", {"2.0"})), (x * x) * (x * x));
}

TEST(Corpus, BranchTakesBothSides) {
  EXPECT_DOUBLE_EQ(scalar(run("branch.rly", "f", {"-3.0"})), 3.0);
  EXPECT_DOUBLE_EQ(scalar(run("branch.rly", "f", {"1.5"})), 2.25);
}

TEST(Corpus, LinearModelLoss) {
  std::vector<double> w{1, 2, 3}, x{0.5, -1, 2};
  double pred = 0, penalty = 0;
  for (int i = 0; i < 3; ++i) {
    pred += w[i] * x[i];
    penalty += w[i] * w[i];
  }
  double loss = (pred - 1) * (pred - 1) + 0.5 * penalty;
  EXPECT_DOUBLE_EQ(scalar(run("poly.rly", "loss", {"[1.0, 2.0, 3.0]", "[0.5, -1.0, 2.0]"})), loss);
}

TEST(Limits, DepthLimitStopsRunawayRecursion) {
  Program p = parse_program(
      "def @loop(n : Tensor(IntType(32), Shape())) -> Tensor(IntType(32), Shape()) { @loop(n) }\n");
  TypedProgram tp = check_program(p, builtins());
  EvalOptions opts;
  opts.max_depth = 50;
  try {
    evaluate(tp, "loop", {make_value(TensorValue{BaseType::Int(32), {}, std::vector<std::int64_t>{1}})}, opts);
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_NE(std::string(e.what()).find("recursion depth exceeded"), std::string::npos);
  }
}

TEST(Limits, DefaultDepthSupportsDeepRecursion) {
  // fact recurses once per step; 5000 frames stay under the default limit.
  Program p = parse_program(
      "def @down(n : Tensor(IntType(32), Shape())) -> Tensor(IntType(32), Shape()) "
      "{ if n = 0 then 0 else @down(n - 1) }\n");
  TypedProgram tp = check_program(p, builtins());
  EXPECT_EQ(format_value(evaluate(tp, "down", {make_value(TensorValue{BaseType::Int(32), {}, std::vector<std::int64_t>{5000}})})),
            "0");
}

TEST(Limits, UnregisteredOperatorFailsAtRuntime) {
  Program p = parse_program(
      "operator @mystery : (Tensor(FloatType(32), Shape())) -> Tensor(FloatType(32), Shape())\n"
      "def @m() -> Tensor(FloatType(32), Shape()) { @mystery(1.0) }\n");
  TypedProgram tp = check_program(p, builtins());
  try {
    evaluate(tp, "m", {});
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_NE(std::string(e.what()).find("@mystery"), std::string::npos);
  }
}

TEST(Compare, ReportsGapsToCallback) {
  double smallest = 1e9;
  EvalOptions opts;
  opts.on_compare = [&](double gap) { smallest = std::min(smallest, gap); };
  run_expr("if 1.25f64 < 1.5f64 then 1 else 2", opts);
  EXPECT_DOUBLE_EQ(smallest, 0.25);
}

TEST(FiniteDiff, MatchesIndependentCentralDifferences) {
  Program p = load_program(corpus_dir() / "poly.rly");
  TypedProgram tp = check_program(p, builtins());
  std::vector<TensorValue> point{TensorValue::from_floats({1, 2, 3}, {3}), TensorValue::from_floats({0.5, -1, 2}, {3})};
  auto fd = finite_diff(tp, "loss", point, 1e-4);
  auto oracle = gradir::testing::central_differences(tp, "loss", point, 1e-4);
  ASSERT_EQ(fd.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(fd[i].floats()[j], oracle[i][j], 1e-9);
}

TEST(FiniteDiff, WidensSinglePrecisionPrograms) {
  Program p = parse_program(
      "def @f(x : Tensor(FloatType(32), Shape())) -> Tensor(FloatType(32), Shape()) { x * x * x }\n");
  TypedProgram tp = check_program(p, builtins());
  auto fd = finite_diff(tp, "f", {TensorValue::scalar(2.0, 32)}, 1e-4);
  // 3x^2 at 2; in single precision the step would be lost in rounding.
  EXPECT_NEAR(fd[0].floats()[0], 12.0, 1e-6);
  Program wide = widen_floats(p);
  EXPECT_EQ(format_value(evaluate(check_program(wide, builtins()), "f", {make_value(TensorValue::scalar(0.1, 64))})),
            format_value(make_value(TensorValue::scalar(0.1 * 0.1 * 0.1, 64))));
}

TEST(Store, RefFreeCorpusRunsAllocateNothing) {
  for (const auto& c : gradir::testing::load_manifest()) {
    Program p = load_program(corpus_dir() / c.file);
    if (contains_ref_forms(p)) continue;
    bool grad = false;
    for (const auto& item : p.items())
      if (const auto* d = std::get_if<Definition>(&item); d && contains_grad(d->body)) grad = true;
    if (grad) continue;
    Interpreter interp(check_program(p, builtins()));
    interp.call(c.entry, gradir::testing::parse_args(*p.find_definition(c.entry), c.args));
    EXPECT_EQ(interp.store().size(), 0u) << c.file << " @" << c.entry;
  }
}

}  // namespace
