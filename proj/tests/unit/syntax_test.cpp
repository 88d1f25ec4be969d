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

#include "gradir/json_codec.hpp"
#include "gradir/pretty.hpp"
#include "gradir/syntax.hpp"
#include "test_support.hpp"

namespace {

using namespace gradir;

ParseOptions internal() {
  ParseOptions o;
  o.internal = true;
  return o;
}

/*! Runs \p f and returns the first parse diagnostic, or nullopt if it parsed. */
template <class F>
std::optional<ParseError> parse_error(F f) {
  try {
    f();
  } catch (const ParseFailure& e) {
    return e.errors().front();
  } catch (const ParseError& e) {
    return e;
  }
  return std::nullopt;
}

TEST(Tokenize, ClassifiesTokens) {
  auto toks = tokenize("def @f(x) { let y = 1.5f64 in y := 3 }");
  std::vector<TokenKind> kinds;
  for (const auto& t : toks) kinds.push_back(t.kind);
  ASSERT_GE(toks.size(), 5u);
  EXPECT_EQ(toks[0].kind, TokenKind::Keyword);
  EXPECT_EQ(toks[1].kind, TokenKind::Global);
  EXPECT_EQ(toks[1].text, "f");
  EXPECT_EQ(toks.back().kind, TokenKind::End);
  auto it = std::find_if(toks.begin(), toks.end(), [](const Token& t) { return t.kind == TokenKind::Float; });
  ASSERT_NE(it, toks.end());
  EXPECT_EQ(it->text, "1.5f64");
  auto assign = std::find_if(toks.begin(), toks.end(), [](const Token& t) { return t.text == ":="; });
  EXPECT_NE(assign, toks.end());
}

TEST(Tokenize, TracksLinesAndColumns) {
  auto toks = tokenize("x\n  + y");
  EXPECT_EQ(toks[1].span.line, 2u);
  EXPECT_EQ(toks[1].span.column, 3u);
}

TEST(Tokenize, SkipsComments) {
  auto toks = tokenize("// note\nx");
  EXPECT_EQ(toks.size(), 2u);
}

TEST(Tokenize, RejectsMalformedFloats) {
  EXPECT_THROW(tokenize("1."), ParseError);
  EXPECT_THROW(tokenize("1.0f16"), ParseError);
  EXPECT_THROW(tokenize("1.0e"), ParseError);
  EXPECT_THROW(tokenize("#"), ParseError);
}

TEST(Reserved, KeywordsAreReserved) {
  EXPECT_TRUE(is_reserved("let"));
  EXPECT_TRUE(is_reserved("Grad"));
  EXPECT_TRUE(is_reserved("sq"));
  EXPECT_FALSE(is_reserved("x"));
}

TEST(Precedence, MultiplicationBindsTighterThanAddition) {
  Expr e = parse_expr("1.0 + 2.0 * 3.0");
  auto* b = e->as<exprs::BinOp>();
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->op, BinaryOperator::Add);
  EXPECT_EQ(b->rhs->as<exprs::BinOp>()->op, BinaryOperator::Mul);
}

TEST(Precedence, ArithmeticIsLeftAssociative) {
  auto* b = parse_expr("a - b - c")->as<exprs::BinOp>();
  ASSERT_NE(b, nullptr);
  EXPECT_NE(b->lhs->as<exprs::BinOp>(), nullptr);
  EXPECT_NE(b->rhs->as<exprs::LocalVar>(), nullptr);
}

TEST(Precedence, ComparisonBindsLooserThanArithmetic) {
  auto* b = parse_expr("a + b < c * d")->as<exprs::BinOp>();
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->op, BinaryOperator::Lt);
}

TEST(Precedence, UnaryBindsTighterThanBinary) {
  auto* b = parse_expr("sq x + y")->as<exprs::BinOp>();
  ASSERT_NE(b, nullptr);
  EXPECT_NE(b->lhs->as<exprs::UnaryOp>(), nullptr);
}

TEST(Precedence, PostfixProjectionAndCall) {
  auto* p = parse_expr("(Grad @f)(x)[1][0]")->as<exprs::Projection>();
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->index, 0u);
  auto* inner = p->tuple->as<exprs::Projection>();
  ASSERT_NE(inner, nullptr);
  EXPECT_NE(inner->tuple->as<exprs::Call>(), nullptr);
}

TEST(Parse, LetAndIfExtendRight) {
  auto* l = parse_expr("let x = 1.0 in x + 1.0")->as<exprs::Let>();
  ASSERT_NE(l, nullptr);
  EXPECT_NE(l->body->as<exprs::BinOp>(), nullptr);
}

TEST(Parse, TupleForms) {
  EXPECT_EQ(parse_expr("()")->as<exprs::Tuple>()->elements.size(), 0u);
  EXPECT_EQ(parse_expr("(x,)")->as<exprs::Tuple>()->elements.size(), 1u);
  EXPECT_NE(parse_expr("(x)")->as<exprs::LocalVar>(), nullptr);
}

TEST(Parse, CastVersusParenthesizedExpression) {
  EXPECT_NE(parse_expr("(Tensor(FloatType(32), Shape())) x")->as<exprs::Cast>(), nullptr);
  EXPECT_NE(parse_expr("(x) - y")->as<exprs::BinOp>(), nullptr);
}

TEST(Parse, OneProductTypeSpellings) {
  Type a = parse_type("(Tensor(FloatType(32), Shape()))");
  Type b = parse_type("(Tensor(FloatType(32), Shape()),)");
  EXPECT_TRUE(alpha_equal(a, b));
  ASSERT_NE(a->as<types::Product>(), nullptr);
}

TEST(Parse, ZeroDimensionRejected) {
  auto err = parse_error([] { parse_type("Tensor(FloatType(32), Shape(2, 0))"); });
  ASSERT_TRUE(err);
}

TEST(Parse, UserCodeCannotUseInternalForms) {
  for (const char* src : {"Ref 1.0", "!r", "r := 1.0", "fn() -> () { () }"}) {
    auto err = parse_error([&] { parse_expr(src); });
    ASSERT_TRUE(err) << src;
    EXPECT_NE(err->message().find("internal"), std::string::npos) << src;
    EXPECT_NO_THROW(parse_expr(src, internal())) << src;
  }
  EXPECT_TRUE(parse_error([] { parse_type("RefType(Tensor(FloatType(32), Shape()))"); }));
}

TEST(Parse, ErrorsCarryPositions) {
  auto err = parse_error([] { parse_program("def @f() -> () {\n  let = 1 in ()\n}\n"); });
  ASSERT_TRUE(err);
  EXPECT_EQ(err->span().line, 2u);
}

TEST(Parse, DuplicateDefinitionIsAnError) {
  EXPECT_TRUE(parse_error([] { parse_program("def @f() -> () { () }\ndef @f() -> () { () }\n"); }));
}

TEST(Parse, TrailingInputRejected) { EXPECT_TRUE(parse_error([] { parse_expr("x y"); })); }

TEST(Json, EncodesSchemaVersionAndNodes) {
  Program p = parse_program("def @f(x : Tensor(FloatType(64), Shape())) -> Tensor(FloatType(64), Shape()) { sq x }\n");
  auto j = encode_json(p);
  EXPECT_NE(j.find("\"v\":1"), std::string::npos);
  EXPECT_NE(j.find("\"node\":\"UnaryOp\""), std::string::npos);
  EXPECT_TRUE(structurally_equal(decode_json(j), p));
}

TEST(Json, ExpressionAndTypeRoundTrip) {
  Expr e = parse_expr("let t = (1.5f64, [True, False]) in if t[1] = t[1] then !(Ref 2) else 3", internal());
  EXPECT_TRUE(structurally_equal(decode_json_expr(encode_json(e)), e));
  Type t = parse_type("forall (S : Shape), (Tensor(IntType(8), S), RefType(())) -> Tensor(UIntType(16), S)", internal());
  EXPECT_TRUE(structurally_equal(decode_json_type(encode_json(t)), t));
}

TEST(Json, RejectsUnknownNode) {
  EXPECT_THROW(decode_json_expr(R"({"node":"Bogus"})"), ParseError);
}

TEST(Json, RejectsZeroDimension) {
  EXPECT_THROW(decode_json_type(R"({"node":"Shape","dims":[2,0]})"), ParseError);
}

TEST(Json, RejectsMalformedText) {
  EXPECT_THROW(decode_json("{"), ParseError);
  EXPECT_THROW(decode_json(R"({"v":99,"items":[]})"), ParseError);
}

TEST(Corpus, EveryFileRoundTrips) {
  for (const auto& file : gradir::testing::corpus_files()) {
    Program p = gradir::testing::load_program(file);
    EXPECT_TRUE(alpha_equal(parse_program(pretty(p), internal()), p)) << file;
    EXPECT_TRUE(structurally_equal(decode_json(encode_json(p)), p)) << file;
  }
}

}  // namespace
