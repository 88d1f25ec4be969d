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

#include "gradir/literal.hpp"
#include "gradir/syntax.hpp"

namespace {

using namespace gradir;

Type T(const char* s) { return parse_type(s); }

std::string round_trip(const char* text, const char* type) { return format_value(parse_value(text, T(type))); }

TEST(Literal, Scalars) {
  EXPECT_EQ(round_trip("3", "Tensor(IntType(32), Shape())"), "3");
  EXPECT_EQ(round_trip("-2.5", "Tensor(FloatType(64), Shape())"), "-2.5");
  EXPECT_EQ(round_trip("true", "Tensor(BoolType, Shape())"), "true");
  EXPECT_EQ(round_trip("False", "Tensor(BoolType, Shape())"), "false");
}

TEST(Literal, FloatsPrintShortest) {
  EXPECT_EQ(round_trip("9.0", "Tensor(FloatType(64), Shape())"), "9");
  EXPECT_EQ(round_trip("0.1", "Tensor(FloatType(32), Shape())"), "0.1");
  EXPECT_EQ(round_trip("0.1", "Tensor(FloatType(64), Shape())"), "0.1");
}

TEST(Literal, NestedTensors) {
  EXPECT_EQ(round_trip("[[1, 2, 3], [4, 5, 6]]", "Tensor(IntType(32), Shape(2, 3))"), "[[1, 2, 3], [4, 5, 6]]");
}

TEST(Literal, Tuples) {
  EXPECT_EQ(round_trip("(1.5, [2, 3])", "(Tensor(FloatType(64), Shape()), Tensor(UIntType(8), Shape(2)))"),
            "(1.5, [2, 3])");
  EXPECT_EQ(round_trip("()", "()"), "()");
}

TEST(Literal, RejectsShapeMismatch) {
  EXPECT_THROW(parse_value("[1, 2]", T("Tensor(IntType(32), Shape(3))")), LiteralError);
  EXPECT_THROW(parse_value("1", T("Tensor(IntType(32), Shape(1))")), LiteralError);
  EXPECT_THROW(parse_value("[[1], [2, 3]]", T("Tensor(IntType(32), Shape(2, 1))")), LiteralError);
}

TEST(Literal, RejectsOutOfRangeIntegers) {
  EXPECT_THROW(parse_value("256", T("Tensor(UIntType(8), Shape())")), LiteralError);
  EXPECT_THROW(parse_value("-1", T("Tensor(UIntType(8), Shape())")), LiteralError);
  EXPECT_THROW(parse_value("128", T("Tensor(IntType(8), Shape())")), LiteralError);
  EXPECT_NO_THROW(parse_value("-128", T("Tensor(IntType(8), Shape())")));
}

TEST(Literal, RejectsMalformedText) {
  EXPECT_THROW(parse_value("abc", T("Tensor(FloatType(32), Shape())")), LiteralError);
  EXPECT_THROW(parse_value("1.5", T("Tensor(IntType(32), Shape())")), LiteralError);
  EXPECT_THROW(parse_value("[1, 2", T("Tensor(IntType(32), Shape(2))")), LiteralError);
  EXPECT_THROW(parse_value("1 2", T("Tensor(IntType(32), Shape())")), LiteralError);
  EXPECT_THROW(parse_value("yes", T("Tensor(BoolType, Shape())")), LiteralError);
}

TEST(Literal, FunctionsHaveNoLiteralForm) {
  EXPECT_THROW(parse_value("1", T("(Tensor(IntType(32), Shape())) -> Tensor(IntType(32), Shape())")), LiteralError);
}

}  // namespace
