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
 * \file gradir/syntax.hpp
 * \brief Lexer and recursive-descent parser for `.rly` source.
 *
 * Lexical conventions: globals are `@name`, locals are bare identifiers,
 * type variables are bare capitalized identifiers, `//` starts a line
 * comment. Float literals need a decimal point and may carry an `f32` or
 * `f64` suffix (unsuffixed literals are 32-bit).
 *
 * Precedence, loosest to tightest: `:=` (right), comparisons
 * (non-associative), `+ -` (left), `* /` (left), prefix `- sq ! Ref Grad
 * Zero` and casts, then call and projection suffixes. `let`, `if` and
 * `fn` extend as far right as possible.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gradir/ast.hpp"

namespace gradir {

enum class TokenKind { Keyword, Symbol, Int, Float, Ident, Global, End };

struct Token {
  TokenKind kind;
  std::string text;
  Span span;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, Span span, std::vector<std::string> expected = {});

  const std::string& message() const { return message_; }
  const Span& span() const { return span_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::string message_;
  Span span_;
  std::vector<std::string> expected_;
};

/*! Thrown by parse_program with every per-item error it collected. */
class ParseFailure : public std::runtime_error {
 public:
  explicit ParseFailure(std::vector<ParseError> errors);
  const std::vector<ParseError>& errors() const { return errors_; }

 private:
  std::vector<ParseError> errors_;
};

struct ParseOptions {
  /*! Admit Ref, `!`, `:=`, RefType and `fn`, which only generated code may use. */
  bool internal = false;
};

/*! The final token is always of kind End. Throws ParseError. */
std::vector<Token> tokenize(std::string_view source);

bool is_reserved(std::string_view word);

Program parse_program(std::string_view source, ParseOptions options = {});
Expr parse_expr(std::string_view source, ParseOptions options = {});
Type parse_type(std::string_view source, ParseOptions options = {});

}  // namespace gradir
