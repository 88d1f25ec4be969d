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

#include "gradir/syntax.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <limits>
#include <optional>

namespace gradir {

ParseError::ParseError(std::string message, Span span, std::vector<std::string> expected)
    : std::runtime_error(std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + message),
      message_(std::move(message)),
      span_(span),
      expected_(std::move(expected)) {}

ParseFailure::ParseFailure(std::vector<ParseError> errors)
    : std::runtime_error(errors.empty() ? "parse failed" : errors.front().what()),
      errors_(std::move(errors)) {}

namespace {

constexpr std::array<std::string_view, 22> kKeywords = {
    "def",   "operator", "let",   "in",      "if",        "then",      "else",  "True",
    "False", "Zero",     "Grad",  "Ref",     "forall",    "Tensor",    "Shape", "IntType",
    "UIntType", "FloatType", "BoolType", "RefType", "fn", "sq"};

// Longest first so that `:=` wins over `:` and so on.
constexpr std::array<std::string_view, 20> kSymbols = {
    "->", "!=", "<=", ">=", ":=", "(", ")", "[", "]", "{",
    "}",  ",",  ":",  "+",  "-",  "*", "/", "=", "<", ">"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      if (pos_ >= src_.size()) {
        out.push_back({TokenKind::End, "", span_from(pos_, line_, col_)});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  Span span_from(std::size_t begin, std::uint32_t line, std::uint32_t col) const {
    return Span{line, col, begin, pos_};
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t begin, std::uint32_t line, std::uint32_t col) {
    if (pos_ == begin && pos_ < src_.size()) advance();
    throw ParseError(msg, span_from(begin, line, col));
  }

  Token next() {
    std::size_t begin = pos_;
    auto line = line_;
    auto col = col_;
    char c = src_[pos_];

    if (digit(c)) return number(begin, line, col);

    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
      std::string text(src_.substr(begin, pos_ - begin));
      auto kind = is_reserved(text) ? TokenKind::Keyword : TokenKind::Ident;
      return {kind, std::move(text), span_from(begin, line, col)};
    }

    if (c == '@') {
      advance();
      if (pos_ >= src_.size() || !ident_start(src_[pos_]))
        fail("expected an identifier after '@'", begin, line, col);
      std::size_t name_begin = pos_;
      while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
      return {TokenKind::Global, std::string(src_.substr(name_begin, pos_ - name_begin)),
              span_from(begin, line, col)};
    }

    // `!` alone is dereference; `!=` is covered by the symbol table.
    for (auto sym : kSymbols) {
      if (src_.substr(pos_, sym.size()) == sym) {
        for (std::size_t i = 0; i < sym.size(); ++i) advance();
        return {TokenKind::Symbol, std::string(sym), span_from(begin, line, col)};
      }
    }
    if (c == '!') {
      advance();
      return {TokenKind::Symbol, "!", span_from(begin, line, col)};
    }
    fail(std::string("unknown character '") + c + "'", begin, line, col);
  }

  Token number(std::size_t begin, std::uint32_t line, std::uint32_t col) {
    while (pos_ < src_.size() && digit(src_[pos_])) advance();
    if (pos_ >= src_.size() || src_[pos_] != '.') {
      return {TokenKind::Int, std::string(src_.substr(begin, pos_ - begin)), span_from(begin, line, col)};
    }
    advance();  // '.'
    if (pos_ >= src_.size() || !digit(src_[pos_]))
      fail("unterminated float literal: digits must follow the decimal point", begin, line, col);
    while (pos_ < src_.size() && digit(src_[pos_])) advance();
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      if (pos_ >= src_.size() || !digit(src_[pos_])) fail("unterminated float literal exponent", begin, line, col);
      while (pos_ < src_.size() && digit(src_[pos_])) advance();
    }
    if (pos_ < src_.size() && src_[pos_] == 'f') {
      std::size_t suffix = pos_;
      advance();
      while (pos_ < src_.size() && digit(src_[pos_])) advance();
      auto s = src_.substr(suffix, pos_ - suffix);
      if (s != "f32" && s != "f64") fail("float literal suffix must be f32 or f64", begin, line, col);
    }
    return {TokenKind::Float, std::string(src_.substr(begin, pos_ - begin)), span_from(begin, line, col)};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t col_ = 1;
};

// Renames nested quantifiers that reuse a binder name already used in the type.
Type uniquify_foralls(const Type& t, std::set<std::string>& used, const std::set<std::string>& all) {
  return std::visit(
      overloaded{
          [&](const types::Tensor& x) -> Type {
            auto b = uniquify_foralls(x.base, used, all);
            return tensor_type(b, uniquify_foralls(x.shape, used, all), t->span);
          },
          [&](const types::Arrow& x) -> Type {
            auto d = uniquify_foralls(x.domain, used, all);
            return arrow_type(d, uniquify_foralls(x.codomain, used, all), t->span);
          },
          [&](const types::Forall& x) -> Type {
            std::string var = x.var;
            Type body = x.body;
            if (used.count(var)) {
              std::string fresh;
              for (int i = 1;; ++i) {
                fresh = x.var + std::to_string(i);
                if (!used.count(fresh) && !all.count(fresh)) break;
              }
              body = subst_type(body, var, type_var(fresh));
              var = fresh;
            }
            used.insert(var);
            return forall_type(var, x.kind, uniquify_foralls(body, used, all), t->span);
          },
          [&](const types::Ref& x) -> Type { return ref_type(uniquify_foralls(x.inner, used, all), t->span); },
          [&](const types::Product& x) -> Type {
            std::vector<Type> elems;
            for (auto& e : x.elements) elems.push_back(uniquify_foralls(e, used, all));
            return product_type(std::move(elems), t->span);
          },
          [&](const auto&) -> Type { return t; },
      },
      t->v);
}

void collect_all_type_names(const Type& t, std::set<std::string>& out) {
  std::visit(overloaded{
                 [&](const types::Var& v) { out.insert(v.name); },
                 [&](const types::Forall& f) {
                   out.insert(f.var);
                   collect_all_type_names(f.body, out);
                 },
                 [&](const types::Tensor& x) {
                   collect_all_type_names(x.base, out);
                   collect_all_type_names(x.shape, out);
                 },
                 [&](const types::Arrow& x) {
                   collect_all_type_names(x.domain, out);
                   collect_all_type_names(x.codomain, out);
                 },
                 [&](const types::Ref& x) { collect_all_type_names(x.inner, out); },
                 [&](const types::Product& x) {
                   for (auto& e : x.elements) collect_all_type_names(e, out);
                 },
                 [](const auto&) {},
             },
             t->v);
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, ParseOptions opts) : toks_(std::move(tokens)), opts_(opts) {}

  Program program() {
    Program prog;
    std::vector<ParseError> errors;
    while (!at_end()) {
      std::size_t start = pos_;
      try {
        Item item = this->item();
        try {
          prog.add(std::move(item));
        } catch (const std::invalid_argument&) {
          throw ParseError("duplicate global name @" + item_name(item), toks_[start].span);
        }
      } catch (const ParseError& e) {
        errors.push_back(e);
        // Resynchronize at the next item keyword.
        if (pos_ == start) ++pos_;
        while (!at_end() && !(is_kw("def") || is_kw("operator"))) ++pos_;
      }
    }
    if (!errors.empty()) throw ParseFailure(std::move(errors));
    return prog;
  }

  Expr whole_expr() {
    auto e = expr();
    expect_end();
    return e;
  }

  Type whole_type() {
    auto t = type();
    expect_end();
    return t;
  }

 private:
  // --- token helpers ------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at_end() const { return peek().kind == TokenKind::End; }
  bool is_kw(std::string_view w, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokenKind::Keyword && peek(ahead).text == w;
  }
  bool is_sym(std::string_view s, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokenKind::Symbol && peek(ahead).text == s;
  }
  bool accept(std::string_view s) {
    if (!is_sym(s)) return false;
    take();
    return true;
  }
  const Token& take() {
    const Token& t = toks_[pos_];
    if (t.kind != TokenKind::End) ++pos_;
    return t;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokenKind::End:
        return "end of input";
      case TokenKind::Global:
        return "'@" + t.text + "'";
      default:
        return "'" + t.text + "'";
    }
  }

  [[noreturn]] void unexpected(std::vector<std::string> expected) const {
    std::string msg = "expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) msg += (i ? " or " : "") + expected[i];
    msg += ", found " + describe(peek());
    throw ParseError(msg, peek().span, std::move(expected));
  }

  const Token& expect_sym(std::string_view s) {
    if (!is_sym(s)) unexpected({"'" + std::string(s) + "'"});
    return take();
  }
  const Token& expect_kw(std::string_view w) {
    if (!is_kw(w)) unexpected({"'" + std::string(w) + "'"});
    return take();
  }
  const Token& expect_kind(TokenKind k, std::string what) {
    if (peek().kind != k) unexpected({std::move(what)});
    return take();
  }
  void expect_end() {
    if (!at_end()) unexpected({"end of input"});
  }

  Span span_since(const Span& start) const {
    const Span& last = toks_[pos_ == 0 ? 0 : pos_ - 1].span;
    return Span{start.line, start.column, start.begin, std::max(start.begin, last.end)};
  }

  void require_internal(const Token& t, const char* what) const {
    if (!opts_.internal) throw ParseError(std::string(what) + " are internal and cannot appear in user code", t.span);
  }

  std::uint64_t natural(const Token& t) const {
    std::uint64_t v = 0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc()) throw ParseError("integer literal out of range", t.span);
    return v;
  }

  // --- items --------------------------------------------------------------

  Item item() {
    if (is_kw("operator")) {
      Span start = take().span;
      auto name = expect_kind(TokenKind::Global, "a global identifier").text;
      expect_sym(":");
      auto t = type();
      return OperatorDecl{std::move(name), std::move(t), span_since(start)};
    }
    if (is_kw("def")) {
      Span start = take().span;
      auto name = expect_kind(TokenKind::Global, "a global identifier").text;
      std::vector<Param> params;
      while (is_sym("(")) {
        auto group = param_list();
        params.insert(params.end(), group.begin(), group.end());
      }
      expect_sym("->");
      auto ret = type();
      expect_sym("{");
      auto body = expr();
      expect_sym("}");
      return Definition{std::move(name), std::move(params), std::move(ret), std::move(body), span_since(start)};
    }
    unexpected({"'def'", "'operator'"});
  }

  std::vector<Param> param_list() {
    expect_sym("(");
    std::vector<Param> params;
    if (!is_sym(")")) {
      do {
        auto name = expect_kind(TokenKind::Ident, "a parameter name").text;
        expect_sym(":");
        params.push_back({std::move(name), type()});
      } while (accept(","));
    }
    expect_sym(")");
    return params;
  }

  // --- types --------------------------------------------------------------

  Type type() {
    auto t = type_raw();
    std::set<std::string> all, used;
    collect_all_type_names(t, all);
    return uniquify_foralls(t, used, all);
  }

  Type type_raw() {
    Span start = peek().span;
    if (is_kw("forall")) {
      take();
      expect_sym("(");
      auto var = type_var_name();
      expect_sym(":");
      auto k = kind();
      expect_sym(")");
      expect_sym(",");
      auto body = type_raw();
      return forall_type(std::move(var), k, std::move(body), span_since(start));
    }
    auto lhs = type_atom();
    if (is_sym("->")) {
      take();
      auto rhs = type_raw();
      // A bare domain is the one-element product; calls are uncurried.
      if (!lhs->is<types::Product>()) lhs = product_type({lhs}, lhs->span);
      return arrow_type(std::move(lhs), std::move(rhs), span_since(start));
    }
    return lhs;
  }

  std::string type_var_name() {
    const auto& t = expect_kind(TokenKind::Ident, "a type variable");
    if (!std::isupper(static_cast<unsigned char>(t.text.front())))
      throw ParseError("type variables are capitalized identifiers, found '" + t.text + "'", t.span);
    return t.text;
  }

  Kind kind() {
    if (is_kw("Shape")) {
      take();
      return Kind::Shape;
    }
    if (peek().kind == TokenKind::Ident && peek().text == "BaseType") {
      take();
      return Kind::BaseType;
    }
    if (peek().kind == TokenKind::Ident && peek().text == "Type") {
      take();
      return Kind::Type;
    }
    unexpected({"'BaseType'", "'Shape'", "'Type'"});
  }

  unsigned width_arg() {
    expect_sym("(");
    const auto& tok = expect_kind(TokenKind::Int, "a bit width");
    auto w = natural(tok);
    if (w > std::numeric_limits<unsigned>::max()) throw ParseError("bit width out of range", tok.span);
    expect_sym(")");
    return static_cast<unsigned>(w);
  }

  Type type_atom() {
    Span start = peek().span;
    if (is_kw("IntType")) {
      take();
      return base_type(BaseType::Int(width_arg()), span_since(start));
    }
    if (is_kw("UIntType")) {
      take();
      return base_type(BaseType::UInt(width_arg()), span_since(start));
    }
    if (is_kw("FloatType")) {
      take();
      return base_type(BaseType::Float(width_arg()), span_since(start));
    }
    if (is_kw("BoolType")) {
      take();
      return base_type(BaseType::Bool(), span_since(start));
    }
    if (is_kw("Shape")) {
      take();
      expect_sym("(");
      std::vector<std::int64_t> dims;
      if (!is_sym(")")) {
        do {
          const auto& tok = expect_kind(TokenKind::Int, "a dimension");
          auto d = natural(tok);
          if (d == 0) throw ParseError("shape dimensions must be at least 1", tok.span);
          if (d > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
            throw ParseError("dimension out of range", tok.span);
          dims.push_back(static_cast<std::int64_t>(d));
        } while (accept(","));
      }
      expect_sym(")");
      return shape_type(std::move(dims), span_since(start));
    }
    if (is_kw("Tensor")) {
      take();
      expect_sym("(");
      auto b = type_raw();
      expect_sym(",");
      auto s = type_raw();
      expect_sym(")");
      return tensor_type(std::move(b), std::move(s), span_since(start));
    }
    if (is_kw("RefType")) {
      require_internal(peek(), "reference types");
      take();
      expect_sym("(");
      auto inner = type_raw();
      expect_sym(")");
      return ref_type(std::move(inner), span_since(start));
    }
    if (peek().kind == TokenKind::Ident) {
      auto name = type_var_name();
      return type_var(std::move(name), span_since(start));
    }
    if (is_sym("(")) {
      take();
      std::vector<Type> elems;
      // `(T)` and `(T,)` are both the one-element product.
      while (!is_sym(")")) {
        elems.push_back(type_raw());
        if (!accept(",")) break;
      }
      expect_sym(")");
      return product_type(std::move(elems), span_since(start));
    }
    unexpected({"a type"});
  }

  bool starts_type_keyword(std::size_t ahead) const {
    for (auto w : {"IntType", "UIntType", "FloatType", "BoolType", "Shape", "Tensor", "forall", "RefType"})
      if (is_kw(w, ahead)) return true;
    return false;
  }

  bool starts_expr(std::size_t ahead) const {
    const auto& t = peek(ahead);
    switch (t.kind) {
      case TokenKind::Int:
      case TokenKind::Float:
      case TokenKind::Ident:
      case TokenKind::Global:
        return true;
      case TokenKind::Keyword:
        for (auto w : {"True", "False", "let", "if", "fn", "Zero", "Grad", "Ref", "sq"})
          if (t.text == w) return true;
        return false;
      case TokenKind::Symbol:
        return t.text == "(" || t.text == "[" || t.text == "!" || t.text == "-";
      default:
        return false;
    }
  }

  // --- expressions --------------------------------------------------------

  Expr expr() { return assign(); }

  Expr assign() {
    auto lhs = comparison();
    if (is_sym(":=")) {
      require_internal(peek(), "reference operations");
      take();
      auto rhs = assign();
      Span sp = lhs->span;
      return ir::make(exprs::RefWrite{std::move(lhs), std::move(rhs)}, span_since(sp));
    }
    return lhs;
  }

  std::optional<BinaryOperator> comparison_op() const {
    if (is_sym("=")) return BinaryOperator::Eq;
    if (is_sym("!=")) return BinaryOperator::Ne;
    if (is_sym("<")) return BinaryOperator::Lt;
    if (is_sym("<=")) return BinaryOperator::Le;
    if (is_sym(">")) return BinaryOperator::Gt;
    if (is_sym(">=")) return BinaryOperator::Ge;
    return std::nullopt;
  }

  Expr comparison() {
    auto lhs = additive();
    if (auto op = comparison_op()) {
      take();
      auto rhs = additive();
      if (comparison_op()) throw ParseError("comparison operators do not associate; add parentheses", peek().span);
      Span sp = lhs->span;
      return ir::make(exprs::BinOp{*op, std::move(lhs), std::move(rhs)}, span_since(sp));
    }
    return lhs;
  }

  Expr additive() {
    auto lhs = multiplicative();
    while (is_sym("+") || is_sym("-")) {
      auto op = take().text == "+" ? BinaryOperator::Add : BinaryOperator::Sub;
      auto rhs = multiplicative();
      Span sp = lhs->span;
      lhs = ir::make(exprs::BinOp{op, std::move(lhs), std::move(rhs)}, span_since(sp));
    }
    return lhs;
  }

  Expr multiplicative() {
    auto lhs = prefix();
    while (is_sym("*") || is_sym("/")) {
      auto op = take().text == "*" ? BinaryOperator::Mul : BinaryOperator::Div;
      auto rhs = prefix();
      Span sp = lhs->span;
      lhs = ir::make(exprs::BinOp{op, std::move(lhs), std::move(rhs)}, span_since(sp));
    }
    return lhs;
  }

  Expr prefix() {
    Span start = peek().span;
    if (is_sym("-")) {
      take();
      // A minus directly before a numeric literal is part of the literal.
      if (peek().kind == TokenKind::Int || peek().kind == TokenKind::Float) {
        auto lit = literal(true, start);
        return postfix(std::move(lit));
      }
      auto operand = prefix();
      return ir::make(exprs::UnaryOp{UnaryOperator::Neg, std::move(operand)}, span_since(start));
    }
    if (is_kw("sq")) {
      take();
      auto operand = prefix();
      return ir::make(exprs::UnaryOp{UnaryOperator::Sq, std::move(operand)}, span_since(start));
    }
    if (is_sym("!")) {
      require_internal(peek(), "reference operations");
      take();
      auto operand = prefix();
      return ir::make(exprs::RefRead{std::move(operand)}, span_since(start));
    }
    if (is_kw("Ref")) {
      require_internal(peek(), "reference operations");
      take();
      auto operand = prefix();
      return ir::make(exprs::RefNew{std::move(operand)}, span_since(start));
    }
    if (is_kw("Grad")) {
      take();
      auto operand = prefix();
      return ir::make(exprs::Grad{std::move(operand)}, span_since(start));
    }
    if (is_kw("Zero")) {
      take();
      auto t = type();
      return ir::make(exprs::Zero{std::move(t)}, span_since(start));
    }
    if (is_sym("(") && cast_ahead()) {
      take();
      auto t = type();
      expect_sym(")");
      auto inner = prefix();
      return ir::make(exprs::Cast{std::move(t), std::move(inner)}, span_since(start));
    }
    return postfix(primary());
  }

  // `(T) e` is a cast when a type keyword follows the parenthesis. A nested
  // parenthesis is tried as a product type and kept only if `)` and an
  // expression follow.
  bool cast_ahead() {
    if (starts_type_keyword(1)) return true;
    if (!is_sym("(", 1)) return false;
    std::size_t saved = pos_;
    bool ok = false;
    try {
      ++pos_;
      type_raw();
      ok = is_sym(")") && starts_expr(1);
    } catch (const ParseError&) {
      ok = false;
    }
    pos_ = saved;
    return ok;
  }

  Expr postfix(Expr e) {
    while (true) {
      Span sp = e->span;
      if (is_sym("(")) {
        take();
        std::vector<Expr> args;
        if (!is_sym(")")) {
          do {
            args.push_back(expr());
          } while (accept(","));
        }
        expect_sym(")");
        e = ir::make(exprs::Call{std::move(e), std::move(args)}, span_since(sp));
      } else if (is_sym("[")) {
        take();
        const auto& tok = expect_kind(TokenKind::Int, "a projection index");
        auto idx = natural(tok);
        expect_sym("]");
        e = ir::make(exprs::Projection{std::move(e), static_cast<std::size_t>(idx)}, span_since(sp));
      } else {
        return e;
      }
    }
  }

  Expr literal(bool negate, Span start) {
    const Token& tok = take();
    if (tok.kind == TokenKind::Int) {
      auto v = natural(tok);
      constexpr auto max = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
      if (v > max + (negate ? 1u : 0u)) throw ParseError("integer literal out of range", tok.span);
      std::int64_t value = negate ? static_cast<std::int64_t>(0 - v) : static_cast<std::int64_t>(v);
      return ir::make(exprs::IntLit{value}, span_since(start));
    }
    std::string text = tok.text;
    unsigned width = 32;
    if (auto f = text.find('f'); f != std::string::npos) {
      width = text.substr(f) == "f64" ? 64 : 32;
      text.resize(f);
    }
    double v = std::strtod(text.c_str(), nullptr);
    return ir::make(exprs::FloatLit{negate ? -v : v, width}, span_since(start));
  }

  Expr primary() {
    Span start = peek().span;
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Int:
      case TokenKind::Float:
        return literal(false, start);
      case TokenKind::Ident:
        take();
        return ir::make(exprs::LocalVar{t.text}, t.span);
      case TokenKind::Global:
        take();
        return ir::make(exprs::GlobalVar{t.text}, t.span);
      default:
        break;
    }
    if (is_kw("True") || is_kw("False")) {
      bool v = take().text == "True";
      return ir::make(exprs::BoolLit{v}, start);
    }
    if (is_kw("let")) {
      take();
      auto binder = expect_kind(TokenKind::Ident, "a variable name").text;
      Type ann;
      if (is_sym(":")) {
        take();
        ann = type();
      }
      expect_sym("=");
      auto value = expr();
      expect_kw("in");
      auto body = expr();
      return ir::make(exprs::Let{std::move(binder), std::move(ann), std::move(value), std::move(body)},
                      span_since(start));
    }
    if (is_kw("if")) {
      take();
      auto c = expr();
      expect_kw("then");
      auto a = expr();
      expect_kw("else");
      auto b = expr();
      return ir::make(exprs::If{std::move(c), std::move(a), std::move(b)}, span_since(start));
    }
    if (is_kw("fn")) {
      require_internal(peek(), "anonymous functions");
      take();
      auto params = param_list();
      expect_sym("->");
      auto ret = type();
      expect_sym("{");
      auto body = expr();
      expect_sym("}");
      return ir::make(exprs::Function{std::move(params), std::move(ret), std::move(body)}, span_since(start));
    }
    if (is_sym("(")) {
      take();
      std::vector<Expr> elems;
      bool trailing_comma = false;
      if (!is_sym(")")) {
        elems.push_back(expr());
        while (is_sym(",")) {
          take();
          if (is_sym(")")) {
            trailing_comma = true;
            break;
          }
          elems.push_back(expr());
        }
      }
      expect_sym(")");
      if (elems.size() == 1 && !trailing_comma) return elems.front();
      return ir::make(exprs::Tuple{std::move(elems)}, span_since(start));
    }
    if (is_sym("[")) {
      take();
      std::vector<Expr> elems;
      do {
        elems.push_back(expr());
      } while (accept(","));
      expect_sym("]");
      return ir::make(exprs::TensorLit{std::move(elems)}, span_since(start));
    }
    unexpected({"an expression"});
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ParseOptions opts_;
};

}  // namespace

bool is_reserved(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

Program parse_program(std::string_view source, ParseOptions options) {
  std::vector<Token> toks;
  try {
    toks = tokenize(source);
  } catch (const ParseError& e) {
    throw ParseFailure({e});
  }
  return Parser(std::move(toks), options).program();
}

Expr parse_expr(std::string_view source, ParseOptions options) {
  return Parser(tokenize(source), options).whole_expr();
}

Type parse_type(std::string_view source, ParseOptions options) {
  return Parser(tokenize(source), options).whole_type();
}

}  // namespace gradir
