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

#include "gradir/literal.hpp"

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <limits>

#include "gradir/pretty.hpp"

namespace gradir {

namespace {

struct Lit {
  enum class Form { Atom, List, Tuple } form = Form::Atom;
  std::string atom;
  std::vector<Lit> items;
};

class LitParser {
 public:
  explicit LitParser(std::string_view s) : s_(s) {}

  Lit parse_all() {
    Lit l = parse();
    skip();
    if (pos_ != s_.size()) fail("trailing text");
    return l;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw LiteralError(what + " at offset " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  Lit parse() {
    skip();
    if (pos_ >= s_.size()) fail("expected a value");
    char c = s_[pos_];
    if (c == '[' || c == '(') {
      char close = c == '[' ? ']' : ')';
      ++pos_;
      Lit l;
      l.form = c == '[' ? Lit::Form::List : Lit::Form::Tuple;
      skip();
      if (pos_ < s_.size() && s_[pos_] == close) {
        ++pos_;
        if (l.form == Lit::Form::List) fail("empty list");
        return l;
      }
      for (;;) {
        l.items.push_back(parse());
        skip();
        if (pos_ < s_.size() && s_[pos_] == ',') {
          ++pos_;
          skip();
          if (l.form == Lit::Form::Tuple && pos_ < s_.size() && s_[pos_] == ')') {
            ++pos_;
            return l;
          }
          continue;
        }
        if (pos_ < s_.size() && s_[pos_] == close) {
          ++pos_;
          return l;
        }
        fail(std::string("expected ',' or '") + close + "'");
      }
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
           std::string_view("[](),").find(s_[pos_]) == std::string_view::npos)
      ++pos_;
    if (start == pos_) fail("unexpected character");
    Lit l;
    l.atom = std::string(s_.substr(start, pos_ - start));
    return l;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

struct Flat {
  std::vector<std::string> atoms;
};

void flatten(const Lit& l, const std::vector<std::int64_t>& dims, std::size_t depth, Flat& out) {
  if (l.form == Lit::Form::Tuple && l.items.size() == 1) return flatten(l.items[0], dims, depth, out);
  if (depth == dims.size()) {
    if (l.form != Lit::Form::Atom) throw LiteralError("expected a scalar at nesting depth " + std::to_string(depth));
    out.atoms.push_back(l.atom);
    return;
  }
  if (l.form != Lit::Form::List)
    throw LiteralError("expected a list of " + std::to_string(dims[depth]) + " elements at nesting depth " +
                       std::to_string(depth));
  if (static_cast<std::int64_t>(l.items.size()) != dims[depth])
    throw LiteralError("expected " + std::to_string(dims[depth]) + " elements at nesting depth " +
                       std::to_string(depth) + ", got " + std::to_string(l.items.size()));
  for (const auto& item : l.items) flatten(item, dims, depth + 1, out);
}

double to_double(const std::string& a) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(a.c_str(), &end);
  if (a.empty() || *end != '\0') throw LiteralError("'" + a + "' is not a number");
  return v;
}

TensorValue to_tensor(const Lit& l, const TensorInfo& info) {
  Flat flat;
  flatten(l, info.dims, 0, flat);
  const BaseType& b = info.base;
  switch (b.scalar) {
    case Scalar::Float: {
      std::vector<double> data;
      for (const auto& a : flat.atoms) data.push_back(to_double(a));
      return TensorValue::from_floats(std::move(data), info.dims, b.width);
    }
    case Scalar::Bool: {
      std::vector<std::int64_t> data;
      for (const auto& a : flat.atoms) {
        if (a == "true" || a == "True") {
          data.push_back(1);
        } else if (a == "false" || a == "False") {
          data.push_back(0);
        } else {
          throw LiteralError("'" + a + "' is not a boolean");
        }
      }
      return TensorValue{b, info.dims, std::move(data)};
    }
    case Scalar::Int: {
      std::vector<std::int64_t> data;
      std::int64_t hi = b.width >= 64 ? std::numeric_limits<std::int64_t>::max() : (std::int64_t{1} << (b.width - 1)) - 1;
      for (const auto& a : flat.atoms) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(a.data(), a.data() + a.size(), v);
        if (ec != std::errc() || p != a.data() + a.size()) throw LiteralError("'" + a + "' is not an integer");
        if (v > hi || v < -hi - 1) throw LiteralError("'" + a + "' is out of range for " + pretty(b));
        data.push_back(v);
      }
      return TensorValue{b, info.dims, std::move(data)};
    }
    case Scalar::UInt: {
      std::vector<std::uint64_t> data;
      std::uint64_t hi = b.width >= 64 ? std::numeric_limits<std::uint64_t>::max() : (std::uint64_t{1} << b.width) - 1;
      for (const auto& a : flat.atoms) {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(a.data(), a.data() + a.size(), v);
        if (ec != std::errc() || p != a.data() + a.size()) throw LiteralError("'" + a + "' is not an unsigned integer");
        if (v > hi) throw LiteralError("'" + a + "' is out of range for " + pretty(b));
        data.push_back(v);
      }
      return TensorValue{b, info.dims, std::move(data)};
    }
  }
  throw LiteralError("unsupported base type");
}

Value coerce(const Lit& l, const Type& type) {
  if (auto info = tensor_info(type)) return make_value(to_tensor(l, *info));
  if (auto* p = type->as<types::Product>()) {
    if (l.form != Lit::Form::Tuple) throw LiteralError("expected a tuple for " + pretty(type));
    if (l.items.size() != p->elements.size())
      throw LiteralError("expected " + std::to_string(p->elements.size()) + " tuple elements for " + pretty(type));
    std::vector<Value> elems;
    for (std::size_t i = 0; i < l.items.size(); ++i) elems.push_back(coerce(l.items[i], p->elements[i]));
    return make_tuple(std::move(elems));
  }
  throw LiteralError("values of type " + pretty(type) + " cannot be written as literals");
}

void format_tensor(const TensorValue& t, std::size_t dim, std::size_t& index, std::string& out) {
  if (dim == t.shape.size()) {
    out += format_scalar(t, index++);
    return;
  }
  out += '[';
  for (std::int64_t i = 0; i < t.shape[dim]; ++i) {
    if (i) out += ", ";
    format_tensor(t, dim + 1, index, out);
  }
  out += ']';
}

template <class T>
std::string chars(T v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

Value parse_value(std::string_view text, const Type& type) { return coerce(LitParser(text).parse_all(), type); }

std::string format_scalar(const TensorValue& t, std::size_t i) {
  switch (t.base.scalar) {
    case Scalar::Float: {
      double v = t.floats()[i];
      if (t.base.width == 32) return chars(static_cast<float>(v));
      return chars(v);
    }
    case Scalar::Bool:
      return t.ints()[i] ? "true" : "false";
    case Scalar::UInt:
      return std::to_string(t.uints()[i]);
    case Scalar::Int:
      return std::to_string(t.ints()[i]);
  }
  return "?";
}

std::string format_value(const Value& v) {
  return std::visit(overloaded{
                        [](const TensorValue& t) {
                          std::string out;
                          std::size_t index = 0;
                          format_tensor(t, 0, index, out);
                          return out;
                        },
                        [](const TupleValue& t) {
                          std::string out = "(";
                          for (std::size_t i = 0; i < t.elements.size(); ++i) {
                            if (i) out += ", ";
                            out += format_value(t.elements[i]);
                          }
                          return out + ")";
                        },
                        [](const ClosureValue&) { return std::string("<closure>"); },
                        [](const OperatorValue& o) { return "@" + o.name; },
                        [](const RefValue& r) { return "<ref " + std::to_string(r.address) + ">"; },
                    },
                    v->v);
}

}  // namespace gradir
