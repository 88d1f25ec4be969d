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

#include "gradir/pretty.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace gradir {

std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  auto e = s.find('e');
  std::string mantissa = s.substr(0, e);
  std::string exponent = e == std::string::npos ? "" : s.substr(e);
  if (mantissa.find('.') == std::string::npos) mantissa += ".0";
  return mantissa + exponent;
}

std::string pretty(Kind k) { return std::string(to_string(k)); }

std::string pretty(const BaseType& b) {
  switch (b.scalar) {
    case Scalar::Int:
      return "IntType(" + std::to_string(b.width) + ")";
    case Scalar::UInt:
      return "UIntType(" + std::to_string(b.width) + ")";
    case Scalar::Float:
      return "FloatType(" + std::to_string(b.width) + ")";
    case Scalar::Bool:
      return "BoolType";
  }
  return "?";
}

namespace {

void print_type(std::ostream& os, const Type& t) {
  std::visit(overloaded{
                 [&](const types::Base& b) { os << pretty(b.base); },
                 [&](const types::ShapeLit& s) {
                   os << "Shape(";
                   for (std::size_t i = 0; i < s.dims.size(); ++i) os << (i ? ", " : "") << s.dims[i];
                   os << ")";
                 },
                 [&](const types::Tensor& x) {
                   os << "Tensor(";
                   print_type(os, x.base);
                   os << ", ";
                   print_type(os, x.shape);
                   os << ")";
                 },
                 [&](const types::Arrow& x) {
                   print_type(os, x.domain);
                   os << " -> ";
                   print_type(os, x.codomain);
                 },
                 [&](const types::Var& v) { os << v.name; },
                 [&](const types::Forall& f) {
                   os << "forall (" << f.var << " : " << to_string(f.kind) << "), ";
                   print_type(os, f.body);
                 },
                 [&](const types::Ref& r) {
                   os << "RefType(";
                   print_type(os, r.inner);
                   os << ")";
                 },
                 [&](const types::Product& p) {
                   os << "(";
                   for (std::size_t i = 0; i < p.elements.size(); ++i) {
                     if (i) os << ", ";
                     print_type(os, p.elements[i]);
                   }
                   os << ")";
                 },
             },
             t->v);
}

// Binding strength, loosest first.
enum Level { kOpen = 0, kAssign = 1, kCompare = 2, kAdd = 3, kMul = 4, kPrefix = 5, kPostfix = 6, kAtom = 7 };

int level_of(const ExprNode& e) {
  return std::visit(overloaded{
                        [](const exprs::Let&) { return int(kOpen); },
                        [](const exprs::If&) { return int(kOpen); },
                        [](const exprs::Function&) { return int(kOpen); },
                        [](const exprs::RefWrite&) { return int(kAssign); },
                        [](const exprs::BinOp& b) {
                          if (is_comparison(b.op)) return int(kCompare);
                          if (b.op == BinaryOperator::Add || b.op == BinaryOperator::Sub) return int(kAdd);
                          return int(kMul);
                        },
                        [](const exprs::UnaryOp&) { return int(kPrefix); },
                        [](const exprs::Cast&) { return int(kPrefix); },
                        [](const exprs::Grad&) { return int(kPrefix); },
                        [](const exprs::Zero&) { return int(kPrefix); },
                        [](const exprs::RefNew&) { return int(kPrefix); },
                        [](const exprs::RefRead&) { return int(kPrefix); },
                        [](const exprs::Call&) { return int(kPostfix); },
                        [](const exprs::Projection&) { return int(kPostfix); },
                        [](const auto&) { return int(kAtom); },
                    },
                    e.v);
}

class ExprPrinter {
 public:
  explicit ExprPrinter(std::ostream& os) : os_(os) {}

  void print(const Expr& e, int ctx, int indent) {
    bool parens = level_of(*e) < ctx;
    if (parens) os_ << "(";
    print_bare(e, indent);
    if (parens) os_ << ")";
  }

 private:
  void newline(int indent) { os_ << "\n" << std::string(static_cast<std::size_t>(indent) * 2, ' '); }

  void list(const std::vector<Expr>& xs, int indent) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) os_ << ", ";
      print(xs[i], kOpen, indent);
    }
  }

  void print_bare(const Expr& e, int indent) {
    std::visit(
        overloaded{
            [&](const exprs::LocalVar& v) { os_ << v.name; },
            [&](const exprs::GlobalVar& v) { os_ << "@" << v.name; },
            [&](const exprs::IntLit& i) { os_ << i.value; },
            [&](const exprs::FloatLit& f) {
              os_ << format_float(f.value);
              if (f.width != 32) os_ << "f" << f.width;
            },
            [&](const exprs::BoolLit& b) { os_ << (b.value ? "True" : "False"); },
            [&](const exprs::Call& c) {
              print(c.callee, kPostfix, indent);
              os_ << "(";
              list(c.args, indent);
              os_ << ")";
            },
            [&](const exprs::Let& l) {
              os_ << "let " << l.binder;
              if (l.annotation) {
                os_ << " : ";
                print_type(os_, l.annotation);
              }
              os_ << " = ";
              print(l.value, kOpen, indent + 1);
              os_ << " in";
              newline(indent);
              print(l.body, kOpen, indent);
            },
            [&](const exprs::Cast& c) {
              os_ << "(";
              print_type(os_, c.target);
              os_ << ") ";
              print(c.inner, kPrefix, indent);
            },
            [&](const exprs::BinOp& b) {
              int lvl = level_of(*e);
              // Comparisons are non-associative; arithmetic associates left.
              int lhs_ctx = lvl == kCompare ? kAdd : lvl;
              print(b.lhs, lhs_ctx, indent);
              os_ << " " << to_string(b.op) << " ";
              print(b.rhs, lvl + 1, indent);
            },
            [&](const exprs::UnaryOp& u) {
              if (u.op == UnaryOperator::Sq) {
                os_ << "sq ";
                print(u.operand, kPrefix, indent);
                return;
              }
              os_ << "-";
              // A minus glued to a numeric literal reads back as a negative literal.
              bool literal = u.operand->is<exprs::IntLit>() || u.operand->is<exprs::FloatLit>();
              if (literal) {
                os_ << "(";
                print(u.operand, kOpen, indent);
                os_ << ")";
                return;
              }
              if (level_of(*u.operand) < kPrefix) {
                print(u.operand, kPrefix, indent);
                return;
              }
              std::ostringstream inner;
              ExprPrinter(inner).print(u.operand, kPrefix, indent);
              auto text = inner.str();
              if (!text.empty() && text.front() == '-') os_ << " ";
              os_ << text;
            },
            [&](const exprs::Tuple& t) {
              os_ << "(";
              list(t.elements, indent);
              if (t.elements.size() == 1) os_ << ",";
              os_ << ")";
            },
            [&](const exprs::Projection& p) {
              print(p.tuple, kPostfix, indent);
              os_ << "[" << p.index << "]";
            },
            [&](const exprs::TensorLit& t) {
              os_ << "[";
              list(t.elements, indent);
              os_ << "]";
            },
            [&](const exprs::If& i) {
              os_ << "if ";
              print(i.cond, kOpen, indent);
              os_ << " then ";
              print(i.then_branch, kOpen, indent + 1);
              os_ << " else ";
              print(i.else_branch, kOpen, indent + 1);
            },
            [&](const exprs::Zero& z) {
              os_ << "Zero ";
              print_type(os_, z.type);
            },
            [&](const exprs::Grad& g) {
              os_ << "Grad ";
              print(g.fn, kPrefix, indent);
            },
            [&](const exprs::RefNew& r) {
              os_ << "Ref ";
              print(r.init, kPrefix, indent);
            },
            [&](const exprs::RefRead& r) {
              os_ << "!";
              print(r.ref, kPrefix, indent);
            },
            [&](const exprs::RefWrite& r) {
              print(r.ref, kCompare, indent);
              os_ << " := ";
              print(r.value, kAssign, indent);
            },
            [&](const exprs::Function& f) {
              os_ << "fn(";
              for (std::size_t i = 0; i < f.params.size(); ++i) {
                if (i) os_ << ", ";
                os_ << f.params[i].name << " : ";
                print_type(os_, f.params[i].type);
              }
              os_ << ") -> ";
              print_type(os_, f.ret);
              os_ << " {";
              newline(indent + 1);
              print(f.body, kOpen, indent + 1);
              newline(indent);
              os_ << "}";
            },
        },
        e->v);
  }

  std::ostream& os_;
};

}  // namespace

std::string pretty(const Type& t) {
  std::ostringstream os;
  print_type(os, t);
  return os.str();
}

std::string pretty(const Expr& e) {
  std::ostringstream os;
  ExprPrinter(os).print(e, kOpen, 0);
  return os.str();
}

std::string pretty(const Program& p) {
  std::ostringstream os;
  bool first = true;
  for (const auto& item : p.items()) {
    if (!first) os << "\n";
    first = false;
    if (auto* op = std::get_if<OperatorDecl>(&item)) {
      os << "operator @" << op->name << " : ";
      print_type(os, op->type);
      os << "\n";
      continue;
    }
    const auto& d = std::get<Definition>(item);
    os << "def @" << d.name << "(";
    for (std::size_t i = 0; i < d.params.size(); ++i) {
      if (i) os << ", ";
      os << d.params[i].name << " : ";
      print_type(os, d.params[i].type);
    }
    os << ") -> ";
    print_type(os, d.ret);
    os << " {\n  ";
    ExprPrinter(os).print(d.body, kOpen, 1);
    os << "\n}\n";
  }
  return os.str();
}

}  // namespace gradir
