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

#include "gradir/json_codec.hpp"

#include <cmath>
#include <set>

#include "json.hpp"

namespace gradir {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

const char* scalar_name(Scalar s) {
  switch (s) {
    case Scalar::Int: return "Int";
    case Scalar::UInt: return "UInt";
    case Scalar::Float: return "Float";
    case Scalar::Bool: return "Bool";
  }
  return "?";
}

ojson node(const char* tag) {
  ojson j = ojson::object();
  j["node"] = tag;
  return j;
}

ojson enc(const Type& t);
ojson enc(const Expr& e);

ojson enc_params(const std::vector<Param>& params) {
  ojson arr = ojson::array();
  for (const auto& p : params) {
    ojson jp = ojson::object();
    jp["name"] = p.name;
    jp["type"] = enc(p.type);
    arr.push_back(std::move(jp));
  }
  return arr;
}

ojson enc_list(const std::vector<Expr>& xs) {
  ojson arr = ojson::array();
  for (const auto& x : xs) arr.push_back(enc(x));
  return arr;
}

ojson enc(const Type& t) {
  return std::visit(overloaded{
                        [](const types::Base& b) {
                          auto j = node("Base");
                          j["scalar"] = scalar_name(b.base.scalar);
                          if (b.base.scalar != Scalar::Bool) j["width"] = b.base.width;
                          return j;
                        },
                        [](const types::ShapeLit& s) {
                          auto j = node("Shape");
                          j["dims"] = s.dims;
                          return j;
                        },
                        [](const types::Tensor& x) {
                          auto j = node("TensorType");
                          j["base"] = enc(x.base);
                          j["shape"] = enc(x.shape);
                          return j;
                        },
                        [](const types::Arrow& x) {
                          auto j = node("Arrow");
                          j["domain"] = enc(x.domain);
                          j["codomain"] = enc(x.codomain);
                          return j;
                        },
                        [](const types::Var& v) {
                          auto j = node("Var");
                          j["name"] = v.name;
                          return j;
                        },
                        [](const types::Forall& f) {
                          auto j = node("Forall");
                          j["var"] = f.var;
                          j["kind"] = std::string(to_string(f.kind));
                          j["body"] = enc(f.body);
                          return j;
                        },
                        [](const types::Ref& r) {
                          auto j = node("RefType");
                          j["inner"] = enc(r.inner);
                          return j;
                        },
                        [](const types::Product& p) {
                          auto j = node("Product");
                          ojson arr = ojson::array();
                          for (auto& e : p.elements) arr.push_back(enc(e));
                          j["elements"] = std::move(arr);
                          return j;
                        },
                    },
                    t->v);
}

ojson enc(const Expr& e) {
  auto j = node(std::string(node_name(*e)).c_str());
  std::visit(overloaded{
                 [&](const exprs::LocalVar& v) { j["name"] = v.name; },
                 [&](const exprs::GlobalVar& v) { j["name"] = v.name; },
                 [&](const exprs::IntLit& i) { j["value"] = i.value; },
                 [&](const exprs::FloatLit& f) {
                   j["value"] = f.value;
                   if (f.width != 32) j["width"] = f.width;
                 },
                 [&](const exprs::BoolLit& b) { j["value"] = b.value; },
                 [&](const exprs::Call& c) {
                   j["callee"] = enc(c.callee);
                   j["args"] = enc_list(c.args);
                 },
                 [&](const exprs::Let& l) {
                   j["binder"] = l.binder;
                   if (l.annotation) j["annotation"] = enc(l.annotation);
                   j["value"] = enc(l.value);
                   j["body"] = enc(l.body);
                 },
                 [&](const exprs::Cast& c) {
                   j["target"] = enc(c.target);
                   j["inner"] = enc(c.inner);
                 },
                 [&](const exprs::BinOp& b) {
                   j["op"] = std::string(to_string(b.op));
                   j["lhs"] = enc(b.lhs);
                   j["rhs"] = enc(b.rhs);
                 },
                 [&](const exprs::UnaryOp& u) {
                   j["op"] = std::string(to_string(u.op));
                   j["operand"] = enc(u.operand);
                 },
                 [&](const exprs::Tuple& t) { j["elements"] = enc_list(t.elements); },
                 [&](const exprs::Projection& p) {
                   j["tuple"] = enc(p.tuple);
                   j["index"] = p.index;
                 },
                 [&](const exprs::TensorLit& t) { j["elements"] = enc_list(t.elements); },
                 [&](const exprs::If& i) {
                   j["cond"] = enc(i.cond);
                   j["then"] = enc(i.then_branch);
                   j["else"] = enc(i.else_branch);
                 },
                 [&](const exprs::Zero& z) { j["type"] = enc(z.type); },
                 [&](const exprs::Grad& g) { j["fn"] = enc(g.fn); },
                 [&](const exprs::RefNew& r) { j["init"] = enc(r.init); },
                 [&](const exprs::RefRead& r) { j["ref"] = enc(r.ref); },
                 [&](const exprs::RefWrite& r) {
                   j["ref"] = enc(r.ref);
                   j["value"] = enc(r.value);
                 },
                 [&](const exprs::Function& f) {
                   j["params"] = enc_params(f.params);
                   j["ret"] = enc(f.ret);
                   j["body"] = enc(f.body);
                 },
             },
             e->v);
  return j;
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

class Decoder {
 public:
  explicit Decoder(std::string_view text) : text_(text) {}

  json parse() {
    try {
      return json::parse(text_);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), span_at(e.byte));
    }
  }

  [[noreturn]] void schema(const std::string& msg) const {
    throw ParseError("JSON schema violation: " + msg, Span{1, 1, 0, text_.size()});
  }

  // Field access that remembers which keys were consumed, so leftovers can be reported.
  class Obj {
   public:
    Obj(const Decoder& d, const json& j, std::string tag) : d_(d), j_(j), tag_(std::move(tag)) {}

    const json& get(const char* key) {
      used_.insert(key);
      auto it = j_.find(key);
      if (it == j_.end()) d_.schema(tag_ + " is missing field \"" + key + "\"");
      return *it;
    }
    const json* opt(const char* key) {
      used_.insert(key);
      auto it = j_.find(key);
      return it == j_.end() ? nullptr : &*it;
    }
    std::string str(const char* key) {
      const auto& v = get(key);
      if (!v.is_string()) d_.schema(tag_ + "." + key + " must be a string");
      return v.get<std::string>();
    }
    const json& arr(const char* key) {
      const auto& v = get(key);
      if (!v.is_array()) d_.schema(tag_ + "." + key + " must be an array");
      return v;
    }
    std::uint64_t nat(const char* key) {
      const auto& v = get(key);
      if (!v.is_number_unsigned()) d_.schema(tag_ + "." + key + " must be a natural number");
      return v.get<std::uint64_t>();
    }
    void finish() const {
      for (auto it = j_.begin(); it != j_.end(); ++it)
        if (!used_.count(it.key())) d_.schema(tag_ + " has unexpected field \"" + it.key() + "\"");
    }

   private:
    const Decoder& d_;
    const json& j_;
    std::string tag_;
    std::set<std::string> used_{"node"};
  };

  std::string tag_of(const json& j) const {
    if (!j.is_object()) schema("expected a node object");
    auto it = j.find("node");
    if (it == j.end() || !it->is_string()) schema("node object without a \"node\" tag");
    return it->get<std::string>();
  }

  Kind kind(const std::string& s) const {
    if (s == "BaseType") return Kind::BaseType;
    if (s == "Shape") return Kind::Shape;
    if (s == "Type") return Kind::Type;
    schema("unknown kind \"" + s + "\"");
  }

  Type type(const json& j) const {
    auto tag = tag_of(j);
    Obj o(*this, j, tag);
    Type out;
    if (tag == "Base") {
      auto s = o.str("scalar");
      if (s == "Bool") {
        out = base_type(BaseType::Bool());
      } else {
        auto w = o.nat("width");
        if (w == 0 || w > 1024) schema("Base.width out of range");
        auto width = static_cast<unsigned>(w);
        if (s == "Int") out = base_type(BaseType::Int(width));
        else if (s == "UInt") out = base_type(BaseType::UInt(width));
        else if (s == "Float") out = base_type(BaseType::Float(width));
        else schema("unknown scalar \"" + s + "\"");
      }
    } else if (tag == "Shape") {
      std::vector<std::int64_t> dims;
      for (const auto& d : o.arr("dims")) {
        if (!d.is_number_integer()) schema("Shape.dims must hold integers");
        auto v = d.get<std::int64_t>();
        if (v <= 0) schema("Shape.dims must be at least 1 (zero extent is rejected)");
        dims.push_back(v);
      }
      out = shape_type(std::move(dims));
    } else if (tag == "TensorType") {
      auto b = type(o.get("base"));
      out = tensor_type(b, type(o.get("shape")));
    } else if (tag == "Arrow") {
      auto d = type(o.get("domain"));
      out = arrow_type(d, type(o.get("codomain")));
    } else if (tag == "Var") {
      out = type_var(o.str("name"));
    } else if (tag == "Forall") {
      auto var = o.str("var");
      auto k = kind(o.str("kind"));
      out = forall_type(std::move(var), k, type(o.get("body")));
    } else if (tag == "RefType") {
      out = ref_type(type(o.get("inner")));
    } else if (tag == "Product") {
      std::vector<Type> elems;
      for (const auto& e : o.arr("elements")) elems.push_back(type(e));
      out = product_type(std::move(elems));
    } else {
      schema("unknown type node \"" + tag + "\"");
    }
    o.finish();
    return out;
  }

  std::vector<Param> params(const json& arr) const {
    if (!arr.is_array()) schema("params must be an array");
    std::vector<Param> out;
    for (const auto& p : arr) {
      if (!p.is_object()) schema("param must be an object");
      auto name = p.find("name");
      auto ty = p.find("type");
      if (name == p.end() || !name->is_string() || ty == p.end() || p.size() != 2)
        schema("param must have exactly \"name\" and \"type\"");
      out.push_back({name->get<std::string>(), type(*ty)});
    }
    return out;
  }

  std::vector<Expr> list(const json& arr) const {
    std::vector<Expr> out;
    for (const auto& x : arr) out.push_back(expr(x));
    return out;
  }

  Expr expr(const json& j) const {
    auto tag = tag_of(j);
    Obj o(*this, j, tag);
    Expr out;
    if (tag == "LocalVar") {
      out = ir::local(o.str("name"));
    } else if (tag == "GlobalVar") {
      out = ir::global(o.str("name"));
    } else if (tag == "IntLit") {
      const auto& v = o.get("value");
      if (!v.is_number_integer() || (v.is_number_unsigned() && v.get<std::uint64_t>() > INT64_MAX))
        schema("IntLit.value must be a 64-bit integer");
      out = ir::int_lit(v.get<std::int64_t>());
    } else if (tag == "FloatLit") {
      const auto& v = o.get("value");
      if (!v.is_number()) schema("FloatLit.value must be a number");
      unsigned width = 32;
      if (o.opt("width")) {
        auto w = o.nat("width");
        if (w != 32 && w != 64) schema("FloatLit.width must be 32 or 64");
        width = static_cast<unsigned>(w);
      }
      out = ir::float_lit(v.get<double>(), width);
    } else if (tag == "BoolLit") {
      const auto& v = o.get("value");
      if (!v.is_boolean()) schema("BoolLit.value must be a boolean");
      out = ir::bool_lit(v.get<bool>());
    } else if (tag == "Call") {
      auto callee = expr(o.get("callee"));
      out = ir::call(callee, list(o.arr("args")));
    } else if (tag == "Let") {
      auto binder = o.str("binder");
      Type ann;
      if (auto* a = o.opt("annotation")) ann = type(*a);
      auto value = expr(o.get("value"));
      out = ir::let(std::move(binder), value, expr(o.get("body")), ann);
    } else if (tag == "Cast") {
      auto target = type(o.get("target"));
      out = ir::make(exprs::Cast{target, expr(o.get("inner"))});
    } else if (tag == "BinOp") {
      auto op = binary_op(o.str("op"));
      auto lhs = expr(o.get("lhs"));
      out = ir::binop(op, lhs, expr(o.get("rhs")));
    } else if (tag == "UnaryOp") {
      auto s = o.str("op");
      if (s != "-" && s != "sq") schema("unknown unary operator \"" + s + "\"");
      out = ir::unop(s == "-" ? UnaryOperator::Neg : UnaryOperator::Sq, expr(o.get("operand")));
    } else if (tag == "Tuple") {
      out = ir::tuple(list(o.arr("elements")));
    } else if (tag == "Projection") {
      auto t = expr(o.get("tuple"));
      out = ir::proj(t, static_cast<std::size_t>(o.nat("index")));
    } else if (tag == "TensorLit") {
      auto elems = list(o.arr("elements"));
      if (elems.empty()) schema("TensorLit.elements must be nonempty");
      out = ir::make(exprs::TensorLit{std::move(elems)});
    } else if (tag == "If") {
      auto c = expr(o.get("cond"));
      auto t = expr(o.get("then"));
      out = ir::if_(c, t, expr(o.get("else")));
    } else if (tag == "Zero") {
      out = ir::zero(type(o.get("type")));
    } else if (tag == "Grad") {
      out = ir::grad(expr(o.get("fn")));
    } else if (tag == "RefNew") {
      out = ir::ref_new(expr(o.get("init")));
    } else if (tag == "RefRead") {
      out = ir::ref_read(expr(o.get("ref")));
    } else if (tag == "RefWrite") {
      auto r = expr(o.get("ref"));
      out = ir::ref_write(r, expr(o.get("value")));
    } else if (tag == "Function") {
      auto ps = params(o.get("params"));
      auto ret = type(o.get("ret"));
      out = ir::fn(std::move(ps), ret, expr(o.get("body")));
    } else {
      schema("unknown expression node \"" + tag + "\"");
    }
    o.finish();
    return out;
  }

  BinaryOperator binary_op(const std::string& s) const {
    for (auto op : {BinaryOperator::Add, BinaryOperator::Sub, BinaryOperator::Mul, BinaryOperator::Div,
                    BinaryOperator::Ne, BinaryOperator::Eq, BinaryOperator::Lt, BinaryOperator::Le,
                    BinaryOperator::Gt, BinaryOperator::Ge})
      if (to_string(op) == s) return op;
    schema("unknown binary operator \"" + s + "\"");
  }

  Program program(const json& j) const {
    if (!j.is_object()) schema("top level must be an object");
    auto v = j.find("v");
    if (v == j.end() || !v->is_number_integer() || v->get<int>() != kJsonSchemaVersion)
      schema("top level \"v\" must be " + std::to_string(kJsonSchemaVersion));
    auto items = j.find("items");
    if (items == j.end() || !items->is_array()) schema("top level \"items\" must be an array");
    if (j.size() != 2) schema("top level admits only \"v\" and \"items\"");
    Program p;
    for (const auto& it : *items) {
      auto tag = tag_of(it);
      Obj o(*this, it, tag);
      if (tag == "OperatorDecl") {
        auto name = o.str("name");
        add(p, OperatorDecl{std::move(name), type(o.get("type")), {}});
      } else if (tag == "Definition") {
        auto name = o.str("name");
        auto ps = params(o.get("params"));
        auto ret = type(o.get("ret"));
        add(p, Definition{std::move(name), std::move(ps), ret, expr(o.get("body")), {}});
      } else {
        schema("unknown item node \"" + tag + "\"");
      }
      o.finish();
    }
    return p;
  }

 private:
  void add(Program& p, Item item) const {
    try {
      p.add(std::move(item));
    } catch (const std::invalid_argument& e) {
      schema(e.what());
    }
  }

  Span span_at(std::size_t byte) const {
    // nlohmann reports a 1-based byte position, possibly one past the end.
    std::size_t pos = std::min(byte == 0 ? 0 : byte - 1, text_.empty() ? 0 : text_.size() - 1);
    Span s{1, 1, pos, std::min(pos + 1, text_.size())};
    for (std::size_t i = 0; i < pos; ++i) {
      if (text_[i] == '\n') {
        ++s.line;
        s.column = 1;
      } else {
        ++s.column;
      }
    }
    return s;
  }

  std::string_view text_;
};

}  // namespace

std::string encode_json(const Program& p) {
  ojson doc = ojson::object();
  doc["v"] = kJsonSchemaVersion;
  ojson items = ojson::array();
  for (const auto& item : p.items()) {
    if (auto* op = std::get_if<OperatorDecl>(&item)) {
      auto j = node("OperatorDecl");
      j["name"] = op->name;
      j["type"] = enc(op->type);
      items.push_back(std::move(j));
    } else {
      const auto& d = std::get<Definition>(item);
      auto j = node("Definition");
      j["name"] = d.name;
      j["params"] = enc_params(d.params);
      j["ret"] = enc(d.ret);
      j["body"] = enc(d.body);
      items.push_back(std::move(j));
    }
  }
  doc["items"] = std::move(items);
  return doc.dump();
}

std::string encode_json(const Expr& e) { return enc(e).dump(); }
std::string encode_json(const Type& t) { return enc(t).dump(); }

Program decode_json(std::string_view text) {
  Decoder d(text);
  return d.program(d.parse());
}

Expr decode_json_expr(std::string_view text) {
  Decoder d(text);
  return d.expr(d.parse());
}

Type decode_json_type(std::string_view text) {
  Decoder d(text);
  return d.type(d.parse());
}

}  // namespace gradir
