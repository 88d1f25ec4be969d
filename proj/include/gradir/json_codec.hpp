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
 * \file gradir/json_codec.hpp
 * \brief JSON serialization of programs.
 *
 * Document layout: {"v":1,"items":[...]}. Every node is an object whose
 * first key is "node", holding the variant name, followed by its children
 * by field name. Shapes are {"node":"Shape","dims":[...]}. Output is
 * compact and byte-identical for identical programs.
 */
#pragma once

#include <string>
#include <string_view>

#include "gradir/ast.hpp"
#include "gradir/syntax.hpp"

namespace gradir {

inline constexpr int kJsonSchemaVersion = 1;

std::string encode_json(const Program& p);
std::string encode_json(const Expr& e);
std::string encode_json(const Type& t);

/*! Throws ParseError on malformed JSON or a schema violation. */
Program decode_json(std::string_view text);
Expr decode_json_expr(std::string_view text);
Type decode_json_type(std::string_view text);

}  // namespace gradir
