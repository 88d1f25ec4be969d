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
 * \file gradir/literal.hpp
 * \brief Textual value literals: `3`, `1.5`, `true`, `[[1, 2], [3, 4]]`, `(1.0, [2, 3])`.
 *
 * The printer emits the same syntax the parser reads. Floats print in
 * shortest round-trip form, so 9.0 prints as `9`.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "gradir/ast.hpp"
#include "gradir/value.hpp"

namespace gradir {

class LiteralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/*! Parses \p text and coerces it to \p type (tensor or tuple of tensors). Throws LiteralError. */
Value parse_value(std::string_view text, const Type& type);

std::string format_value(const Value& v);

/*! Element \p i of \p t in literal syntax. */
std::string format_scalar(const TensorValue& t, std::size_t i);

}  // namespace gradir
