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
 * \file gradir/pretty.hpp
 * \brief Printing in the concrete `.rly` syntax. Output re-parses to an
 *  alpha-equal node (internal mode when Ref forms or `fn` are present).
 */
#pragma once

#include <string>

#include "gradir/ast.hpp"

namespace gradir {

std::string pretty(const Type& t);
std::string pretty(const Expr& e);
std::string pretty(const Program& p);
std::string pretty(Kind k);
std::string pretty(const BaseType& b);

/*! Shortest round-trippable decimal text that always carries a decimal point. */
std::string format_float(double v);

}  // namespace gradir
