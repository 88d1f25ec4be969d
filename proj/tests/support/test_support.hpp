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
 * \file test_support.hpp
 * \brief Shared fixtures: the example corpus, a random program generator,
 *  numeric oracles and the golden typing table.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gradir/ast.hpp"
#include "gradir/eval.hpp"
#include "gradir/registry.hpp"
#include "gradir/typecheck.hpp"

namespace gradir::testing {

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

std::filesystem::path corpus_dir();
/*! Every `.rly` file in the corpus, sorted. */
std::vector<std::filesystem::path> corpus_files();
/*! Files named `*.internal.rly` may use internal-only constructs. */
bool is_internal(const std::filesystem::path& file);
std::string read_text(const std::filesystem::path& file);
Program load_program(const std::filesystem::path& file);

struct CorpusCase {
  std::string file;
  std::string entry;
  std::vector<std::string> args;
};
std::vector<CorpusCase> load_manifest();

/*! Parses literal arguments against the parameter types of \p def. */
std::vector<Value> parse_args(const Definition& def, const std::vector<std::string>& args);

const Registry& builtins();

// ---------------------------------------------------------------------------
// Random differentiable programs
// ---------------------------------------------------------------------------

struct GeneratedProgram {
  Program program;
  std::string entry;
};

/*!
 * Closed programs over 64-bit float scalars and 3-vectors using literals,
 * parameters, + - * /, negation, sq, let, tuples and projections, if with
 * comparisons, calls to a helper definition, @sum and @dot. Every divisor
 * has the form `sq e + c` with c >= 0.5.
 */
class ProgramGenerator {
 public:
  explicit ProgramGenerator(std::uint64_t seed) : rng_(seed) {}
  GeneratedProgram next();

 private:
  struct Scope {
    std::vector<std::string> scalars;
    std::vector<std::string> vectors;
  };

  double uniform(double lo, double hi);
  std::size_t pick(std::size_t n);
  bool chance(double p);
  Expr literal();
  Expr scalar(const Scope& scope, int depth);
  Expr vector(const Scope& scope, int depth);
  std::string fresh(const char* prefix);

  std::mt19937_64 rng_;
  bool helper_ = false;
  int counter_ = 0;
};

/*! A uniformly random point in [lo, hi] for each parameter of \p def. */
std::vector<TensorValue> random_point(const Definition& def, std::mt19937_64& rng, double lo = -2.0,
                                      double hi = 2.0);

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/*! Scalar result of calling \p entry on \p args. */
double call_scalar(const TypedProgram& p, const std::string& entry, const std::vector<TensorValue>& args,
                   double* min_gap = nullptr);

/*!
 * (f(x + h e) - f(x - h e)) / 2h for every scalar slot, evaluated directly
 * through the interpreter. \p min_gap receives the smallest |lhs - rhs| of
 * any comparison seen while evaluating.
 */
std::vector<std::vector<double>> central_differences(const TypedProgram& p, const std::string& entry,
                                                     const std::vector<TensorValue>& point, double h,
                                                     double* min_gap = nullptr);

/*! |a - b| / max(1, |a|, |b|) */
double relative_error(double a, double b);

/*! Gradients (second component of a Grad result), flattened per argument. */
std::vector<std::vector<double>> gradient_slots(const Value& grad_result);

// ---------------------------------------------------------------------------
// Golden typing table
// ---------------------------------------------------------------------------

struct GoldenCase {
  enum class Mode { Kind, Expr, Program };
  std::string rule;
  Mode mode;
  std::string source;
  bool accept;
  /*! Accept: kind name or printed type. Reject: the rule label of the error. */
  std::string expected;
  /*! For types the parser cannot produce. */
  std::function<Type()> build;
};

std::vector<GoldenCase> golden_cases();

struct GoldenOutcome {
  bool pass;
  std::string detail;
};
GoldenOutcome run_golden(const GoldenCase& c);

/*! The 25 kinding and typing rule labels. */
const std::vector<std::string>& core_rules();

}  // namespace gradir::testing
