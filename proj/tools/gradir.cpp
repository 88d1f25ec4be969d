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
 * \file tools/gradir.cpp
 * \brief Command-line driver: check, run, grad, gradcheck, ad-dump, to-json, from-json.
 *
 * Exit codes: 0 success, 1 analysis/runtime/tolerance failure, 2 usage error.
 */
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gradir/autodiff.hpp"
#include "gradir/eval.hpp"
#include "gradir/json_codec.hpp"
#include "gradir/literal.hpp"
#include "gradir/pretty.hpp"
#include "gradir/syntax.hpp"
#include "gradir/typecheck.hpp"

namespace {

using namespace gradir;

struct Config {
  std::string input;
  std::string entry = "main";
  std::vector<std::string> values;
  double h = 1e-4;
  double tol = 1e-3;
  bool internal = false;
  bool json_errors = false;
};

class Reporter {
 public:
  Reporter(std::string file, bool json) : file_(std::move(file)), json_(json) {}

  void error(const std::string& rule, const std::string& message, const Span& span = {}) const {
    if (json_) {
      nlohmann::ordered_json j;
      j["rule"] = rule;
      j["message"] = message;
      j["span"] = {{"line", span.line}, {"column", span.column}, {"begin", span.begin}, {"end", span.end}};
      std::cerr << j.dump() << "\n";
      return;
    }
    std::cerr << file_;
    if (span.line) std::cerr << ":" << span.line << ":" << span.column;
    std::cerr << ": error [" << rule << "]: " << message << "\n";
  }

 private:
  std::string file_;
  bool json_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const Definition& entry_definition(const Program& p, const std::string& entry) {
  const Definition* d = p.find_definition(entry);
  if (!d) throw UsageError("no definition named @" + entry);
  return *d;
}

std::vector<Value> parse_arguments(const Definition& def, const std::vector<std::string>& texts) {
  if (texts.size() != def.params.size())
    throw UsageError("@" + def.name + " takes " + std::to_string(def.params.size()) + " arguments, got " +
                     std::to_string(texts.size()));
  std::vector<Value> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      out.push_back(parse_value(texts[i], def.params[i].type));
    } catch (const LiteralError& e) {
      throw UsageError("argument " + std::to_string(i) + " (" + def.params[i].name + "): " + e.what());
    }
  }
  return out;
}

/*! Max over slots of |a - b| / max(1, |a|, |b|). */
double relative_error(double a, double b) {
  return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

int run_command(const std::string& command, const Config& cfg, const Reporter& report) {
  ParseOptions popts;
  popts.internal = cfg.internal;
  const Registry registry = Registry::with_builtins();

  if (command == "from-json") {
    Program p = decode_json(read_file(cfg.input));
    std::cout << pretty(p);
    return 0;
  }
  Program program = parse_program(read_file(cfg.input), popts);
  if (command == "to-json") {
    std::cout << encode_json(program) << "\n";
    return 0;
  }
  TypedProgram typed = check_program(program, registry);
  if (command == "check") return 0;

  const Definition& def = entry_definition(program, cfg.entry);
  if (command == "run") {
    auto args = parse_arguments(def, cfg.values);
    std::cout << format_value(evaluate(typed, cfg.entry, std::move(args))) << "\n";
    return 0;
  }

  auto [with_grad, grad_name] = add_gradient_entry(program, cfg.entry);
  TypedProgram grad_typed = check_program(with_grad, registry);
  if (command == "ad-dump") {
    std::cout << pretty(elaborate_program(grad_typed).program);
    return 0;
  }
  auto args = parse_arguments(def, cfg.values);
  Value result = evaluate(grad_typed, grad_name, args);
  if (command == "grad") {
    std::cout << format_value(result) << "\n";
    return 0;
  }

  // gradcheck
  std::vector<TensorValue> point;
  for (const auto& a : args) point.push_back(*a->as<TensorValue>());
  auto fd = finite_diff(typed, cfg.entry, point, cfg.h);
  const auto& grads = result->as<TupleValue>()->elements[1]->as<TupleValue>()->elements;
  double worst = 0;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const auto& ad = *grads[i]->as<TensorValue>();
    for (std::size_t j = 0; j < ad.size(); ++j) {
      double err = relative_error(ad.floats()[j], fd[i].floats()[j]);
      worst = std::max(worst, err);
      std::cout << def.params[i].name << "[" << j << "]: ad " << format_scalar(ad, j) << " fd "
                << format_scalar(fd[i], j) << " error " << err << "\n";
    }
  }
  bool ok = worst <= cfg.tol;
  std::cout << (ok ? "ok" : "FAILED") << ": max relative error " << worst << " (tolerance " << cfg.tol << ")\n";
  if (!ok) report.error("gradcheck", "gradient disagrees with finite differences");
  return ok ? 0 : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Typecheck, evaluate and differentiate .rly programs"};
  app.require_subcommand(1);
  Config cfg;
  app.add_flag("--internal", cfg.internal, "Accept internal-only constructs (Ref, !, :=, fn, RefType)");
  app.add_flag("--json-errors", cfg.json_errors, "Report diagnostics as JSON objects, one per line");

  auto add_input = [&](CLI::App* sub) { sub->add_option("file", cfg.input, "Input file")->required()->check(CLI::ExistingFile); };
  auto add_entry = [&](CLI::App* sub) { sub->add_option("--entry", cfg.entry, "Entry definition (default main)"); };

  auto* check = app.add_subcommand("check", "Parse and typecheck");
  add_input(check);
  auto* run = app.add_subcommand("run", "Evaluate an entry definition");
  add_input(run);
  add_entry(run);
  run->add_option("--args", cfg.values, "Argument literals");
  auto* grad = app.add_subcommand("grad", "Print (value, gradients) of an entry at a point");
  add_input(grad);
  add_entry(grad);
  grad->add_option("--at", cfg.values, "Point, one literal per parameter")->required();
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare AD gradients with central finite differences");
  gradcheck->set_help_flag("--help", "Print this help message and exit");
  add_input(gradcheck);
  add_entry(gradcheck);
  gradcheck->add_option("--at", cfg.values, "Point, one literal per parameter")->required();
  gradcheck->add_option("--h", cfg.h, "Finite-difference step (default 1e-4)")->check(CLI::PositiveNumber);
  gradcheck->add_option("--tol", cfg.tol, "Relative tolerance (default 1e-3)")->check(CLI::NonNegativeNumber);
  auto* dump = app.add_subcommand("ad-dump", "Print the program with Grad of the entry elaborated");
  add_input(dump);
  add_entry(dump);
  auto* to_json = app.add_subcommand("to-json", "Print the JSON AST of a .rly file");
  add_input(to_json);
  auto* from_json = app.add_subcommand("from-json", "Print .rly source for a JSON AST");
  add_input(from_json);

  // CLI11 treats a leading '[' as the start of a bracketed value list; a
  // leading space keeps tensor literals such as [1,2] intact.
  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) {
    std::string a = argv[i];
    if (!a.empty() && a.front() == '[') a.insert(a.begin(), ' ');
    args.push_back(std::move(a));
  }
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  std::string command = app.get_subcommands().front()->get_name();
  Reporter report(cfg.input, cfg.json_errors);
  try {
    return run_command(command, cfg, report);
  } catch (const ParseFailure& f) {
    for (const auto& e : f.errors()) report.error("Parse", e.message(), e.span());
  } catch (const ParseError& e) {
    report.error("Parse", e.message(), e.span());
  } catch (const TypeFailure& f) {
    for (const auto& e : f.errors()) report.error(e.rule(), e.message(), e.span());
  } catch (const TypeError& e) {
    report.error(e.rule(), e.message(), e.span());
  } catch (const AdError& e) {
    report.error("Autodiff", e.what());
  } catch (const EvalError& e) {
    report.error("Runtime", e.what());
  } catch (const UsageError& e) {
    report.error("Usage", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    report.error("Error", e.what());
  }
  return kFailure;
}
