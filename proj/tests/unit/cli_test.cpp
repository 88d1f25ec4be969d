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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct Outcome {
  int code;
  std::string out;
};

Outcome cli(const std::string& args) {
  std::string cmd = std::string("'") + GRADIR_CLI + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string corpus(const char* name) { return std::string("'") + GRADIR_CORPUS_DIR + "/" + name + "'"; }

std::string scratch(const char* name, const std::string& text) {
  auto path = std::filesystem::current_path() / name;
  std::ofstream(path) << text;
  return "'" + path.string() + "'";
}

TEST(Cli, RunPrintsValue) {
  auto r = cli("run " + corpus("sq.rly") + " --entry f --args 3.0");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "9\n");
}

TEST(Cli, RunTensorArguments) {
  auto r = cli("run " + corpus("poly.rly") + " --entry loss --args '[1.0, 2.0, 3.0]' '[0.5, -1.0, 2.0]'");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out, "19.25\n");
}

TEST(Cli, GradPrintsValueAndGradients) {
  auto r = cli("grad " + corpus("sq.rly") + " --entry f --at 3.0");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "(9, (6))\n");
  r = cli("grad " + corpus("div.rly") + " --entry f --at 1.0 2.0");
  EXPECT_EQ(r.out, "(0.5, (0.5, -0.25))\n");
}

TEST(Cli, GradcheckPassesAndFails) {
  auto r = cli("gradcheck " + corpus("branch.rly") + " --entry f --at -3.0");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("ok: max relative error"), std::string::npos);
  // At the kink the one-sided derivatives differ; a central difference averages them.
  r = cli("gradcheck " + corpus("branch.rly") + " --entry f --at 0.0 --h 0.1");
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("FAILED"), std::string::npos);
}

TEST(Cli, CheckReportsRuleAndPosition) {
  auto file = scratch("bad_type.rly", "def @f() -> Tensor(FloatType(32), Shape()) {\n  1.0 + 2\n}\n");
  auto r = cli("check " + file);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find(":2:"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("error [Type-Noncomp-BinaryOp]"), std::string::npos) << r.out;
}

TEST(Cli, JsonErrors) {
  auto file = scratch("bad_type2.rly", "def @f() -> Tensor(FloatType(32), Shape()) { 1.0 + 2 }\n");
  auto r = cli("--json-errors check " + file);
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out.rfind("{\"rule\":\"Type-Noncomp-BinaryOp\"", 0), 0u) << r.out;
}

TEST(Cli, ParseErrorsExitOne) {
  auto file = scratch("bad_parse.rly", "def @f( -> {\n");
  auto r = cli("check " + file);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("error [Parse]"), std::string::npos);
}

TEST(Cli, InternalFormsNeedFlag) {
  EXPECT_EQ(cli("check " + corpus("refs.internal.rly")).code, 1);
  EXPECT_EQ(cli("--internal check " + corpus("refs.internal.rly")).code, 0);
}

TEST(Cli, RuntimeErrorsExitOne) {
  auto file = scratch("div0.rly", "def @f() -> Tensor(IntType(32), Shape()) { 1 / 0 }\n");
  auto r = cli("run " + file + " --entry f");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("error [Runtime]"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("bogus").code, 2);
  EXPECT_EQ(cli("run").code, 2);
  EXPECT_EQ(cli("run " + corpus("sq.rly") + " --entry nope").code, 2);
  EXPECT_EQ(cli("run " + corpus("sq.rly") + " --entry f --args 1.0 2.0").code, 2);
  EXPECT_EQ(cli("run " + corpus("sq.rly") + " --entry f --args abc").code, 2);
}

TEST(Cli, JsonRoundTrip) {
  auto j = cli("to-json " + corpus("mlp.rly"));
  ASSERT_EQ(j.code, 0);
  auto file = scratch("mlp.json", j.out);
  auto back = cli("from-json " + file);
  ASSERT_EQ(back.code, 0) << back.out;
  auto rly = scratch("mlp_back.rly", back.out);
  EXPECT_EQ(cli("check " + rly).code, 0);
}

TEST(Cli, AdDumpIsCheckableInternalSource) {
  auto r = cli("ad-dump " + corpus("twice.rly") + " --entry quartic");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find("Grad"), std::string::npos);
  auto file = scratch("dump.rly", r.out);
  EXPECT_EQ(cli("--internal check " + file).code, 0);
}

}  // namespace
