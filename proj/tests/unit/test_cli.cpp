// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

// Drives the olat executable as a subprocess.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const std::string kTiny =
    "d=8 K=8 input_points=64 output_points=64 encoder_widths=8,16 decoder_widths=16 point_d_widths=8 "
    "point_d_head=8 code_d_widths=8 batch_size=2 max_steps=3 ae_steps=3 ae_batch_size=2 "
    "partial_per_category=3 complete_per_category=3 eval_per_category=2 cloud_points=96";

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("olat_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Exit status of `olat <args>`, with stderr captured into `err`.
int run(const std::string& args, std::string* err = nullptr, const std::string& env = {}) {
  const auto log = fs::temp_directory_path() / "olat_cli_stderr.txt";
  const std::string cmd = env + " \"" OLAT_CLI_PATH "\" " + args + " >/dev/null 2>\"" + log.string() + "\"";
  const int status = std::system(cmd.c_str());
  if (err) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *err = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, UnknownConfigKeyExitsThree) {
  const auto dir = fresh_dir("unknown_key");
  std::string err;
  EXPECT_EQ(run("gen-data --run-dir " + dir.string() + " not_a_key=1", &err), 3);
  EXPECT_NE(err.find("not_a_key"), std::string::npos);
  EXPECT_EQ(run("gen-data --run-dir " + dir.string() + " batch_size=zero"), 3);
  EXPECT_EQ(run("gen-data --run-dir " + dir.string() + " lonely"), 3);
  EXPECT_EQ(run("gen-data --run-dir " + dir.string() + " batch_size=0"), 3);
}

TEST(Cli, UsageErrorsExitThree) {
  EXPECT_EQ(run("no-such-command"), 3);
  EXPECT_EQ(run("complete --run-dir /tmp"), 3);  // --input missing
  EXPECT_EQ(run("train --config /definitely/missing.cfg"), 3);
}

TEST(Cli, ToyConfigEchoRecordsOverrides) {
  const auto dir = fresh_dir("echo");
  ASSERT_EQ(run("gen-data --config \"" OLAT_TOY_CONFIG "\" --run-dir " + dir.string() + " " + kTiny + " seed=99"), 0);
  const auto echo = slurp(dir / "config.echo");
  EXPECT_NE(echo.find("seed = 99\n"), std::string::npos);
  EXPECT_NE(echo.find("K = 8\n"), std::string::npos);      // override beats the file
  EXPECT_NE(echo.find("epochs = 200\n"), std::string::npos);  // from the file
  EXPECT_TRUE(fs::exists(dir / "data" / "train.manifest"));
}

TEST(Cli, EndToEndPipelineThroughRunDirEnvironment) {
  const auto dir = fresh_dir("pipeline");
  const std::string env = "OLAT_RUN_DIR=\"" + dir.string() + "\"";
  std::string err;
  ASSERT_EQ(run("gen-data " + kTiny, &err, env), 0) << err;
  ASSERT_EQ(run("pretrain-ae " + kTiny, &err, env), 0) << err;
  ASSERT_EQ(run("train " + kTiny, &err, env), 0) << err;
  ASSERT_EQ(run("eval " + kTiny, &err, env), 0) << err;
  for (const char* f : {"config.echo", "train.log", "report.csv", "ckpt_chair_like.olat", "ckpt_ae_chair_like.olat"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(slurp(dir / "report.csv").rfind("category,cd_x1e4,f1,ucd_x1e4,mmd_x1e2,tau\n", 0), 0u);

  const auto input = dir / "data" / "eval" / "chair_like" / "partial_6.pcb";
  ASSERT_TRUE(fs::exists(input));
  const auto out = dir / "done.xyz";
  ASSERT_EQ(run("complete " + kTiny + " --input " + input.string() + " --output " + out.string() +
                    " --projection --panel-size 32",
                &err, env),
            0)
      << err;
  std::ifstream xyz(out);
  int lines = 0;
  for (std::string l; std::getline(xyz, l);) ++lines;
  EXPECT_EQ(lines, 64);
  EXPECT_TRUE(fs::exists(dir / "done.ppm"));
  EXPECT_EQ(run("complete " + kTiny + " --input " + input.string() + " --checkpoint " + (dir / "nope.olat").string(),
                nullptr, env),
            1);
}

TEST(Cli, DivergenceExitsTwoAndKeepsLastFiniteState) {
  const auto dir = fresh_dir("diverge");
  const std::string common = " --run-dir " + dir.string() + " " + kTiny + " enable_code_d=false";
  ASSERT_EQ(run("gen-data" + common), 0);
  std::string err;
  EXPECT_EQ(run("train" + common + " lr=1e300 grad_clip=0 max_steps=50", &err), 2) << err;
  EXPECT_NE(err.find("diverged"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "ckpt_chair_like_last_finite.olat"));
}

}  // namespace
