// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "olat/olat.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

std::string fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("olat_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

olat_cloud* make(std::vector<double> xyz) {
  olat_cloud* c = nullptr;
  EXPECT_EQ(olat_cloud_create(xyz.data(), xyz.size() / 3, &c), OLAT_OK);
  return c;
}

TEST(CApi, StatusStringsAndVersion) {
  EXPECT_STREQ(olat_status_string(OLAT_OK), "ok");
  EXPECT_STREQ(olat_status_string(OLAT_DIVERGED), "training diverged");
  EXPECT_GT(std::strlen(olat_version()), 0u);
}

TEST(CApi, MetricsOnHandles) {
  olat_cloud* a = make({0, 0, 0});
  olat_cloud* b = make({1, 0, 0});
  double v = -1;
  ASSERT_EQ(olat_chamfer(a, b, &v), OLAT_OK);
  EXPECT_EQ(v, 2.0);
  ASSERT_EQ(olat_ucd(a, b, &v), OLAT_OK);
  EXPECT_EQ(v, 1.0);
  ASSERT_EQ(olat_f1(a, a, 0.01, &v), OLAT_OK);
  EXPECT_EQ(v, 1.0);
  const olat_cloud* set[] = {a};
  const olat_cloud* refs[] = {b};
  ASSERT_EQ(olat_mmd(set, 1, refs, 1, &v), OLAT_OK);
  EXPECT_EQ(v, 2.0);
  EXPECT_EQ(olat_f1(a, b, 0.0, &v), OLAT_INVALID_ARGUMENT);
  EXPECT_NE(std::string(olat_last_error()).find("tau"), std::string::npos);
  EXPECT_EQ(olat_mmd(set, 0, refs, 1, &v), OLAT_INVALID_ARGUMENT);
  EXPECT_EQ(olat_chamfer(nullptr, b, &v), OLAT_INVALID_ARGUMENT);
  olat_cloud_destroy(a);
  olat_cloud_destroy(b);
  olat_cloud_destroy(nullptr);
}

TEST(CApi, CloudFilesAndCopies) {
  const auto dir = fresh_dir("clouds");
  olat_cloud* a = make({0.5, -1.25, 2, 3, 4, 5});
  EXPECT_EQ(olat_cloud_size(a), 2u);
  ASSERT_EQ(olat_cloud_write(a, (dir + "/a.pcb").c_str()), OLAT_OK);
  olat_cloud* b = nullptr;
  ASSERT_EQ(olat_cloud_read((dir + "/a.pcb").c_str(), &b), OLAT_OK);
  double xyz[6];
  EXPECT_EQ(olat_cloud_copy(b, xyz, 5), OLAT_INVALID_ARGUMENT);
  ASSERT_EQ(olat_cloud_copy(b, xyz, 6), OLAT_OK);
  EXPECT_EQ(xyz[1], -1.25);
  EXPECT_EQ(olat_cloud_read((dir + "/missing.pcb").c_str(), &b), OLAT_IO);
  EXPECT_EQ(b, nullptr);
  EXPECT_EQ(olat_write_projection(a, nullptr, 16, (dir + "/a.ppm").c_str()), OLAT_OK);
  EXPECT_TRUE(fs::exists(dir + "/a.ppm"));
  olat_cloud_destroy(a);
}

TEST(CApi, FormatErrorsSurface) {
  const auto dir = fresh_dir("format");
  const auto path = dir + "/bad.xyz";
  FILE* f = std::fopen(path.c_str(), "w");
  std::fputs("1 2\n", f);
  std::fclose(f);
  olat_cloud* c = nullptr;
  EXPECT_EQ(olat_cloud_read(path.c_str(), &c), OLAT_FORMAT);
  EXPECT_NE(std::string(olat_last_error()).find("byte offset"), std::string::npos);
}

TEST(CApi, ConfigGetSetEcho) {
  olat_config* cfg = nullptr;
  ASSERT_EQ(olat_config_create(&cfg), OLAT_OK);
  size_t needed = 0;
  ASSERT_EQ(olat_config_get(cfg, "gamma", nullptr, 0, &needed), OLAT_OK);
  std::vector<char> buf(needed);
  ASSERT_EQ(olat_config_get(cfg, "gamma", buf.data(), buf.size(), nullptr), OLAT_OK);
  EXPECT_STREQ(buf.data(), "100");
  char tiny[2];
  EXPECT_EQ(olat_config_get(cfg, "gamma", tiny, sizeof tiny, nullptr), OLAT_INVALID_ARGUMENT);
  EXPECT_EQ(olat_config_set(cfg, "batch_size", "4"), OLAT_OK);
  EXPECT_EQ(olat_config_set(cfg, "bogus", "4"), OLAT_CONFIG);
  EXPECT_NE(std::string(olat_last_error()).find("bogus"), std::string::npos);
  ASSERT_EQ(olat_config_echo(cfg, nullptr, 0, &needed), OLAT_OK);
  std::string echo(needed, '\0');
  ASSERT_EQ(olat_config_echo(cfg, echo.data(), echo.size(), nullptr), OLAT_OK);
  EXPECT_NE(echo.find("batch_size = 4\n"), std::string::npos);
  EXPECT_EQ(olat_config_load_file(cfg, "/no/such/file"), OLAT_CONFIG);
  olat_config_destroy(cfg);
}

TEST(CApi, PipelineAndModelHandles) {
  const auto dir = fresh_dir("pipeline");
  olat_config* cfg = nullptr;
  ASSERT_EQ(olat_config_create(&cfg), OLAT_OK);
  const char* kv[][2] = {{"d", "8"}, {"K", "8"}, {"input_points", "64"}, {"output_points", "64"},
                         {"encoder_widths", "8,16"}, {"decoder_widths", "16"}, {"point_d_widths", "8"},
                         {"point_d_head", "8"}, {"code_d_widths", "8"}, {"batch_size", "2"},
                         {"max_steps", "2"}, {"ae_steps", "2"}, {"ae_batch_size", "2"},
                         {"partial_per_category", "3"}, {"complete_per_category", "3"},
                         {"eval_per_category", "2"}, {"cloud_points", "96"}};
  for (const auto& p : kv) ASSERT_EQ(olat_config_set(cfg, p[0], p[1]), OLAT_OK) << p[0];
  EXPECT_EQ(olat_train(cfg, dir.c_str(), nullptr), OLAT_IO);  // no data yet
  ASSERT_EQ(olat_gen_data(cfg, dir.c_str()), OLAT_OK) << olat_last_error();
  ASSERT_EQ(olat_pretrain_ae(cfg, dir.c_str()), OLAT_OK) << olat_last_error();
  ASSERT_EQ(olat_train(cfg, dir.c_str(), nullptr), OLAT_OK) << olat_last_error();
  ASSERT_EQ(olat_eval(cfg, dir.c_str(), nullptr), OLAT_OK) << olat_last_error();
  EXPECT_TRUE(fs::exists(dir + "/report.csv"));

  olat_model* model = nullptr;
  ASSERT_EQ(olat_model_load((dir + "/ckpt_chair_like.olat").c_str(), &model), OLAT_OK);
  olat_cloud* partial = nullptr;
  ASSERT_EQ(olat_cloud_read((dir + "/data/eval/chair_like/partial_6.pcb").c_str(), &partial), OLAT_OK);
  olat_cloud* done = nullptr;
  ASSERT_EQ(olat_model_complete(model, partial, &done), OLAT_OK);
  EXPECT_EQ(olat_cloud_size(done), 64u);
  size_t written = 0;
  ASSERT_EQ(olat_complete(cfg, dir.c_str(), (dir + "/data/eval.manifest").c_str(), nullptr, nullptr, 0, &written),
            OLAT_OK);
  EXPECT_EQ(written, 2u);
  olat_model* bad = nullptr;
  EXPECT_EQ(olat_model_load((dir + "/report.csv").c_str(), &bad), OLAT_FORMAT);
  EXPECT_EQ(bad, nullptr);
  olat_cloud_destroy(done);
  olat_cloud_destroy(partial);
  olat_model_destroy(model);
  olat_config_destroy(cfg);
}

}  // namespace
