// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fastssl/config.hpp"
#include "fastssl/export.hpp"
#include "fastssl/fastssl.h"

using namespace fastssl;
namespace fs = std::filesystem;

TEST(Config, RenderParseRoundTrip) {
  ExperimentConfig c;
  c.seed = 42;
  c.lr = 0.123456789012345;
  c.schedule = ScheduleKind::OneCycle;
  c.progressive = false;
  c.mag_min = 2.5;
  EXPECT_EQ(parse_config(render_config(c)), c);
  EXPECT_EQ(parse_config(render_config(ExperimentConfig{})), ExperimentConfig{});
  for (auto key : config_keys()) {
    ExperimentConfig d;
    set_config_value(d, key, get_config_value(c, key));
    EXPECT_EQ(get_config_value(d, key), get_config_value(c, key)) << key;
  }
}

TEST(Config, CommentsAndDefaults) {
  const auto c = parse_config("# comment\n\n  epochs = 30   # trailing\nlr=0.2\n");
  EXPECT_EQ(c.epochs, 30);
  EXPECT_EQ(c.lr, 0.2);
  EXPECT_EQ(c.batch_size, ExperimentConfig{}.batch_size);
}

TEST(Config, ErrorsNameLineAndKey) {
  try {
    parse_config("epochs = 10\nbogus = 3\n");
    FAIL();
  } catch (const ConfigFieldError &e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.key(), "bogus");
  }
  try {
    parse_config("epochs = 10\n\nlr = fast\n");
    FAIL();
  } catch (const ConfigFieldError &e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.key(), "lr");
  }
  EXPECT_THROW(parse_config("epochs 10\n"), ConfigError);
  EXPECT_THROW(parse_config("beta_low = 0.97\n"), ConfigFieldError);
  EXPECT_THROW(parse_config("warmup_epochs = 24\n"), ConfigFieldError);
  EXPECT_THROW(parse_config("res_min = 18\n"), ConfigFieldError);
}

TEST(Config, LongWarmupAccepted) {
  const auto c = parse_config("epochs = 480\nwarmup_epochs = 80\n");
  EXPECT_EQ(c.schedule_config().warmup_steps, 80 * c.iterations_per_epoch());
  EXPECT_EQ(c.total_steps(), 480 * c.iterations_per_epoch());
}

TEST(Export, CsvFidelity) {
  const ExperimentConfig c;
  const auto rows = schedule_rows(c);
  ASSERT_EQ(rows.size(), static_cast<std::size_t>(c.total_steps() + 1));
  std::stringstream ss;
  write_schedule_csv(ss, rows);
  EXPECT_EQ(ss.str().rfind("step,lr,momentum,resolution,aug_magnitude\n", 0), 0u);
  const auto back = read_schedule_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  const auto sched = c.schedule_config();
  const auto plan = c.progressive_plan();
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto step = static_cast<std::int64_t>(t);
    const auto p = evaluate_schedule(step, sched);
    ASSERT_EQ(back[t].step, step);
    ASSERT_EQ(back[t].resolution, resolution_at(step, plan));
    ASSERT_EQ(back[t].lr, std::strtod(format_real(p.lr).c_str(), nullptr));
    ASSERT_EQ(back[t].momentum, std::strtod(format_real(p.momentum).c_str(), nullptr));
    ASSERT_EQ(back[t].aug_magnitude,
              std::strtod(format_real(magnitude_at(step, plan)).c_str(), nullptr));
  }
}

TEST(Export, CsvRejectsMalformed) {
  std::stringstream bad_header("step,lr\n0,1\n");
  EXPECT_THROW(read_schedule_csv(bad_header), IoError);
  std::stringstream gap("step,lr,momentum,resolution,aug_magnitude\n1,0.1,0.9,32,5\n");
  EXPECT_THROW(read_schedule_csv(gap), IoError);
  EXPECT_THROW(read_text_file("/nonexistent/file"), IoError);
}

TEST(CApi, ConfigLifecycle) {
  fastssl_config *cfg = nullptr;
  ASSERT_EQ(fastssl_config_create(&cfg), FASTSSL_OK);
  EXPECT_EQ(fastssl_config_set(cfg, "epochs", "12"), FASTSSL_OK);
  char *v = nullptr;
  ASSERT_EQ(fastssl_config_get(cfg, "epochs", &v), FASTSSL_OK);
  EXPECT_STREQ(v, "12");
  fastssl_string_free(v);
  EXPECT_EQ(fastssl_config_set(cfg, "nope", "1"), FASTSSL_ERR_CONFIG);
  EXPECT_NE(std::string(fastssl_last_error()).find("nope"), std::string::npos);
  EXPECT_EQ(fastssl_config_set(cfg, "warmup_epochs", "12"), FASTSSL_OK);
  EXPECT_EQ(fastssl_config_validate(cfg), FASTSSL_ERR_CONFIG);
  EXPECT_EQ(fastssl_config_set(cfg, "warmup_epochs", "2"), FASTSSL_OK);
  EXPECT_EQ(fastssl_config_validate(cfg), FASTSSL_OK);
  EXPECT_STREQ(fastssl_last_error(), "");

  char *text = nullptr;
  ASSERT_EQ(fastssl_config_render(cfg, &text), FASTSSL_OK);
  fastssl_config *copy = nullptr;
  ASSERT_EQ(fastssl_config_parse(text, &copy), FASTSSL_OK);
  fastssl_string_free(text);
  int64_t a = 0, b = 0;
  fastssl_config_total_steps(cfg, &a);
  fastssl_config_total_steps(copy, &b);
  EXPECT_EQ(a, b);
  EXPECT_EQ(fastssl_config_apply_preset(copy, "baseline"), FASTSSL_OK);
  EXPECT_EQ(fastssl_config_apply_preset(copy, "fastest"), FASTSSL_ERR_CONFIG);
  fastssl_config_destroy(copy);

  fastssl_schedule_point pt{};
  ASSERT_EQ(fastssl_schedule_at(cfg, 0, &pt), FASTSSL_OK);
  EXPECT_EQ(pt.lr, 0.0);
  EXPECT_EQ(pt.resolution, 32);
  EXPECT_EQ(fastssl_schedule_at(cfg, a + 1, &pt), FASTSSL_ERR_RANGE);
  EXPECT_EQ(fastssl_config_create(nullptr), FASTSSL_ERR_ARGUMENT);
  fastssl_config_destroy(cfg);
}

TEST(CApi, SelectionAndCost) {
  double speed = 0, over = 0;
  ASSERT_EQ(fastssl_selection_overhead(224, 64, 4, 6.0, &speed, &over), FASTSSL_OK);
  EXPECT_NEAR(100 * over, 5.16, 0.005);
  int32_t pairs[12];
  size_t count = 0;
  EXPECT_EQ(fastssl_enumerate_pairs(4, pairs, 6, &count), FASTSSL_OK);
  EXPECT_EQ(count, 6u);
  EXPECT_EQ(pairs[10], 2);
  EXPECT_EQ(pairs[11], 3);
  EXPECT_EQ(fastssl_enumerate_pairs(4, pairs, 5, &count), FASTSSL_ERR_ARGUMENT);
  const double losses[] = {0.1, 0.3, 0.3};
  int32_t i = -1, j = -1;
  EXPECT_EQ(fastssl_select_hardest(losses, 3, 3, &i, &j), FASTSSL_OK);
  EXPECT_EQ(i, 0);
  EXPECT_EQ(j, 2);
  EXPECT_EQ(fastssl_select_hardest(losses, 2, 3, &i, &j), FASTSSL_ERR_SELECTION);

  fastssl_config *base = nullptr, *eff = nullptr;
  fastssl_config_create(&base);
  fastssl_config_create(&eff);
  fastssl_config_apply_preset(base, "baseline");
  fastssl_config_apply_preset(eff, "efficient");
  char *json = nullptr;
  ASSERT_EQ(fastssl_estimate_cost(base, eff, nullptr, nullptr, &json), FASTSSL_OK);
  const auto j1 = nlohmann::json::parse(json);
  fastssl_string_free(json);
  EXPECT_GT(j1["combined_speedup"].get<double>(), 1.0);
  EXPECT_EQ(fastssl_estimate_cost(base, eff, "{\"forward_flops\": {\"32\": 1}}", nullptr,
                                  &json),
            FASTSSL_ERR_PROFILE);
  EXPECT_EQ(fastssl_estimate_cost(base, eff, "{not json", nullptr, &json),
            FASTSSL_ERR_ARGUMENT);
  fastssl_config_destroy(base);
  fastssl_config_destroy(eff);
}

TEST(CApi, EmitScheduleIsStable) {
  const auto dir = fs::temp_directory_path() / "fastssl_capi";
  fs::create_directories(dir);
  fastssl_config *cfg = nullptr;
  fastssl_config_create(&cfg);
  const auto p1 = (dir / "a.csv").string(), p2 = (dir / "b.csv").string();
  ASSERT_EQ(fastssl_emit_schedule(cfg, p1.c_str()), FASTSSL_OK);
  ASSERT_EQ(fastssl_emit_schedule(cfg, p2.c_str()), FASTSSL_OK);
  EXPECT_EQ(read_text_file(p1), read_text_file(p2));
  EXPECT_EQ(fastssl_emit_schedule(cfg, "/nonexistent/dir/x.csv"), FASTSSL_ERR_IO);
  fastssl_config_destroy(cfg);
  fs::remove_all(dir);
}
