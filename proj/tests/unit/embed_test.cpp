// Copyright 2026 The CMR Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "cmr/embed/grad_check.hpp"
#include "cmr/embed/losses.hpp"
#include "cmr/embed/model.hpp"
#include "cmr/embed/train.hpp"
#include "cmr/service/pipeline.hpp"

namespace {

using namespace cmr;
using namespace cmr::embed;

ModelConfig small_config(FusionStrategy s = FusionStrategy::kConcat, int dim = 8) {
  ModelConfig c;
  c.dim = dim;
  c.text_buckets = 64;
  c.text_hidden = 8;
  c.motion_hidden = 8;
  c.video_hidden = 8;
  c.fusion.strategy = s;
  c.fusion.heads = 2;
  c.fusion.projection_hidden = 16;
  c.video = {8, 6, 4, 3, true};
  c.seed = 5;
  return c;
}

Vec random_vec(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  Vec v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

Vec basis(Eigen::Index n, Eigen::Index i) {
  Vec v = Vec::Zero(n);
  v[i] = 1;
  return v;
}

std::string tmp_path(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

TEST(TextEncoder, Deterministic) {
  const Model m(small_config());
  EXPECT_EQ(m.encode_text("walking crosswalk"), m.encode_text("walking crosswalk"));
}

TEST(TextEncoder, CasefoldAndArticles) {
  const Model m(small_config());
  EXPECT_EQ(m.encode_text("a person"), m.encode_text("A Person"));
  EXPECT_EQ(m.encode_text("A person is walking on the crosswalk"), m.encode_text("a person is walking on a crosswalk"));
  EXPECT_EQ(tokenize("The e-scooter, AN ambulance!"), (std::vector<std::string>{"e-scooter", "ambulance"}));
}

TEST(TextEncoder, DifferentWordsDiffer) {
  const Model m(small_config(FusionStrategy::kConcat, 32));
  EXPECT_LT(m.encode_text("walking crosswalk").dot(m.encode_text("running crosswalk")), 1.0 - 1e-9);
}

TEST(TextEncoder, EmptyText) {
  const Model m(small_config());
  for (const char* s : {"", "   ", "the a an", "!!"}) {
    try {
      m.encode_text(s);
      FAIL() << s;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kEmptyText);
    }
  }
}

TEST(MotionEncoder, ZeroPoseFinite) {
  Model m(small_config());
  MotionSequence seq;
  seq.frames.assign(kSequenceLength, Pose{});
  const Vec x = MotionEncoder::flatten(seq);
  const Vec y = m.motion().forward(x);
  EXPECT_TRUE(y.allFinite());
  EXPECT_EQ(y, m.motion().forward(x));
  seq.frames.pop_back();
  EXPECT_THROW(MotionEncoder::flatten(seq), Error);
  EXPECT_THROW(m.motion().forward(Vec::Zero(10)), Error);
}

TEST(MotionEncoder, GradientMatchesFiniteDifferences) {
  Model m(small_config());
  std::mt19937_64 rng(2);
  Vec x = random_vec(kMotionInputDim, rng);
  const Vec w = random_vec(m.dim(), rng);
  auto f = [&] { return w.dot(m.motion().forward(x)); };
  Mlp::Cache c;
  m.motion().forward(x, &c);
  m.zero_grad();
  const Vec dx = m.motion().backward(c, w);
  EXPECT_LT(check_vector(f, x, dx, "x").max_rel_error, 1e-4);
  ParamList p;
  m.motion().collect(p);
  EXPECT_LT(check_params(f, p).max_rel_error, 1e-4);
}

TEST(VideoEncoder, GradientMatchesFiniteDifferences) {
  Model m(small_config());
  std::mt19937_64 rng(3);
  Vec x = random_vec(m.config().video.feature_dim(), rng);
  const Vec w = random_vec(m.dim(), rng);
  auto f = [&] { return w.dot(m.video().forward(x)); };
  Mlp::Cache c;
  m.video().forward(x, &c);
  m.zero_grad();
  const Vec dx = m.video().backward(c, w);
  EXPECT_LT(check_vector(f, x, dx, "x", {1e-5, 1e-6, 0, 0}).max_rel_error, 1e-4);
  ParamList p;
  m.video().collect(p);
  EXPECT_LT(check_params(f, p).max_rel_error, 1e-4);
}

TEST(VideoFeatures, BackwardMatchesFiniteDifferences) {
  const VideoConfig cfg{8, 6, 4, 3, true};
  std::mt19937_64 rng(4);
  std::vector<RgbImage> frames(3, RgbImage(8, 6));
  for (auto& f : frames)
    for (auto& v : f.data) v = std::uniform_real_distribution<double>(0, 1)(rng);
  const Vec w = random_vec(cfg.feature_dim(), rng);
  const auto grads = video_features_backward(w, 3, cfg);
  double worst = 0;
  for (int fi = 0; fi < 3; ++fi)
    for (size_t i = 0; i < frames[fi].data.size(); i += 7) {
      const double orig = frames[fi].data[i];
      frames[fi].data[i] = orig + 1e-5;
      const double up = w.dot(video_features(frames, cfg));
      frames[fi].data[i] = orig - 1e-5;
      const double down = w.dot(video_features(frames, cfg));
      frames[fi].data[i] = orig;
      worst = std::max(worst, relative_error(grads[fi].data[i], (up - down) / 2e-5, 1e-6));
    }
  EXPECT_LT(worst, 1e-4);
}

TEST(FocusBox, PerimeterOnly) {
  RgbImage img(20, 16);
  const BBox box{3, 4, 13, 12};
  draw_focus_box(img, box);
  int changed = 0;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 20; ++x) {
      const double* p = img.px(x, y);
      const bool in = x >= 3 && x < 13 && y >= 4 && y < 12;
      const bool interior = x >= 5 && x < 11 && y >= 6 && y < 10;
      const bool red = p[0] == 1.0 && p[1] == 0.0 && p[2] == 0.0;
      EXPECT_EQ(red, in && !interior) << x << "," << y;
      changed += red;
    }
  EXPECT_EQ(changed, 10 * 8 - 6 * 4);
}

TEST(FocusBox, NullBoxAndIdempotence) {
  RgbImage img(10, 10);
  for (auto& v : img.data) v = 0.25;
  const RgbImage before = img;
  draw_focus_box(img, std::nullopt);
  EXPECT_EQ(img, before);
  draw_focus_box(img, BBox{1, 1, 7, 7});
  RgbImage once = img;
  draw_focus_box(img, BBox{1, 1, 7, 7});
  EXPECT_EQ(img, once);
  RgbImage ab = img, ba = before;
  draw_focus_box(ab, BBox{4, 4, 9, 9});
  draw_focus_box(ba, BBox{4, 4, 9, 9});
  draw_focus_box(ba, BBox{1, 1, 7, 7});
  EXPECT_EQ(ab, ba);
  EXPECT_THROW(draw_focus_box(img, BBox{5, 5, 11, 8}), Error);
}

SceneSample toy_scene(std::uint64_t seed) {
  synthetic::RandomSceneOptions opt;
  std::mt19937_64 rng(seed);
  return synthetic::generate_synthetic_scene(synthetic::random_recipe(rng, opt), seed, "v").sample;
}

TEST(VideoEncoder, BlackFramesFiniteAndDeterministic) {
  Model m(small_config());
  const VideoConfig& cfg = m.config().video;
  const std::vector<RgbImage> black(kSequenceLength, RgbImage(cfg.width, cfg.height));
  const Vec a = m.video().forward_frames(black);
  EXPECT_TRUE(a.allFinite());
  EXPECT_EQ(a, m.video().forward_frames(black));
  EXPECT_THROW(m.video().forward_frames({RgbImage(3, 3)}), Error);
}

TEST(VideoEncoder, FocusBoxChangesEmbedding) {
  ModelConfig cfg = small_config(FusionStrategy::kConcat, 16);
  cfg.video = {40, 30, 8, 6, true};
  Model m(cfg);
  SceneSample s = toy_scene(12);
  const Vec a = m.video().forward(make_input(s, cfg.video).video);
  for (auto& b : s.motion.boxes) b = b.translated(b.x0 >= 60 ? -50 : 50, 0);
  const Vec b = m.video().forward(make_input(s, cfg.video).video);
  EXPECT_LT(a.normalized().dot(b.normalized()), 1 - 1e-6);
}

TEST(Fusion, ConcatBasis) {
  std::mt19937_64 rng(1);
  FusionConfig fc;
  const Fusion f(fc, 4, rng);
  const Vec fk = f.forward(basis(4, 0), basis(4, 1));
  ASSERT_EQ(fk.size(), 8);
  Vec want = Vec::Zero(8);
  want[0] = want[5] = 1;
  EXPECT_EQ(fk, want);
}

TEST(Fusion, BilinearBasis) {
  std::mt19937_64 rng(1);
  FusionConfig fc;
  fc.strategy = FusionStrategy::kBilinear;
  const Fusion f(fc, 4, rng);
  const Vec fk = f.forward(basis(4, 0), basis(4, 1));
  ASSERT_EQ(fk.size(), 16);
  EXPECT_EQ(fk, basis(16, 1));
}

TEST(Fusion, AttentionSymmetricInputs) {
  std::mt19937_64 rng(1);
  FusionConfig fc;
  fc.strategy = FusionStrategy::kAttention;
  fc.heads = 2;
  const Fusion f(fc, 4, rng);
  const Vec x = random_vec(4, rng);
  Fusion::Cache c;
  const Vec fk = f.forward(x, x, &c);
  RowMat tokens(2, 4);
  tokens.row(0) = x.transpose();
  tokens.row(1) = x.transpose();
  const RowMat y = f.attention.forward(tokens);
  EXPECT_LT((y.row(0) - y.row(1)).norm(), 1e-12);
  EXPECT_LT((fk - y.row(0).transpose()).norm(), 1e-12);
  EXPECT_EQ(fk.size(), 4);
}

TEST(Fusion, DimensionsAndErrors) {
  std::mt19937_64 rng(1);
  for (auto s : {FusionStrategy::kConcat, FusionStrategy::kBilinear, FusionStrategy::kAttention}) {
    FusionConfig fc;
    fc.strategy = s;
    fc.heads = 2;
    const Fusion f(fc, 6, rng);
    EXPECT_EQ(f.forward(random_vec(6, rng), random_vec(6, rng)).size(), fused_dim(s, 6));
    EXPECT_THROW(f.forward(random_vec(5, rng), random_vec(6, rng)), Error);
  }
  FusionConfig bad;
  bad.strategy = FusionStrategy::kAttention;
  bad.heads = 4;
  EXPECT_THROW(Fusion(bad, 6, rng), Error);
  EXPECT_THROW(parse_fusion("sum"), Error);
}

TEST(Fusion, BilinearJacobianStructure) {
  std::mt19937_64 rng(8);
  FusionConfig fc;
  fc.strategy = FusionStrategy::kBilinear;
  Fusion f(fc, 5, rng);
  const Vec fm = random_vec(5, rng), fv = random_vec(5, rng);
  Fusion::Cache c;
  f.forward(fm, fv, &c);
  for (Eigen::Index p = 0; p < 25; ++p) {
    const Eigen::Index i = p / 5, j = p % 5;
    const auto [dfm, dfv] = f.backward(c, basis(25, p));
    for (Eigen::Index a = 0; a < 5; ++a) {
      EXPECT_DOUBLE_EQ(dfm[a], a == i ? fv[j] : 0.0);
      EXPECT_DOUBLE_EQ(dfv[a], a == j ? fm[i] : 0.0);
    }
  }
}

TEST(Fusion, GradientsMatchFiniteDifferences) {
  for (auto s : {FusionStrategy::kConcat, FusionStrategy::kBilinear, FusionStrategy::kAttention}) {
    std::mt19937_64 rng(9);
    FusionConfig fc;
    fc.strategy = s;
    fc.heads = 2;
    Fusion f(fc, 4, rng);
    Vec fm = random_vec(4, rng), fv = random_vec(4, rng);
    const Vec w = random_vec(f.output_dim(), rng);
    auto loss = [&] { return w.dot(f.forward(fm, fv)); };
    Fusion::Cache c;
    f.forward(fm, fv, &c);
    ParamList p;
    f.collect(p);
    for (Param* q : p) q->zero_grad();
    const auto [dm, dv] = f.backward(c, w);
    const GradCheckOptions all{1e-5, 1e-6, 0, 0};
    EXPECT_LT(check_vector(loss, fm, dm, "fm", all).max_rel_error, 1e-4) << fusion_name(s);
    EXPECT_LT(check_vector(loss, fv, dv, "fv", all).max_rel_error, 1e-4) << fusion_name(s);
    EXPECT_LT(check_params(loss, p, all).max_rel_error, 1e-4) << fusion_name(s);
  }
}

TEST(Projection, LayerNormStatistics) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 20; ++i) {
    const Vec x = 3.0 * random_vec(37, rng).array() + 2.0;
    const Vec y = layer_norm(x, 1e-9);
    EXPECT_NEAR(y.mean(), 0.0, 1e-5);
    EXPECT_NEAR((y.array() - y.mean()).square().mean(), 1.0, 1e-5);
  }
}

TEST(Projection, EvalDeterministicTrainReproducible) {
  std::mt19937_64 init(11);
  const Projection p(16, 32, 8, 0.5, init);
  std::mt19937_64 rng(12);
  const Vec fk = random_vec(16, rng);
  EXPECT_EQ(p.forward(fk, nullptr), p.forward(fk, nullptr));
  std::mt19937_64 d1(99), d2(99), d3(100);
  const Vec a = p.forward(fk, &d1), b = p.forward(fk, &d2), c = p.forward(fk, &d3);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_NE(a, p.forward(fk, nullptr));
  EXPECT_THROW(p.forward(random_vec(5, rng), nullptr), Error);
}

TEST(Projection, DropoutMaskIsInverted) {
  std::mt19937_64 rng(13);
  const Vec m = dropout_mask(20000, 0.5, rng);
  for (double v : m) EXPECT_TRUE(v == 0.0 || v == 2.0);
  EXPECT_NEAR(m.mean(), 1.0, 0.05);
}

TEST(Losses, CosineValues) {
  std::mt19937_64 rng(14);
  const Vec u = random_vec(6, rng).normalized();
  EXPECT_NEAR(loss_cosine(u, u).value, 0.0, 1e-12);
  EXPECT_NEAR(loss_cosine(u, -u).value, 2.0, 1e-12);
  EXPECT_NEAR(loss_cosine(basis(6, 0), basis(6, 3)).value, 1.0, 1e-12);
  EXPECT_THROW(loss_cosine(Vec::Zero(6), u), Error);
  EXPECT_THROW(loss_cosine(u, Vec::Ones(5)), Error);
}

TEST(Losses, CosineScaleInvariance) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 50; ++i) {
    const Vec z = random_vec(8, rng), t = random_vec(8, rng);
    const double s = 0.01 + std::abs(random_vec(1, rng)[0]) * 100;
    EXPECT_NEAR(loss_cosine(z, t).value, loss_cosine(z, s * t).value, 1e-12);
  }
}

TEST(Losses, SoftCeIdentities) {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 50; ++i) {
    const Vec z = random_vec(7, rng), t = random_vec(7, rng);
    const double h = entropy(softmax(t));
    EXPECT_NEAR(loss_soft_ce(t, t).value, h, 1e-12);
    EXPECT_GE(loss_soft_ce(z, t).value, h - 1e-12);
  }
  Vec target = Vec::Zero(4);
  target[2] = 20;
  EXPECT_NEAR(loss_soft_ce(Vec::Constant(4, 0.3), target).value, std::log(4.0), 1e-12);
  EXPECT_NEAR(std::log(4.0), 1.3863, 1e-4);
}

TEST(Losses, InfoNceClosedForm) {
  RowMat z(2, 2);
  z << 1, 0, 0, 1;
  EXPECT_NEAR(loss_infonce(z, z, 0.5).value, -std::log(std::exp(2.0) / (std::exp(2.0) + 1.0)), 1e-12);
  EXPECT_NEAR(loss_infonce(z, z, 0.5).value, 0.1269, 1e-4);
  RowMat one(1, 3);
  one << 0.6, 0.8, 0;
  EXPECT_NEAR(loss_infonce(one, one, 0.5).value, 0.0, 1e-15);
}

TEST(Losses, InfoNcePermutationInvariant) {
  std::mt19937_64 rng(17);
  RowMat z(5, 6), t(5, 6);
  for (int i = 0; i < 5; ++i) {
    z.row(i) = random_vec(6, rng).normalized().transpose();
    t.row(i) = random_vec(6, rng).normalized().transpose();
  }
  std::vector<int> perm = {3, 0, 4, 1, 2};
  RowMat zp(5, 6), tp(5, 6);
  for (int i = 0; i < 5; ++i) {
    zp.row(i) = z.row(perm[i]);
    tp.row(i) = t.row(perm[i]);
  }
  EXPECT_NEAR(loss_infonce(z, t, 0.5).value, loss_infonce(zp, tp, 0.5).value, 1e-12);
  EXPECT_GE(loss_infonce(z, t, 0.5).value, 0.0);
  EXPECT_THROW(loss_infonce(z, t.leftCols(5), 0.5), Error);
}

TEST(Losses, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(18);
  const GradCheckOptions all{1e-5, 1e-6, 0, 0};
  for (int trial = 0; trial < 10; ++trial) {
    Vec z = random_vec(8, rng).normalized(), t = random_vec(8, rng).normalized();
    const auto c = loss_cosine(z, t);
    EXPECT_LT(check_vector([&] { return loss_cosine(z, t).value; }, z, c.dz, "z", all).max_rel_error, 1e-4);
    EXPECT_LT(check_vector([&] { return loss_cosine(z, t).value; }, t, c.dt, "t", all).max_rel_error, 1e-4);
    const auto s = loss_soft_ce(z, t);
    EXPECT_LT(check_vector([&] { return loss_soft_ce(z, t).value; }, z, s.dz, "z", all).max_rel_error, 1e-4);
    EXPECT_LT(check_vector([&] { return loss_soft_ce(z, t).value; }, t, s.dt, "t", all).max_rel_error, 1e-4);
  }
  RowMat Z(4, 8), T(4, 8);
  for (int i = 0; i < 4; ++i) {
    Z.row(i) = random_vec(8, rng).normalized().transpose();
    T.row(i) = random_vec(8, rng).normalized().transpose();
  }
  const auto b = loss_infonce(Z, T, 0.5);
  auto f = [&] { return loss_infonce(Z, T, 0.5).value; };
  std::mt19937_64 r2(0);
  EXPECT_LT(check_buffer(f, Z.data(), b.dz.data(), Z.size(), "Z", all, r2).max_rel_error, 1e-4);
  EXPECT_LT(check_buffer(f, T.data(), b.dt.data(), T.size(), "T", all, r2).max_rel_error, 1e-4);
}

TEST(Schedule, GeometricDecay) {
  const TrainConfig cfg;
  EXPECT_NEAR(lr_schedule(0, cfg), 1e-5, 1e-18);
  EXPECT_NEAR(lr_schedule(50, cfg), 1e-6, 1e-18);
  EXPECT_NEAR(lr_schedule(25, cfg), 3.1623e-6, 1e-10);
  EXPECT_THROW(lr_schedule(51, cfg), Error);
  EXPECT_THROW(lr_schedule(-1, cfg), Error);
}

std::vector<TrainExample> random_batch(const Model& m, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> texts = {"walking road", "running crosswalk", "waving sidewalk", "standing road"};
  std::vector<TrainExample> out;
  for (int i = 0; i < n; ++i)
    out.push_back({{random_vec(kMotionInputDim, rng) * 0.3, random_vec(m.config().video.feature_dim(), rng).cwiseAbs()},
                   texts[static_cast<size_t>(i) % texts.size()]});
  return out;
}

TEST(GradCheck, FullPipelineAllFusionsAllLosses) {
  for (auto s : {FusionStrategy::kConcat, FusionStrategy::kBilinear, FusionStrategy::kAttention})
    for (auto l : {LossKind::kCosine, LossKind::kSoftCe, LossKind::kInfoNce}) {
      Model m(small_config(s));
      const auto batch = random_batch(m, 3, 21);
      const auto r = pipeline_grad_check(m, batch, {l, 0.5}, 77, {1e-5, 1e-6, 24, 1});
      EXPECT_LT(r.max_rel_error, 1e-4) << fusion_name(s) << "/" << loss_name(l) << " worst " << r.worst;
      EXPECT_GT(r.checked, 100u);
    }
}

std::vector<TrainExample> toy_examples(size_t n, const VideoConfig& video) {
  service::ToyOptions o;
  o.n_train = n;
  o.n_test = 0;
  const auto d = service::make_toy_dataset(o);
  return service::training_examples(d.train, video);
}

TrainConfig toy_train(int epochs) {
  TrainConfig t;
  t.lr_start = 1e-3;
  t.lr_end = 1e-4;
  t.epochs = epochs;
  t.seed = 3;
  return t;
}

ModelConfig toy_model() {
  ModelConfig c;
  c.dim = 16;
  c.motion_hidden = 32;
  c.video_hidden = 32;
  c.fusion.projection_hidden = 64;
  c.seed = 4;
  return c;
}

TEST(Training, LossDropsAndTextFrozen) {
  const auto data = toy_examples(96, toy_model().video);
  Model m(toy_model());
  std::vector<Mat> text_before;
  for (Param* p : m.text_params()) text_before.push_back(p->value);
  auto set_loss = [&] {
    double total = 0;
    for (const auto& ex : data) total += loss_cosine(m.encode_scene(ex.input), m.encode_text(ex.text)).value;
    return total / static_cast<double>(data.size());
  };
  const double initial = set_loss();
  const auto h = train(m, data, {LossKind::kCosine, 0.5}, toy_train(50));
  ASSERT_EQ(h.epoch_loss.size(), 50u);
  EXPECT_LT(set_loss(), 0.1 * initial);
  EXPECT_LT(h.epoch_loss.back(), h.epoch_loss.front());
  EXPECT_EQ(h.steps, 50 * 16);
  const auto after = m.text_params();
  for (size_t i = 0; i < after.size(); ++i) EXPECT_TRUE(after[i]->value == text_before[i]) << after[i]->name;
}

TEST(Training, SameSeedSameParameters) {
  const auto data = toy_examples(24, toy_model().video);
  for (auto s : {FusionStrategy::kConcat, FusionStrategy::kAttention}) {
    ModelConfig cfg = toy_model();
    cfg.fusion.strategy = s;
    Model a(cfg), b(cfg);
    train(a, data, {LossKind::kInfoNce, 0.5}, toy_train(3));
    train(b, data, {LossKind::kInfoNce, 0.5}, toy_train(3));
    const auto pa = a.all_params(), pb = b.all_params();
    for (size_t i = 0; i < pa.size(); ++i) EXPECT_TRUE(pa[i]->value == pb[i]->value) << pa[i]->name;
  }
}

TEST(Training, UnfrozenTextMoves) {
  const auto data = toy_examples(12, toy_model().video);
  Model m(toy_model());
  const Mat before = m.text().mlp.output.weight.value;
  TrainConfig t = toy_train(2);
  t.freeze_text = false;
  train(m, data, {LossKind::kCosine, 0.5}, t);
  EXPECT_FALSE(m.text().mlp.output.weight.value == before);
}

TEST(Training, NonFiniteLossAborts) {
  const auto data = toy_examples(6, toy_model().video);
  Model m(toy_model());
  m.projection().mlp.output.bias.value(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    train(m, data, {LossKind::kCosine, 0.5}, toy_train(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteLoss);
  }
}

TEST(Training, ConfigValidation) {
  TrainConfig t;
  t.lr_end = t.lr_start;
  EXPECT_THROW(t.validate(), Error);
  TrainConfig b;
  b.batch_size = 0;
  EXPECT_THROW(b.validate(), Error);
  EXPECT_THROW((LossConfig{LossKind::kInfoNce, 0.0}).validate(), Error);
}

TEST(ModelFile, SaveLoadRoundTrip) {
  const auto cfg = small_config(FusionStrategy::kAttention);
  const Model m(cfg);
  const auto path = tmp_path("cmr_model_roundtrip.bin");
  m.save(path);
  const Model back = Model::load(path);
  const auto batch = random_batch(m, 2, 5);
  const Vec a = m.encode_scene(batch[0].input), b = back.encode_scene(batch[0].input);
  EXPECT_LT((a - b).norm(), 1e-5);
  // A second save of the loaded model is byte-identical (float32 is a fixed point).
  const auto path2 = tmp_path("cmr_model_roundtrip2.bin");
  back.save(path2);
  Model::load(path2).save(path);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {}), s2((std::istreambuf_iterator<char>(f2)), {});
  EXPECT_EQ(s1, s2);
  EXPECT_EQ(back.config().fusion.strategy, FusionStrategy::kAttention);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST(ModelFile, CorruptAndVersion) {
  const Model m(small_config());
  const auto path = tmp_path("cmr_model_bad.bin");
  m.save(path);
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign((std::istreambuf_iterator<char>(in)), {});
  }
  auto write = [&](const std::string& b) { std::ofstream(path, std::ios::binary) << b; };
  auto code = [&] {
    try {
      Model::load(path);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kNotFound;
  };
  write(bytes.substr(0, bytes.size() - 3));
  EXPECT_EQ(code(), ErrorCode::kCorruptFile);
  std::string v = bytes;
  v[4] = 9;
  write(v);
  EXPECT_EQ(code(), ErrorCode::kVersionMismatch);
  write("XXXX" + bytes.substr(4));
  EXPECT_EQ(code(), ErrorCode::kCorruptFile);
  std::remove(path.c_str());
}

TEST(ModelConfigJson, RoundTrip) {
  auto c = small_config(FusionStrategy::kBilinear);
  c.video.focus_box = false;
  const auto back = model_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  auto bad = to_json(c);
  bad["dim"] = 1;
  EXPECT_THROW(model_config_from_json(bad), Error);
}

}  // namespace
