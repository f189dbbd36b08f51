// nrt/tests/emformer_test.cc

// Copyright 2026  The noisy-rnnt Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "nrt/emformer.h"
#include "nrt/linalg.h"
#include "oracles.h"
#include "test_util.h"

namespace nrt {
namespace {

using namespace testing;

TEST(Emformer, ShapeContract) {
  EmformerConfig cfg = SmallConfig(1, 4);
  cfg.input_dim = 5;
  ModelParams p = MakeParams(cfg, 1);
  Tensor x = testing::RandomTensor({11, 5}, 2, 1.0);
  Tensor y = EncoderForward(x, cfg, p, Mode::kEval, nullptr);
  ASSERT_EQ(y.shape(), (Shape{11, 5}));
  for (double v : y.data()) ASSERT_TRUE(std::isfinite(v));
}

TEST(Emformer, FeatureDimMismatchIsConfigError) {
  EmformerConfig cfg = SmallConfig(1, 4);
  ModelParams p = MakeParams(cfg, 1);
  EXPECT_THROW(EncoderForward(testing::RandomTensor({8, 7}, 1, 1.0), cfg, p, Mode::kEval, nullptr),
               ConfigError);
}

TEST(Emformer, ConfigValidation) {
  EmformerConfig cfg = SmallConfig(1, 4);
  cfg.num_heads = 3;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = SmallConfig(1, 4);
  cfg.use_memory_bank = true;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  EXPECT_NO_THROW(EmformerConfig::LargePreset().Validate());
}

TEST(Emformer, StreamingMatchesFullSequenceMaskedAttention) {
  for (std::size_t layers : {1u, 2u, 3u}) {
    for (std::size_t seg : {2u, 4u, 8u}) {
      for (std::size_t frames : {4 * seg, 4 * seg - 1}) {
        EmformerConfig cfg = SmallConfig(layers, seg);
        ModelParams p = MakeParams(cfg, 10 * layers + seg);
        Tensor x = testing::RandomTensor({frames, cfg.input_dim}, seg + frames, 1.0);
        Tensor y = EncoderForward(x, cfg, p, Mode::kEval, nullptr);
        Mat oracle = FullSequenceOracle(x, cfg, p);
        double worst = 0.0;
        for (std::size_t i = 0; i < oracle.v.size(); ++i)
          worst = std::max(worst, std::abs(oracle.v[i] - y.vec()[i]));
        EXPECT_LE(worst, 1e-10) << layers << " layers, segment " << seg << ", T " << frames;
      }
    }
  }
}

TEST(Emformer, StreamingMatchesOracleWithCacheEviction) {
  EmformerConfig cfg = SmallConfig(2, 2);
  cfg.left_context_segments = 2;
  ModelParams p = MakeParams(cfg, 77);
  Tensor x = testing::RandomTensor({15, cfg.input_dim}, 78, 1.0);
  Tensor y = EncoderForward(x, cfg, p, Mode::kEval, nullptr);
  Mat oracle = FullSequenceOracle(x, cfg, p);
  for (std::size_t i = 0; i < oracle.v.size(); ++i) ASSERT_NEAR(oracle.v[i], y.vec()[i], 1e-10);
}

TEST(Emformer, LookAheadIsExactlyOneSegment) {
  EmformerConfig cfg = SmallConfig(2, 4);
  ModelParams p = MakeParams(cfg, 5);
  const std::size_t T = 24, seg = 4;
  Tensor x = testing::RandomTensor({T, cfg.input_dim}, 6, 1.0);
  Tensor base = EncoderForward(x, cfg, p, Mode::kEval, nullptr);
  for (std::size_t frame = 0; frame < T; ++frame) {
    Tensor xp = x.Clone();
    xp.data()[frame * cfg.input_dim] += 0.5;
    Tensor y = EncoderForward(xp, cfg, p, Mode::kEval, nullptr);
    const std::size_t frame_seg = frame / seg;
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t out_seg = t / seg;
      bool same = true;
      for (std::size_t j = 0; j < base.cols(); ++j) same &= base.at(t, j) == y.at(t, j);
      if (frame_seg > out_seg + 1) {
        ASSERT_TRUE(same) << "frame " << frame << " leaked into output " << t;
      } else if (frame_seg == out_seg + 1) {
        ASSERT_FALSE(same) << "right context frame " << frame << " ignored by output " << t;
      }
    }
  }
}

TEST(Emformer, EvalModeIsDeterministic) {
  EmformerConfig cfg = SmallConfig(2, 4);
  ModelParams p = MakeParams(cfg, 8);
  Tensor x = testing::RandomTensor({13, cfg.input_dim}, 9, 1.0);
  RngStream rng(3);
  EXPECT_EQ(EncoderForward(x, cfg, p, Mode::kEval, &rng).vec(),
            EncoderForward(x, cfg, p, Mode::kEval, &rng).vec());
  EXPECT_EQ(rng.counter(), 0u);
}

TEST(Emformer, TrainModeDropoutConsumesRandomness) {
  EmformerConfig cfg = SmallConfig(1, 4);
  cfg.dropout = 0.2;
  ModelParams p = MakeParams(cfg, 8);
  Tensor x = testing::RandomTensor({8, cfg.input_dim}, 9, 1.0);
  RngStream a(3), b(3), c(4);
  auto ya = EncoderForward(x, cfg, p, Mode::kTrain, &a).vec();
  EXPECT_EQ(ya, EncoderForward(x, cfg, p, Mode::kTrain, &b).vec());
  EXPECT_NE(ya, EncoderForward(x, cfg, p, Mode::kTrain, &c).vec());
}

TEST(Emformer, ZeroValuePathLeavesNormalizedResidual) {
  EmformerConfig cfg = SmallConfig(1, 4);
  ModelParams p = MakeParams(cfg, 11);
  const std::string pre = EncoderLayerPrefix(0);
  for (const char *name : {"attn.wv", "ffn.w1", "ffn.b1", "ffn.w2", "ffn.b2"})
    for (double &v : p.Get(pre + name).data()) v = 0.0;
  for (const char *name : {"ln_output.gain", "ln_output.bias"}) {
    const double fill = std::string(name).ends_with("gain") ? 1.0 : 0.0;
    for (double &v : p.Get(pre + name).data()) v = fill;
  }
  Tensor c = testing::RandomTensor({4, 8}, 12, 1.0);
  Tensor r = testing::RandomTensor({4, 8}, 13, 1.0);
  EmformerLayerState state;
  auto out = EmformerLayerForward(c, r, state, p, cfg, 0, Mode::kEval, nullptr);
  Tensor expected = LayerNorm(ConcatRows({c, r}), Tensor::Full({8}, 1.0), Tensor::Zeros({8}));
  Tensor got = ConcatRows({out.center, out.right});
  for (std::size_t i = 0; i < got.numel(); ++i) ASSERT_NEAR(got.vec()[i], expected.vec()[i], 1e-12);
}

TEST(Emformer, StreamingOrderViolationIsStateError) {
  EmformerConfig cfg = SmallConfig(1, 4);
  ModelParams p = MakeParams(cfg, 1);
  Tensor c = testing::RandomTensor({4, 8}, 2, 1.0);
  EmformerLayerState state;
  EXPECT_THROW(EmformerLayerForward(c, c, state, p, cfg, 1, Mode::kEval, nullptr), StateError);
  auto out = EmformerLayerForward(c, c, state, p, cfg, 0, Mode::kEval, nullptr);
  EXPECT_THROW(EmformerLayerForward(c, c, out.state, p, cfg, 0, Mode::kEval, nullptr),
               StateError);
  EXPECT_THROW(EmformerLayerForward(c, SliceRows(c, 0, 3), out.state, p, cfg, 1, Mode::kEval,
                                    nullptr),
               DimensionError);
}

TEST(Emformer, CacheRespectsBudget) {
  EmformerConfig cfg = SmallConfig(1, 2);
  cfg.left_context_segments = 3;
  ModelParams p = MakeParams(cfg, 1);
  EmformerLayerState state;
  for (std::size_t i = 0; i < 7; ++i) {
    Tensor c = testing::RandomTensor({2, 8}, i, 1.0);
    state = EmformerLayerForward(c, c, state, p, cfg, i, Mode::kEval, nullptr).state;
    EXPECT_EQ(state.keys.size(), std::min<std::size_t>(i + 1, 3));
    EXPECT_EQ(state.keys.size(), state.values.size());
    EXPECT_EQ(state.next_segment, i + 1);
  }
}

TEST(Emformer, AttentionRowsAreConvex) {
  Tensor q = testing::RandomTensor({7, 8}, 1, 3.0);
  Tensor k = testing::RandomTensor({11, 8}, 2, 3.0);
  Tensor v = testing::RandomTensor({11, 8}, 3, 1.0);
  std::vector<Tensor> weights;
  MultiHeadAttention(q, k, v, Tensor::Identity(8), 4, &weights);
  ASSERT_EQ(weights.size(), 4u);
  for (const auto &w : weights) {
    for (std::size_t i = 0; i < w.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < w.cols(); ++j) {
        ASSERT_GE(w.at(i, j), 0.0);
        s += w.at(i, j);
      }
      ASSERT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Emformer, AttentionProjectionGradientsMatchFiniteDifferences) {
  EmformerConfig cfg = SmallConfig(2, 2);
  ModelParams base = MakeParams(cfg, 21);
  Tensor x = testing::RandomTensor({7, cfg.input_dim}, 22, 1.0);
  ModelParams checked;
  for (std::size_t l = 0; l < cfg.num_layers; ++l)
    for (const char *w : {"attn.wq", "attn.wk", "attn.wv"}) {
      const std::string name = EncoderLayerPrefix(l) + w;
      checked.Add(name, Component::kEncoder, base.Get(name).Clone());
    }
  auto loss = [&](const ModelParams &sub) {
    ModelParams full;
    for (const auto &param : base.params()) {
      full.Add(param.name, param.component,
               sub.Contains(param.name) ? sub.Get(param.name) : param.value);
    }
    return Sum(EncoderForward(x, cfg, full, Mode::kEval, nullptr));
  };
  GradCheckOptions opts;
  opts.step = 1e-5;
  opts.max_coords = 300;
  auto result = FiniteDifferenceCheck(loss, checked, opts);
  EXPECT_EQ(result.coords_checked, 300u);
  EXPECT_LE(result.max_rel_error, 1e-4) << result.worst_param << "[" << result.worst_index << "]";
}

}  // namespace
}  // namespace nrt
