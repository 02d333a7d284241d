#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../support/gradcheck.hpp"
#include "tubedetr/errors.hpp"
#include "tubedetr/model.hpp"
#include "tubedetr/positional.hpp"

using namespace tubedetr;
using testing::random_tensor;

namespace {

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

EncoderConfig micro_encoder(std::size_t k, std::size_t layers = 1) {
  EncoderConfig c;
  c.k = k;
  c.layers = layers;
  c.dim = 8;
  c.heads = 2;
  c.ffn_dim = 16;
  c.dropout = 0.0;
  return c;
}

bool has_param(const ParameterStore& s, const std::string& prefix) {
  return std::any_of(s.all().begin(), s.all().end(), [&](const Parameter& p) { return p.name.rfind(prefix, 0) == 0; });
}

}  // namespace

TEST_CASE("sinusoidal encodings") {
  const auto pe = sinusoid_table(6, 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(pe.at(i) == (i % 2 == 0 ? 0.0 : 1.0));
  const auto pe2 = sinusoid_table(2, 2);
  CHECK(std::abs(pe2.at(2) - 0.84147) < 1e-5);
  CHECK(std::abs(pe2.at(3) - 0.54030) < 1e-5);
  CHECK_THROWS_AS(sinusoid_table(3, 5), ConfigError);
  const auto pe2d = sinusoid_table_2d(2, 3, 8);
  CHECK(pe2d.shape() == Shape{6, 8});
  // Tokens on the same row share the first half, same column the second half.
  for (std::size_t c = 0; c < 4; ++c) CHECK(pe2d.at(0 * 8 + c) == pe2d.at(2 * 8 + c));
  for (std::size_t c = 4; c < 8; ++c) CHECK(pe2d.at(1 * 8 + c) == pe2d.at(4 * 8 + c));
}

TEST_CASE("patch embedding") {
  ParameterStore store(1);
  PatchEmbedding pe(store, 3, 4, 8);
  Rng rng(2);
  const auto out = pe(random_tensor({1, 3, 8, 8}, rng));
  CHECK(out.tokens() == 4);
  CHECK(out.features.shape() == Shape{1, 4, 8});

  const auto zero = pe(Tensor::zeros({1, 3, 8, 8}));
  CHECK(bitwise_equal(zero.features.data(), zero.positional.data()));

  auto frame = random_tensor({1, 3, 8, 8}, rng);
  auto two = ops::concat({frame, frame}, 0);
  const auto f2 = pe(two).features;
  CHECK(bitwise_equal(f2.data().subspan(0, 32), f2.data().subspan(32, 32)));

  CHECK_THROWS_WITH_AS(pe(Tensor::zeros({1, 3, 10, 8})), doctest::Contains("4"), DimensionError);
}

TEST_CASE("text encoder") {
  const auto vocab = Vocabulary::synthetic_grammar();
  CHECK(vocab.encode("the red square").size() == 3);
  const auto ids = vocab.encode("the purple square");
  CHECK(ids[1] == Vocabulary::kUnkId);
  CHECK(Vocabulary::from_json(vocab.to_json()) == vocab);

  ParameterStore store(3);
  TextEncoder enc(store, vocab.size(), 16, 8, 2, 16, 0.0);
  const nn::Context ctx;
  const auto a = enc(vocab.encode("the red square"), ctx), b = enc(vocab.encode("the red square"), ctx);
  CHECK(a.length() == 3);
  CHECK(bitwise_equal(a.features.data(), b.features.data()));
  CHECK(enc(ids, ctx).length() == 3);
  for (const auto& p : store.all()) CHECK(p.group == ParamGroup::kTextEncoder);
}

TEST_CASE("clip sampling and replication indices") {
  CHECK(clip_frame_indices(10, 5) == std::vector<std::size_t>{0, 5});
  CHECK(clip_frame_indices(7, 5) == std::vector<std::size_t>{0, 5});
  CHECK(replication_indices(7, 5) == std::vector<std::size_t>{0, 0, 0, 0, 0, 1, 1});
  Rng rng(4);
  const auto x = random_tensor({5, 2, 3}, rng);
  CHECK(bitwise_equal(temporal_subsample(x, 1).data(), x.data()));
}

TEST_CASE("slow branch keeps clips independent") {
  ParameterStore store(5);
  VideoTextEncoder enc(store, micro_encoder(1, 2));
  Rng rng(6);
  auto x = random_tensor({2, 4, 8}, rng);
  const auto y = random_tensor({3, 8}, rng);
  const nn::Context ctx;
  const auto base = enc.slow_encode(x, y, ctx);
  CHECK(base.h.shape() == Shape{2, 7, 8});

  auto same = ops::concat({ops::slice(x, 0, 0, 1), ops::slice(x, 0, 0, 1)}, 0);
  const auto s = enc.slow_encode(same, y, ctx);
  CHECK(bitwise_equal(s.h.data().subspan(0, 56), s.h.data().subspan(56, 56)));

  auto perturbed = x.clone();
  for (std::size_t i = 0; i < 32; ++i) perturbed.mutable_data()[i] += 0.5;
  const auto p = enc.slow_encode(perturbed, y, ctx);
  CHECK(bitwise_equal(p.h.data().subspan(56, 56), base.h.data().subspan(56, 56)));
  CHECK_FALSE(bitwise_equal(p.h.data().subspan(0, 56), base.h.data().subspan(0, 56)));
}

TEST_CASE("zero-depth slow branch is the concatenation") {
  ParameterStore store(7);
  auto cfg = micro_encoder(1, 0);
  VideoTextEncoder enc(store, cfg);
  Rng rng(8);
  const auto x = random_tensor({1, 4, 8}, rng), y = random_tensor({3, 8}, rng);
  const auto s = enc.slow_encode(x, y, nn::Context{});
  CHECK(bitwise_equal(s.h.data(), ops::concat({x, ops::reshape(y, {1, 3, 8})}, 1).data()));
}

TEST_CASE("inert fast branch creates no parameters and passes slow output through") {
  ParameterStore store(9);
  VideoTextEncoder enc(store, micro_encoder(1));
  CHECK_FALSE(has_param(store, "encoder.fast"));
  CHECK_FALSE(has_param(store, "encoder.aggregation"));
  CHECK_THROWS(enc.fast_branch(Tensor::zeros({2, 4, 8}), nn::Context{}));

  auto cfg = micro_encoder(3);
  cfg.fast_enabled = false;
  ParameterStore store2(9);
  VideoTextEncoder enc2(store2, cfg);
  CHECK_FALSE(has_param(store2, "encoder.fast"));

  Rng rng(10);
  FrameFeatures x0{random_tensor({5, 4, 8}, rng), Tensor::zeros({4, 8}), 2, 2};
  TextFeatures y0{random_tensor({3, 8}, rng), {2, 3, 4}};
  const auto F = enc2(x0, y0, nn::Context{});
  const auto slow = enc2.slow_encode(temporal_subsample(x0.features, 3), y0.features, nn::Context{});
  CHECK(F.features.shape() == Shape{5, 7, 8});
  // Frames 0-2 carry clip 0, frames 3-4 carry clip 1.
  for (std::size_t t = 0; t < 5; ++t) {
    CHECK(bitwise_equal(F.features.data().subspan(t * 56, 56), slow.h.data().subspan((t / 3) * 56, 56)));
  }
}

TEST_CASE("aggregation formulas") {
  ParameterStore store(11);
  auto cfg = micro_encoder(5);
  VideoTextEncoder enc(store, cfg);
  Rng rng(12);
  SlowOutput slow{random_tensor({2, 7, 8}, rng), 4};
  const nn::Context ctx;

  SUBCASE("f = 0 with zero bias: F_v = Linear(h_v) + h_v") {
    const auto& lin = store.find("encoder.aggregation.linear.bias");
    for (double b : lin.value.data()) CHECK(b == 0.0);
    const auto out = enc.aggregate(slow, Tensor::zeros({7, 4, 8}), 7, ctx);
    const auto& W = store.find("encoder.aggregation.linear.weight").value;
    const auto hv = slow.visual();
    for (std::size_t t = 0; t < 7; ++t) {
      const std::size_t m = t / 5;
      for (std::size_t tok = 0; tok < 4; ++tok)
        for (std::size_t o = 0; o < 8; ++o) {
          double expect = 0.0;
          for (std::size_t i = 0; i < 8; ++i) expect += W.at(o * 8 + i) * hv.at((m * 4 + tok) * 8 + i);
          expect += hv.at((m * 4 + tok) * 8 + o);
          CHECK(std::abs(out.features.at((t * 7 + tok) * 8 + o) - expect) < 1e-13);
        }
      // Text tokens are copied from the clip.
      for (std::size_t i = 4 * 8; i < 7 * 8; ++i) CHECK(out.features.at(t * 56 + i) == slow.h.at(m * 56 + i));
    }
  }

  SUBCASE("zero weights give zero fast output") {
    for (auto& p : store.all())
      if (p.name.rfind("encoder.fast", 0) == 0)
        for (auto& v : p.value.mutable_data()) v = 0.0;
    const auto f = enc.fast_branch(random_tensor({7, 4, 8}, rng), ctx);
    for (double v : f.data()) CHECK(v == 0.0);
  }
}

TEST_CASE("spatial pooled fast branch is invariant to token permutations") {
  ParameterStore store(13);
  auto cfg = micro_encoder(2);
  cfg.aggregation = AggregationVariant::kSpatialPooled;
  VideoTextEncoder enc(store, cfg);
  Rng rng(14);
  const auto a = random_tensor({1, 4, 8}, rng);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  const auto b = ops::index_select(a, 1, perm);
  const auto fa = enc.fast_branch(a, nn::Context{}), fb = enc.fast_branch(b, nn::Context{});
  for (std::size_t i = 0; i < fa.size(); ++i) CHECK(std::abs(fa.at(i) - fb.at(i)) < 1e-14);
}

TEST_CASE("fast branch does not backpropagate into the backbone") {
  ParameterStore store(15);
  VideoTextEncoder enc(store, micro_encoder(2));
  Rng rng(16);
  auto x = random_tensor({4, 4, 8}, rng);
  x.set_requires_grad(true);
  {
    Tape tape;
    TapeScope scope(tape);
    backward(testing::probe(enc.fast_branch(x, nn::Context{})), tape);
  }
  CHECK_FALSE(x.has_grad());
  CHECK(store.find("encoder.fast.linear.weight").value.has_grad());

  // Through the whole encoder: frames 1 and 3 are never sampled by the slow
  // branch (k = 2), so their backbone features only reach F via f and must
  // receive no gradient.
  FrameFeatures x0{random_tensor({4, 4, 8}, rng), Tensor::zeros({4, 8}), 2, 2};
  x0.features.set_requires_grad(true);
  TextFeatures y0{random_tensor({3, 8}, rng), {2, 3, 4}};
  {
    Tape tape;
    TapeScope scope(tape);
    backward(testing::probe(enc(x0, y0, nn::Context{}).features), tape);
  }
  const auto g = x0.features.grad();
  auto any_nonzero = [&](std::size_t t) {
    return std::any_of(g.begin() + t * 32, g.begin() + (t + 1) * 32, [](double v) { return v != 0.0; });
  };
  CHECK(any_nonzero(0));
  CHECK(any_nonzero(2));
  CHECK_FALSE(any_nonzero(1));
  CHECK_FALSE(any_nonzero(3));
}

TEST_CASE("time queries") {
  Rng rng(17);
  const auto obj = random_tensor({8}, rng);
  const auto q = build_time_queries(6, obj, DecoderAblation{});
  const auto pe = sinusoid_table(6, 8);
  for (std::size_t i = 0; i < 48; ++i) CHECK(q.at(i) == obj.at(i % 8) + pe.at(i));
  const auto flat = build_time_queries(6, obj, DecoderAblation{false, true});
  CHECK(bitwise_equal(flat.data().subspan(0, 8), flat.data().subspan(40, 8)));
}

TEST_CASE("cross-attention mask is block diagonal") {
  const auto m = build_cross_attention_mask(2, 2, 1);
  CHECK(m.allowed == std::vector<std::uint8_t>{1, 1, 1, 0, 0, 0, 0, 0, 0, 1, 1, 1});
  const auto one = build_cross_attention_mask(1, 4, 3);
  CHECK(one.count_allowed() == 7);
  CHECK(build_cross_attention_mask(5, 4, 3).count_allowed() == 5 * 7);
}

TEST_CASE("decoder records and zero depth") {
  DecoderConfig cfg{0, 8, 2, 16, 0.0};
  ParameterStore store(18);
  SpaceTimeDecoder dec(store, cfg);
  Rng rng(19);
  EncoderOutput F{random_tensor({3, 5, 8}, rng), 4, 1};
  const auto q = random_tensor({3, 8}, rng);
  const auto out = dec(q, F, DecoderAblation{}, nn::Context{});
  CHECK(out.queries.empty());
  CHECK(out.output.same_storage(q));

  ParameterStore store2(20);
  SpaceTimeDecoder dec2(store2, DecoderConfig{2, 8, 2, 16, 0.0});
  const auto out2 = dec2(F, DecoderAblation{}, nn::Context{});
  CHECK(out2.layers() == 2);
  CHECK(out2.self_attention.at(0).shape() == Shape{2, 3, 3});
  CHECK(out2.cross_attention.at(1).shape() == Shape{2, 3, 15});
  const auto out3 = dec2(F, DecoderAblation{true, false}, nn::Context{});
  CHECK(out3.self_attention.empty());
}

TEST_CASE("decoder without time encoding or self-attention decodes frames independently") {
  ParameterStore store(21);
  SpaceTimeDecoder dec(store, DecoderConfig{2, 8, 2, 16, 0.0});
  const DecoderAblation off{false, false};
  Rng rng(22);
  EncoderOutput F{random_tensor({4, 5, 8}, rng), 4, 1};
  const auto base = dec(F, off, nn::Context{});

  auto G = F;
  G.features = F.features.clone();
  for (std::size_t i = 2 * 40; i < 3 * 40; ++i) G.features.mutable_data()[i] += rng.uniform(-1, 1);
  const auto pert = dec(G, off, nn::Context{});
  for (std::size_t t = 0; t < 4; ++t) {
    const bool same = bitwise_equal(base.output.data().subspan(t * 8, 8), pert.output.data().subspan(t * 8, 8));
    CHECK(same == (t != 2));
  }

  const std::vector<std::size_t> perm{2, 0, 3, 1};
  EncoderOutput P{ops::index_select(F.features, 0, perm), 4, 1};
  const auto permuted = dec(P, off, nn::Context{});
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(bitwise_equal(permuted.output.data().subspan(i * 8, 8), base.output.data().subspan(perm[i] * 8, 8)));
  }
}

TEST_CASE("prediction heads") {
  ParameterStore store(23);
  PredictionHeads heads(store, 8, 0.0);
  Rng rng(24);
  const auto out = heads(random_tensor({5, 8}, rng, -5, 5), nn::Context{});
  for (double v : out.boxes.data()) CHECK((v > 0.0 && v < 1.0));
  double total = 0.0;
  for (double v : out.start_prob.data()) total += v;
  CHECK(std::abs(total - 1.0) < 1e-14);

  for (auto& p : store.all())
    for (auto& v : p.value.mutable_data()) v = 0.0;
  const auto zero = heads(random_tensor({4, 8}, rng), nn::Context{});
  for (double v : zero.boxes.data()) CHECK(v == 0.5);
  for (double v : zero.start_prob.data()) CHECK(v == 0.25);

  ParameterStore store2(25);
  PredictionHeads h2(store2, 8, 0.0);
  const auto row = random_tensor({1, 8}, rng);
  const auto same = h2(ops::concat({row, row, row}, 0), nn::Context{});
  CHECK(bitwise_equal(same.boxes.data().subspan(0, 4), same.boxes.data().subspan(8, 4)));
}

TEST_CASE("configuration errors") {
  auto cfg = micro_encoder(0);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = micro_encoder(1);
  cfg.heads = 3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
