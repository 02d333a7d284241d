#include <doctest.h>

#include "../support/gradcheck.hpp"
#include "tubedetr/errors.hpp"
#include "tubedetr/optimizer.hpp"
#include "tubedetr/tape.hpp"

using namespace tubedetr;

TEST_CASE("tensor invariants") {
  CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), DimensionError);
  const auto t = Tensor::zeros({2, 3});
  CHECK(t.size() == 6);
  CHECK_FALSE(t.has_grad());
  const auto c = t.clone();
  CHECK_FALSE(c.same_storage(t));
  CHECK(Tensor(t).same_storage(t));
}

TEST_CASE("sum backward gives ones") {
  auto x = Tensor::vector({1, 2, 3});
  x.set_requires_grad(true);
  Tape tape;
  Tensor loss;
  {
    TapeScope scope(tape);
    loss = ops::sum(x);
  }
  backward(loss, tape);
  for (double g : x.grad()) CHECK(g == 1.0);
}

TEST_CASE("square backward") {
  auto x = Tensor::scalar(3.0);
  x.set_requires_grad(true);
  Tape tape;
  TapeScope scope(tape);
  const auto loss = ops::mul(x, x);
  backward(loss, tape);
  CHECK(x.grad()[0] == 6.0);
}

TEST_CASE("backward replays in reverse order and accumulates into leaves") {
  auto x = Tensor::vector({2.0});
  x.set_requires_grad(true);
  Tape tape;
  TapeScope scope(tape);
  const auto y = ops::scale(x, 3.0);
  const auto z = ops::add(y, ops::mul(y, x));  // 3x + 3x^2
  CHECK(tape.op_names() == std::vector<std::string>{"scale", "mul", "add"});
  backward(z, tape);
  CHECK(x.grad()[0] == 3.0 + 12.0);
  backward(z, tape);
  CHECK(x.grad()[0] == 30.0);
}

TEST_CASE("no recording without a tape or under NoGradScope") {
  auto x = Tensor::vector({1.0});
  x.set_requires_grad(true);
  Tape tape;
  TapeScope scope(tape);
  {
    NoGradScope ng;
    (void)ops::exp(x);
  }
  CHECK(tape.empty());
  (void)ops::exp(Tensor::vector({1.0}));  // no input requires grad
  CHECK(tape.empty());
}

TEST_CASE("backward rejects non-scalar losses") {
  auto x = Tensor::vector({1.0, 2.0});
  x.set_requires_grad(true);
  Tape tape;
  TapeScope scope(tape);
  const auto y = ops::exp(x);
  CHECK_THROWS(backward(y, tape));
}

TEST_CASE("AdamW leaves parameters unchanged without gradient or decay") {
  ParameterStore store;
  auto w = store.create_filled("w", {3}, 0.7, ParamGroup::kRest);
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  AdamW opt(cfg, store);
  w.mutable_grad();
  store.zero_grads();
  opt.step();
  for (double v : w.data()) CHECK(v == 0.7);
}

TEST_CASE("AdamW single step matches the hand-computed update") {
  ParameterStore store;
  auto w = store.create_filled("w", {1}, 2.0, ParamGroup::kRest);
  AdamWConfig cfg;
  cfg.lr_rest = 0.1;
  cfg.weight_decay = 0.01;
  AdamW opt(cfg, store);
  // Prime known moments: m = 0.5, v = 0.25 at step 3.
  opt.state().first_moment["w"] = {0.5};
  opt.state().second_moment["w"] = {0.25};
  opt.state().step = 3;
  w.mutable_grad()[0] = 1.0;
  opt.step();
  const double m = 0.9 * 0.5 + 0.1 * 1.0, v = 0.999 * 0.25 + 0.001 * 1.0;
  const double mhat = m / (1 - std::pow(0.9, 4)), vhat = v / (1 - std::pow(0.999, 4));
  const double expected = 2.0 * (1 - 0.1 * 0.01) - 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
  CHECK(w.data()[0] == doctest::Approx(expected).epsilon(1e-15));
  CHECK(opt.state().first_moment.at("w")[0] == doctest::Approx(m).epsilon(1e-15));
}

TEST_CASE("AdamW EMA is a convex combination") {
  ParameterStore store;
  auto w = store.create_filled("w", {1}, 0.0, ParamGroup::kRest);
  AdamWConfig cfg;
  cfg.ema = true;
  cfg.ema_decay = 0.5;
  cfg.lr_rest = 0.0;
  cfg.weight_decay = 0.0;
  AdamW opt(cfg, store);
  w.mutable_grad()[0] = 0.0;
  w.mutable_data()[0] = 1.0;  // parameter jumps 0 -> 1
  opt.step();
  CHECK(opt.state().ema_shadow.at("w")[0] == 0.5);
  opt.swap_ema();
  CHECK(w.data()[0] == 0.5);
  opt.swap_ema();
  CHECK(w.data()[0] == 1.0);
}

TEST_CASE("AdamW names a parameter without gradient") {
  ParameterStore store;
  store.create("lonely", {2, 2}, ParamGroup::kRest);
  AdamW opt(AdamWConfig{}, store);
  CHECK_THROWS_WITH_AS(opt.step(), doctest::Contains("lonely"), std::logic_error);
}

TEST_CASE("text learning rate warms up then decays") {
  ParameterStore store;
  AdamWConfig cfg;
  cfg.lr_text = 1.0;
  cfg.text_warmup_steps = 4;
  cfg.total_steps = 12;
  AdamW opt(cfg, store);
  CHECK(opt.learning_rate(ParamGroup::kTextEncoder) == 0.25);
  opt.state().step = 3;
  CHECK(opt.learning_rate(ParamGroup::kTextEncoder) == 1.0);
  opt.state().step = 7;
  CHECK(opt.learning_rate(ParamGroup::kTextEncoder) == 0.5);
  CHECK(opt.learning_rate(ParamGroup::kRest) == cfg.lr_rest);
}
