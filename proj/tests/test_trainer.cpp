// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "diar/error.hpp"
#include "diar/trainer.hpp"

using namespace diar;

namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("f" + std::to_string(i));
  return out;
}

// Tone rows are class 1, low noise rows class 0.
TrainItem tone_item(const std::string& id, std::size_t rows, std::size_t width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
  TrainItem item{id, nn::Tensor({rows, width}), std::vector<int>(rows)};
  for (std::size_t r = 0; r < rows; ++r) {
    const int y = static_cast<int>((r * 7 + seed) % 5 < 2);
    item.labels[r] = y;
    const double ph = phase(rng);
    for (std::size_t c = 0; c < width; ++c) {
      item.inputs.data[r * width + c] = noise(rng) + (y ? 0.3 * std::sin(0.4 * c + ph) : 0.0);
    }
  }
  return item;
}

DatasetSplits tone_splits(std::size_t width) {
  DatasetSplits d;
  for (int f = 0; f < 6; ++f) d.train.push_back(tone_item("t" + std::to_string(f), 80, width, 10 + f));
  d.validation.push_back(tone_item("v0", 60, width, 30));
  d.test.push_back(tone_item("s0", 60, width, 40));
  d.test.push_back(tone_item("s1", 60, width, 41));
  return d;
}

}  // namespace

TEST_CASE("split_files sizes") {
  auto sizes = [](const SplitPlan& p) {
    return std::array<std::size_t, 3>{p.train.size(), p.validation.size(), p.test.size()};
  };
  CHECK(sizes(split_files(ids(37), 1)) == std::array<std::size_t, 3>{27, 5, 5});
  CHECK(sizes(split_files(ids(20), 1)) == std::array<std::size_t, 3>{14, 3, 3});
  CHECK(sizes(split_files(ids(3), 1)) == std::array<std::size_t, 3>{3, 0, 0});
  CHECK(split_files(ids(37), 9) == split_files(ids(37), 9));
  CHECK_FALSE(split_files(ids(37), 9) == split_files(ids(37), 10));
  CHECK_THROWS_AS(split_files(ids(2), 1), Error);
}

TEST_CASE("split_files partitions the inputs") {
  for (std::size_t n = 3; n <= 50; ++n) {
    const auto all = ids(n);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto p = split_files(all, seed);
      std::multiset<std::string> seen(p.train.begin(), p.train.end());
      seen.insert(p.validation.begin(), p.validation.end());
      seen.insert(p.test.begin(), p.test.end());
      REQUIRE(seen == std::multiset<std::string>(all.begin(), all.end()));
      CHECK(p.validation.size() == n * 15 / 100);
      CHECK(p.test.size() == n * 15 / 100);
    }
  }
}

TEST_CASE("prepare_rnn_input reshapes row-major and drops the residue") {
  std::vector<double> x(1102);
  std::iota(x.begin(), x.end(), 0.0);
  const auto t = prepare_rnn_input(x, 22);
  CHECK(t.dims == std::vector<std::size_t>{22, 50});
  for (std::size_t r = 0; r < 22; ++r) {
    for (std::size_t c = 0; c < 50; ++c) CHECK(t.data[r * 50 + c] == x[r * 50 + c]);
  }
  CHECK(std::find(t.data.begin(), t.data.end(), 1100.0) == t.data.end());

  std::vector<double> y(100);
  std::iota(y.begin(), y.end(), 0.0);
  const auto u = prepare_rnn_input(y, 10);
  CHECK(u.dims == std::vector<std::size_t>{10, 10});
  CHECK(u.data == y);
  CHECK_THROWS_AS(prepare_rnn_input(y, 101), Error);
}

TEST_CASE("model catalog") {
  const auto names = catalog_names();
  CHECK(names.size() == 8);
  for (const auto& name : names) {
    const auto spec = catalog_spec(name);
    spec.validate();
    nn::check_params(spec, nn::init_params(spec, 0));
  }
  CHECK(catalog_spec("slp-100").hidden == std::vector<int>{100});
  CHECK(catalog_spec("slp-200").hidden == std::vector<int>{200});
  CHECK(catalog_spec("slp-500").hidden == std::vector<int>{500});
  CHECK(catalog_spec("mlp-100-50").hidden == std::vector<int>{100, 50});
  CHECK(catalog_spec("mlp-200-100").hidden == std::vector<int>{200, 100});
  CHECK(catalog_spec("mlp-300-50").hidden == std::vector<int>{300, 50});
  const auto rnn = catalog_spec("rnn-3x150");
  CHECK(rnn.lstm_layers == 3);
  CHECK(rnn.lstm_cells == 150);
  CHECK(rnn.steps == 22);
  CHECK(rnn.step_width == 50);
  const auto cnn = catalog_spec("cnn");
  CHECK(cnn.input_shape == std::array<int, 3>{1, 129, 4});
  const auto p = nn::init_params(cnn, 0);
  CHECK(p.at("conv0.K").dims == std::vector<std::size_t>{16, 1, 3, 3});
  CHECK(p.at("conv1.K").dims == std::vector<std::size_t>{32, 16, 3, 1});
  CHECK(p.at("dense0.W").dims == std::vector<std::size_t>{61 * 1 * 32, 64});
  CHECK(catalog_spec("mlp-100-50").input_width == 1102);
  CHECK(catalog_spec("slp-100", 4).n_outputs == 4);
  CHECK_THROWS_AS(catalog_spec("slp-7"), Error);
}

TEST_CASE("accuracy helpers") {
  std::vector<int> truth(100, 0), pred(100, 0);
  for (int i = 0; i < 10; ++i) pred[i] = 1;
  CHECK(file_accuracy(pred, truth) == doctest::Approx(0.90));
  CHECK(file_accuracy(truth, truth) == 1.0);
  std::vector<int> a{0, 1, 1, 0}, b{1, 0, 0, 1};
  CHECK(file_accuracy(a, b) == 0.0);
  CHECK_THROWS_AS(file_accuracy(a, std::vector<int>{1}), Error);

  CHECK(average_accuracy(std::vector<double>{0.88, 0.90, 0.92}) == doctest::Approx(0.90).epsilon(1e-15));
  CHECK(average_accuracy(std::vector<double>{0.37}) == 0.37);
  CHECK_THROWS_AS(average_accuracy(std::vector<double>{}), Error);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs(1 + trial);
    for (auto& x : xs) x = u(rng);
    // Pairwise fold as an independent summation order.
    std::vector<double> fold(xs);
    while (fold.size() > 1) {
      std::vector<double> next;
      for (std::size_t i = 0; i < fold.size(); i += 2) next.push_back(fold[i] + (i + 1 < fold.size() ? fold[i + 1] : 0.0));
      fold.swap(next);
    }
    CHECK(std::abs(average_accuracy(xs) - fold[0] / xs.size()) <= 1e-12);
  }

  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> p(40), t(40), flipped(40);
    for (int i = 0; i < 40; ++i) {
      p[i] = coin(rng);
      t[i] = coin(rng);
      flipped[i] = 1 - p[i];
    }
    CHECK(file_accuracy(p, t) == doctest::Approx(1.0 - file_accuracy(flipped, t)).epsilon(1e-15));
  }
}

TEST_CASE("majority baseline") {
  std::vector<int> forty(100, 0);
  for (int i = 0; i < 40; ++i) forty[i] = 1;
  CHECK(majority_baseline(forty) == doctest::Approx(0.60));
  CHECK(majority_baseline(std::vector<int>(9, 1)) == 1.0);
  CHECK(majority_baseline(std::vector<int>{0, 1, 2, 3, 3, 2, 1, 0}) == 0.25);
  CHECK_THROWS_AS(majority_baseline(std::vector<int>{}), Error);
}

TEST_CASE("predict_segments applies the logit rule") {
  const auto spec = nn::ModelSpec::slp(3, 2);
  const auto zero = nn::init_params(spec, 0).zeros_like();
  const auto pred = predict_segments(spec, zero, nn::Tensor({4, 3}));
  CHECK(pred.classes == std::vector<int>(4, 0));
  CHECK_THROWS_AS(predict_segments(spec, zero, nn::Tensor({4, 5})), Error);
}

TEST_CASE("evaluate_files pools items of the same file") {
  const auto spec = nn::ModelSpec::slp(2, 1);
  auto p = nn::init_params(spec, 0).zeros_like();  // always predicts 0
  std::vector<TrainItem> items{{"a", nn::Tensor({2, 2}), {0, 1}}, {"b", nn::Tensor({2, 2}), {0, 0}},
                               {"a", nn::Tensor({2, 2}), {0, 0}}};
  const auto acc = evaluate_files(spec, p, items);
  REQUIRE(acc.size() == 2);
  CHECK(acc[0].file_id == "a");
  CHECK(acc[0].accuracy == 0.75);
  CHECK(acc[1].accuracy == 1.0);
  CHECK(mean_majority_baseline(items) == doctest::Approx((0.75 + 1.0) / 2));
}

TEST_CASE("training separates tone from silence") {
  const auto data = tone_splits(40);
  Hyperparams hp;
  hp.epochs = 5;
  hp.batch_size = 16;
  hp.eval_every = 10;
  hp.seed = 3;
  const auto spec = nn::ModelSpec::slp(40, 16);
  const auto r = train(spec, data, hp);
  REQUIRE(!r.report.validation.empty());
  CHECK(r.report.validation.back().accuracy >= 0.95);
  CHECK(r.report.epochs.size() == 5);
  CHECK(r.report.batch_losses.size() == 5 * ((480 + 15) / 16));
  CHECK(r.report.test.size() == 2);
  CHECK(r.report.mean_test_accuracy ==
        doctest::Approx((r.report.test[0].accuracy + r.report.test[1].accuracy) / 2).epsilon(1e-15));
  for (const auto& e : r.report.epochs) {
    CHECK(e.train_accuracy >= 0.0);
    CHECK(e.train_accuracy <= 1.0);
  }
  CHECK(r.report.epochs.back().train_loss < r.report.epochs.front().train_loss);
}

TEST_CASE("training is deterministic and frozen at zero learning rate") {
  const auto data = tone_splits(24);
  Hyperparams hp;
  hp.epochs = 3;
  hp.batch_size = 32;
  hp.seed = 8;
  const auto spec = nn::ModelSpec::rnn(24, 4, 1, 3, 1);
  const auto a = train(spec, data, hp);
  const auto b = train(spec, data, hp);
  CHECK(a.params == b.params);
  CHECK(a.report.batch_losses == b.report.batch_losses);
  CHECK(format_train_log(a.report) == format_train_log(b.report));

  hp.learning_rate = 0.0;
  const auto frozen = train(spec, data, hp);
  CHECK(frozen.params == nn::init_params(spec, hp.seed));
  for (std::size_t e = 1; e < frozen.report.epochs.size(); ++e) {
    CHECK(frozen.report.epochs[e].train_loss == doctest::Approx(frozen.report.epochs[0].train_loss).epsilon(1e-12));
  }
}

TEST_CASE("training rejects bad inputs") {
  const auto spec = nn::ModelSpec::slp(24, 4);
  Hyperparams hp;
  CHECK_THROWS_AS(train(spec, {}, hp), Error);
  auto data = tone_splits(20);
  CHECK_THROWS_AS(train(spec, data, hp), Error);
  data = tone_splits(24);
  data.train[0].labels[0] = 2;
  CHECK_THROWS_AS(train(spec, data, hp), Error);
  hp.epochs = 0;
  CHECK_THROWS_AS(hp.validate(), Error);
}

TEST_CASE("report formats") {
  TrainReport r;
  r.epochs.push_back({1, 0.5, 0.75});
  r.batch_losses = {0.7, 0.5};
  r.validation.push_back({2, 0.8});
  r.test.push_back({"x", 0.9});
  r.mean_test_accuracy = 0.9;
  r.test_majority_baseline = 0.6;
  const auto log = format_train_log(r);
  CHECK(log.find("epoch 1 train_loss 0.500000000 train_accuracy 0.750000") != std::string::npos);
  CHECK(log.find("test x accuracy 0.900000") != std::string::npos);
  const auto summary = format_train_summary(r);
  CHECK(summary.find("mean_test_accuracy=0.900000\n") != std::string::npos);
  CHECK(summary.find("test_majority_baseline=0.600000\n") != std::string::npos);
  CHECK(summary.find("final_validation_accuracy=0.800000\n") != std::string::npos);
}
