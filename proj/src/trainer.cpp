#include "tubedetr/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "tubedetr/checkpoint.hpp"
#include "tubedetr/errors.hpp"
#include "tubedetr/ops.hpp"
#include "tubedetr/tape.hpp"

namespace tubedetr {

Prediction predict(const TubeDetr& model, const Vocabulary& vocab, const SyntheticSample& sample) {
  NoGradScope no_grad;
  const nn::Context ctx{false, nullptr};
  const auto out = model.forward(sample.video, vocab.encode(sample.annotation.query), ctx);
  const auto& final = out.final_prediction();
  return {sample.annotation.video_id, decode_tube(final), boxes_from_tensor(final.boxes)};
}

SampleMetrics score_prediction(const Prediction& p, const AnnotationRecord& a) {
  const Tube gt{a.t_start, a.t_end, a.boxes};
  return evaluate_sample(p.tube, p.frame_boxes, gt);
}

nlohmann::ordered_json prediction_to_json(const Prediction& p) {
  return {{"video_id", p.video_id},
          {"t_s", p.tube.t_start},
          {"t_e", p.tube.t_end},
          {"boxes", p.tube.boxes},
          {"frame_boxes", p.frame_boxes}};
}

Prediction prediction_from_json(const nlohmann::json& j, std::size_t frames) {
  Prediction p;
  try {
    p.video_id = j.at("video_id").get<std::string>();
    p.tube.t_start = j.at("t_s").get<std::size_t>();
    p.tube.t_end = j.at("t_e").get<std::size_t>();
    p.tube.boxes = j.at("boxes").get<std::vector<CenterBox>>();
    if (j.contains("frame_boxes")) p.frame_boxes = j.at("frame_boxes").get<std::vector<CenterBox>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("prediction: ") + e.what());
  }
  if (p.tube.t_end < p.tube.t_start || p.tube.t_end >= frames) {
    throw ValidationError("prediction '" + p.video_id + "': span outside the video");
  }
  if (p.tube.boxes.size() != p.tube.length()) {
    throw ValidationError("prediction '" + p.video_id + "': box count does not match [t_s, t_e]");
  }
  if (p.frame_boxes.empty()) {
    p.frame_boxes.assign(frames, CenterBox{0.0, 0.0, 0.0, 0.0});
    for (std::size_t t = p.tube.t_start; t <= p.tube.t_end; ++t) p.frame_boxes[t] = p.tube.boxes[t - p.tube.t_start];
  } else if (p.frame_boxes.size() != frames) {
    throw ValidationError("prediction '" + p.video_id + "': expected " + std::to_string(frames) + " frame boxes");
  }
  return p;
}

MetricReport evaluate_model(const TubeDetr& model, const Vocabulary& vocab, const std::vector<SyntheticSample>& samples,
                            std::vector<Prediction>* predictions) {
  std::vector<SampleMetrics> scores;
  scores.reserve(samples.size());
  for (const auto& s : samples) {
    auto p = predict(model, vocab, s);
    scores.push_back(score_prediction(p, s.annotation));
    if (predictions) predictions->push_back(std::move(p));
  }
  return aggregate_metrics(scores);
}

std::size_t planned_steps(const RunConfig& config, std::size_t n_train) {
  const std::size_t per_epoch = (n_train + config.batch_size - 1) / config.batch_size;
  const std::size_t total = config.epochs * per_epoch;
  return config.max_steps > 0 ? std::min(total, config.max_steps) : total;
}

Trainer::Trainer(const RunConfig& config, std::size_t total_steps)
    : config_(config),
      vocab_(Vocabulary::synthetic_grammar()),
      dropout_rng_(mix_seed(config.seed, 1)),
      augment_rng_(mix_seed(config.seed, 2)),
      shuffle_rng_(mix_seed(config.seed, 3)) {
  config_.validate();
  model_ = std::make_unique<TubeDetr>(config_.model_config());
  optimizer_ = std::make_unique<AdamW>(config_.optimizer_config(total_steps), model_->parameters());
}

StepRecord Trainer::train_step(const std::vector<const SyntheticSample*>& batch) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  model_->parameters().zero_grads();
  const double inv = 1.0 / static_cast<double>(batch.size());
  const nn::Context ctx{true, &dropout_rng_};
  StepRecord rec;
  for (const auto* sample : batch) {
    const auto s = augment_sample(*sample, config_.augment_config(), augment_rng_);
    Tape tape;
    LossBreakdown loss;
    {
      TapeScope scope(tape);
      const auto out = model_->forward(s.video, vocab_.encode(s.annotation.query), ctx);
      loss = model_->loss(out, s.annotation.ground_truth(), config_.loss_weights());
      backward(ops::scale(loss.total, inv), tape);
    }
    rec.loss += loss.total.item() * inv;
    rec.l1 += loss.l1 * inv;
    rec.giou += loss.giou * inv;
    rec.kl += loss.kl * inv;
    rec.att += loss.att * inv;
  }
  optimizer_->step();
  rec.step = optimizer_->state().step;
  return rec;
}

MetricReport Trainer::evaluate(const std::vector<SyntheticSample>& samples, std::vector<Prediction>* predictions) {
  optimizer_->swap_ema();
  MetricReport r;
  try {
    r = evaluate_model(*model_, vocab_, samples, predictions);
  } catch (...) {
    optimizer_->swap_ema();
    throw;
  }
  optimizer_->swap_ema();
  return r;
}

LossBreakdown Trainer::eval_loss(const SyntheticSample& sample) const {
  NoGradScope no_grad;
  const nn::Context ctx{false, nullptr};
  const auto out = model_->forward(sample.video, vocab_.encode(sample.annotation.query), ctx);
  return model_->loss(out, sample.annotation.ground_truth(), config_.loss_weights());
}

void Trainer::save(const std::filesystem::path& dir) const {
  save_checkpoint(dir, model_->parameters(), &optimizer_->state(), config_.to_json());
}

void Trainer::load(const std::filesystem::path& dir) { load_checkpoint(dir, model_->parameters(), &optimizer_->state()); }

TrainResult Trainer::fit(const std::vector<SyntheticSample>& train, const std::vector<SyntheticSample>& val,
                         bool write_outputs, std::ostream* log) {
  if (train.empty()) throw ConfigError("train: the training split is empty");
  const std::filesystem::path out_dir = config_.output_dir;
  std::ofstream loss_csv;
  if (write_outputs) {
    std::filesystem::create_directories(out_dir);
    config_.save((out_dir / "config.json").string());
    loss_csv.open(out_dir / "loss.csv");
    loss_csv << "step,loss,l1,giou,kl,att\n";
    loss_csv.precision(17);
    save(out_dir / "checkpoint");
  }

  TrainResult result;
  const std::size_t limit = planned_steps(config_, train.size());
  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = 0; epoch < config_.epochs && result.steps.size() < limit; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng_.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    }
    for (std::size_t b = 0; b < order.size() && result.steps.size() < limit; b += config_.batch_size) {
      std::vector<const SyntheticSample*> batch;
      for (std::size_t i = b; i < std::min(order.size(), b + config_.batch_size); ++i) batch.push_back(&train[order[i]]);
      const auto rec = train_step(batch);
      result.steps.push_back(rec);
      if (write_outputs) {
        loss_csv << rec.step << ',' << rec.loss << ',' << rec.l1 << ',' << rec.giou << ',' << rec.kl << ','
                 << rec.att << '\n';
      }
    }
    const bool last = epoch + 1 == config_.epochs || result.steps.size() >= limit;
    if ((epoch + 1) % config_.eval_every_epochs == 0 || last) {
      nlohmann::ordered_json m;
      m["epoch"] = epoch + 1;
      m["step"] = optimizer_->state().step;
      m["train"] = nlohmann::ordered_json::parse(evaluate(train).to_json());
      if (!val.empty()) m["val"] = nlohmann::ordered_json::parse(evaluate(val).to_json());
      if (log) {
        *log << "epoch " << epoch + 1 << " step " << optimizer_->state().step << " loss "
             << result.steps.back().loss << " train m_vIoU " << m["train"]["m_viou"].get<double>() << " m_tIoU "
             << m["train"]["m_tiou"].get<double>();
        if (!val.empty()) {
          *log << " val m_vIoU " << m["val"]["m_viou"].get<double>() << " m_tIoU " << m["val"]["m_tiou"].get<double>();
        }
        *log << std::endl;
      }
      if (write_outputs) {
        char name[40];
        std::snprintf(name, sizeof(name), "metrics_epoch_%03zu.json", epoch + 1);
        std::ofstream(out_dir / name) << m.dump(2) << '\n';
      }
      result.epoch_metrics.push_back(std::move(m));
    }
    if (write_outputs) save(out_dir / "checkpoint");
  }
  return result;
}

}  // namespace tubedetr
