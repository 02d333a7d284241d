#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

#include <json.hpp>

#include "tubedetr/metrics.hpp"
#include "tubedetr/model.hpp"
#include "tubedetr/optimizer.hpp"
#include "tubedetr/run_config.hpp"
#include "tubedetr/synthetic.hpp"

namespace tubedetr {

struct Prediction {
  std::string video_id;
  DecodedTube tube;
  std::vector<CenterBox> frame_boxes;  // predicted box for every frame
};

// Deterministic inference (no dropout, no tape).
Prediction predict(const TubeDetr& model, const Vocabulary& vocab, const SyntheticSample& sample);

SampleMetrics score_prediction(const Prediction& prediction, const AnnotationRecord& annotation);

nlohmann::ordered_json prediction_to_json(const Prediction& p);
// "frame_boxes" is optional; without it only the decoded tube's boxes are known
// and other frames count as empty boxes for sIoU.
Prediction prediction_from_json(const nlohmann::json& j, std::size_t frames);

struct StepRecord {
  std::size_t step = 0;
  double loss = 0.0;  // weighted objective, mean over the batch
  double l1 = 0.0, giou = 0.0, kl = 0.0, att = 0.0;  // unweighted, mean over the batch
};

struct TrainResult {
  std::vector<StepRecord> steps;
  std::vector<nlohmann::ordered_json> epoch_metrics;
};

/// Owns a model and its optimizer for one run.
class Trainer {
 public:
  explicit Trainer(const RunConfig& config, std::size_t total_steps = 0);

  // One optimizer update from per-sample gradients averaged over `batch`.
  StepRecord train_step(const std::vector<const SyntheticSample*>& batch);

  // Epoch loop. With write_outputs, creates output_dir with config.json,
  // loss.csv, metrics_epoch_NNN.json and checkpoint/ (written before the
  // first update and after every epoch).
  TrainResult fit(const std::vector<SyntheticSample>& train, const std::vector<SyntheticSample>& val,
                  bool write_outputs = true, std::ostream* log = nullptr);

  // Metrics with EMA weights swapped in when EMA is on.
  MetricReport evaluate(const std::vector<SyntheticSample>& samples, std::vector<Prediction>* predictions = nullptr);
  // Deterministic loss of one sample (no dropout).
  LossBreakdown eval_loss(const SyntheticSample& sample) const;

  void save(const std::filesystem::path& dir) const;
  void load(const std::filesystem::path& dir);

  TubeDetr& model() { return *model_; }
  const TubeDetr& model() const { return *model_; }
  AdamW& optimizer() { return *optimizer_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const RunConfig& config() const { return config_; }

 private:
  RunConfig config_;
  Vocabulary vocab_;
  std::unique_ptr<TubeDetr> model_;
  std::unique_ptr<AdamW> optimizer_;
  Rng dropout_rng_;
  Rng augment_rng_;
  Rng shuffle_rng_;
};

// Steps a run will take: epochs * ceil(n_train / batch_size), capped by max_steps.
std::size_t planned_steps(const RunConfig& config, std::size_t n_train);

MetricReport evaluate_model(const TubeDetr& model, const Vocabulary& vocab, const std::vector<SyntheticSample>& samples,
                            std::vector<Prediction>* predictions = nullptr);

}  // namespace tubedetr
