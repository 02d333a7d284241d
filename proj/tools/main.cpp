#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "tubedetr/attention_export.hpp"
#include "tubedetr/checkpoint.hpp"
#include "tubedetr/complexity.hpp"
#include "tubedetr/dataset.hpp"
#include "tubedetr/errors.hpp"
#include "tubedetr/tape.hpp"
#include "tubedetr/trainer.hpp"

namespace fs = std::filesystem;
using namespace tubedetr;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

// Every RunConfig field as a same-name flag, plus --config. Flags override the
// config file, which overrides the checkpoint's stored config.
struct RunFlags {
  RunConfig scratch;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "Run configuration JSON");
    for (auto& f : scratch.fields()) {
      std::visit([&](auto* p) { options[f.name] = app->add_option("--" + f.name, *p); }, f.ref);
    }
  }

  RunConfig resolve(const nlohmann::json& base = nullptr) {
    RunConfig c = base.is_null() ? RunConfig{} : RunConfig::from_json(base);
    if (!config_path.empty()) {
      auto file = RunConfig::load(config_path).to_json();
      auto merged = c.to_json();
      // Keys that the file sets explicitly win over the base.
      std::ifstream is(config_path);
      const auto raw = nlohmann::json::parse(is);
      for (const auto& [key, value] : raw.items()) merged[key] = file[key];
      c = RunConfig::from_json(merged);
    }
    auto src = scratch.fields();
    auto dst = c.fields();
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (options.at(src[i].name)->count() == 0) continue;
      std::visit(
          [&](auto* from) {
            using T = std::remove_pointer_t<decltype(from)>;
            *std::get<T*>(dst[i].ref) = *from;
          },
          src[i].ref);
    }
    c.validate();
    return c;
  }
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text << '\n';
}

struct LoadedModel {
  RunConfig config;
  std::unique_ptr<Trainer> trainer;
};

LoadedModel load_model(const std::string& checkpoint, RunFlags& flags) {
  const auto info = read_checkpoint_info(checkpoint);
  LoadedModel m;
  m.config = flags.resolve(info.config);
  m.trainer = std::make_unique<Trainer>(m.config);
  m.trainer->load(checkpoint);
  return m;
}

std::vector<SyntheticSample> load_data(const RunConfig& c, const std::string& split) {
  return load_split(c.data_dir, split, c.frame_stride(), c.t_max);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal video grounding on a synthetic corpus"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Render a synthetic dataset");
  RunFlags gen_flags;
  gen_flags.attach(gen);

  auto* train = app.add_subcommand("train", "Train a model");
  RunFlags train_flags;
  train_flags.attach(train);
  bool quiet = false;
  train->add_flag("--quiet", quiet, "Do not log per-epoch progress");

  auto* eval = app.add_subcommand("eval", "Compute grounding metrics");
  RunFlags eval_flags;
  eval_flags.attach(eval);
  std::string eval_ckpt, eval_split = "val", eval_predictions, eval_out;
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint directory");
  eval->add_option("--split", eval_split, "train, val or all")->check(CLI::IsMember({"train", "val", "all"}));
  eval->add_option("--predictions", eval_predictions, "Score a predictions JSON file instead of running a model");
  eval->add_option("--out", eval_out, "Write the report here instead of standard output");

  auto* pred = app.add_subcommand("predict", "Decode tubes for every sample of a split");
  RunFlags pred_flags;
  pred_flags.attach(pred);
  std::string pred_ckpt, pred_split = "val", pred_out;
  pred->add_option("--checkpoint", pred_ckpt, "Checkpoint directory")->required();
  pred->add_option("--split", pred_split, "train, val or all")->check(CLI::IsMember({"train", "val", "all"}));
  pred->add_option("--out", pred_out, "Write predictions here instead of standard output");

  auto* inspect = app.add_subcommand("inspect-attention", "Export decoder attention maps for one video");
  RunFlags insp_flags;
  insp_flags.attach(inspect);
  std::string insp_ckpt, insp_video, insp_out = "attention";
  inspect->add_option("--checkpoint", insp_ckpt, "Checkpoint directory")->required();
  inspect->add_option("--video-id", insp_video, "Sample to inspect")->required();
  inspect->add_option("--out-dir", insp_out, "Directory for CSV / PGM files");

  auto* cx = app.add_subcommand("complexity", "Attention cost report over a (T, k) sweep");
  std::vector<std::uint64_t> sweep_T{200}, sweep_k{5};
  ComplexityInput cx_in;
  cx->add_option("--T", sweep_T, "Frame counts")->expected(1, -1);
  cx->add_option("--k", sweep_k, "Temporal strides")->expected(1, -1);
  cx->add_option("--HW", cx_in.visual_tokens, "Visual tokens per frame");
  cx->add_option("--L", cx_in.text_tokens, "Text tokens");
  cx->add_option("--N", cx_in.layers, "Layers");
  cx->add_option("--d", cx_in.dim, "Model dimension");
  cx->add_option("--heads", cx_in.heads, "Attention heads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (gen->parsed()) {
      const auto c = gen_flags.resolve();
      const auto idx = generate_dataset(c.data_dir, c.n_videos, c.data_seed, c.scene_params());
      std::cout << "wrote " << idx.train.size() << " train and " << idx.val.size() << " val videos to " << c.data_dir
                << '\n';
    } else if (train->parsed()) {
      const auto c = train_flags.resolve();
      const auto train_set = load_data(c, "train");
      const auto val_set = load_data(c, "val");
      Trainer t(c, planned_steps(c, train_set.size()));
      const auto r = t.fit(train_set, val_set, true, quiet ? nullptr : &std::cerr);
      nlohmann::ordered_json summary;
      summary["output_dir"] = c.output_dir;
      summary["steps"] = r.steps.size();
      if (!r.epoch_metrics.empty()) summary["final"] = r.epoch_metrics.back();
      std::cout << summary.dump(2) << '\n';
    } else if (eval->parsed()) {
      if (eval_predictions.empty() == eval_ckpt.empty()) {
        std::cerr << "eval: pass exactly one of --checkpoint or --predictions\n\n" << eval->help();
        return kUsageError;
      }
      MetricReport report;
      if (!eval_predictions.empty()) {
        const auto c = eval_flags.resolve();
        std::map<std::string, AnnotationRecord> truth;
        for (auto& s : load_data(c, eval_split)) truth.emplace(s.annotation.video_id, s.annotation);
        std::ifstream is(eval_predictions);
        if (!is) throw FormatError("cannot open predictions " + eval_predictions);
        nlohmann::json preds;
        try {
          is >> preds;
        } catch (const nlohmann::json::exception& e) {
          throw FormatError(eval_predictions + ": " + e.what());
        }
        std::vector<SampleMetrics> scores;
        for (const auto& j : preds) {
          const auto id = j.value("video_id", std::string{});
          const auto it = truth.find(id);
          if (it == truth.end()) throw ValidationError("prediction for unknown video '" + id + "'");
          scores.push_back(score_prediction(prediction_from_json(j, it->second.frames), it->second));
        }
        report = aggregate_metrics(scores);
      } else {
        auto m = load_model(eval_ckpt, eval_flags);
        report = m.trainer->evaluate(load_data(m.config, eval_split));
      }
      write_output(eval_out, report.to_json());
    } else if (pred->parsed()) {
      auto m = load_model(pred_ckpt, pred_flags);
      std::vector<Prediction> predictions;
      m.trainer->evaluate(load_data(m.config, pred_split), &predictions);
      nlohmann::ordered_json out = nlohmann::ordered_json::array();
      for (const auto& p : predictions) out.push_back(prediction_to_json(p));
      write_output(pred_out, out.dump(1));
    } else if (inspect->parsed()) {
      auto m = load_model(insp_ckpt, insp_flags);
      const auto sample =
          subsample_sample(load_sample(m.config.data_dir, insp_video), m.config.frame_stride(), m.config.t_max);
      NoGradScope no_grad;
      const auto& model = m.trainer->model();
      const auto out = model.forward(sample.video, m.trainer->vocabulary().encode(sample.annotation.query), {});
      const auto maps =
          compute_attention_maps(out.decoder, out.frames.height, out.frames.width, out.text.length());
      const auto files = export_attention_maps(maps, insp_out);
      std::cout << "wrote " << files.size() << " files to " << insp_out << '\n';
    } else if (cx->parsed()) {
      nlohmann::ordered_json out = nlohmann::ordered_json::array();
      for (auto T : sweep_T)
        for (auto k : sweep_k) {
          auto in = cx_in;
          in.frames = T;
          in.k = k;
          out.push_back(nlohmann::ordered_json::parse(complexity_report(in).to_json()));
        }
      std::cout << out.dump(2) << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const FormatError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const ValidationError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DimensionError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
