// vdep: vowel-based depression detection pipeline driver.
//
// Subcommands cover the pipeline stages end to end: gen-data -> segment ->
// train-vowel -> eval-vowel -> embed -> train-dep -> eval-dep -> explain /
// trajectory. Every stage reads the previous stage's artifacts by the path
// conventions in PipelineConfig and fails with the expected path when one is
// missing. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "vdep/checkpoint.hpp"
#include "vdep/config.hpp"
#include "vdep/corpus.hpp"
#include "vdep/csvio.hpp"
#include "vdep/depression_net.hpp"
#include "vdep/dsp.hpp"
#include "vdep/explain.hpp"
#include "vdep/feature_cache.hpp"
#include "vdep/fileio.hpp"
#include "vdep/segmentation.hpp"
#include "vdep/synth.hpp"
#include "vdep/vowel_net.hpp"
#include "vdep/wav.hpp"

namespace fs = std::filesystem;
using namespace vdep;

namespace {

void require_artifact(const std::string& path, const std::string& producer) {
  if (!fs::exists(path)) {
    fail("missing artifact {} — run `vdep {}` first", path, producer);
  }
}

PhoneMapping mapping_from(const PipelineConfig& config) {
  return config.phone_map.empty() ? default_phone_mapping()
                                  : load_phone_mapping(config.phone_map);
}

struct SplitData {
  std::vector<SegmentRecord> segments;
  LabeledPatchSet set;
};

SplitData load_split(const PipelineConfig& config, SplitTag split) {
  require_artifact(config.segment_table(split), "segment");
  require_artifact(config.patch_cache(split) + ".bin", "segment");
  SplitData data;
  data.segments = read_segment_table(config.segment_table(split));
  const auto cache = PatchCache::load(config.patch_cache(split));
  for (const auto& seg : data.segments) {
    data.set.patches.push_back(cache.get(seg.id()));
    data.set.labels.push_back(static_cast<int>(seg.label));
  }
  return data;
}

std::vector<ParticipantSequence> load_sequences(const PipelineConfig& config,
                                                SplitTag split, EmbeddingKind kind) {
  require_artifact(config.manifest(split), "gen-data");
  require_artifact(config.segment_table(split), "segment");
  require_artifact(config.embedding_store(kind, split) + ".bin", "embed");
  const auto manifest = load_manifest(config.manifest(split), split);
  const auto segments = read_segment_table(config.segment_table(split));
  const auto store = FloatRecordFile::load(config.embedding_store(kind, split));
  return build_sequences(manifest, segments, store, kind);
}

int cmd_gen_data(const PipelineConfig& config) {
  SyntheticSpec spec;
  spec.n_depressed = config.gen_depressed;
  spec.n_control = config.gen_control;
  spec.utterances_per_participant = config.gen_utterances;
  spec.tokens_min = config.gen_tokens_min;
  spec.tokens_max = config.gen_tokens_max;
  spec.out_dir = config.data_dir;

  const auto manifest = generate_synthetic_corpus(spec, config.seed);
  save_manifest(manifest, config.manifest_all());
  const auto [train, dev] = split_train_dev(manifest, config.dev_fraction, config.seed);
  save_manifest(train, config.manifest(SplitTag::Train));
  save_manifest(dev, config.manifest(SplitTag::Dev));
  std::cout << fmt::format("gen-data: {} participants ({} train / {} dev) under {}\n",
                           manifest.participants.size(), train.participants.size(),
                           dev.participants.size(), config.data_dir);
  return 0;
}

int cmd_segment(const PipelineConfig& config) {
  require_artifact(config.manifest(SplitTag::Train), "gen-data");
  require_artifact(config.manifest(SplitTag::Dev), "gen-data");
  const auto mapping = mapping_from(config);
  const auto bank = build_mel_filterbank();

  for (SplitTag split : {SplitTag::Train, SplitTag::Dev}) {
    const auto manifest = load_manifest(config.manifest(split), split);
    std::vector<SegmentRecord> segments;
    std::vector<MelPatch> patches;
    std::vector<std::string> alignment_errors;

    for (const auto& rec : manifest.participants) {
      for (size_t u = 0; u < rec.utterances.size(); ++u) {
        const auto& utt = rec.utterances[u];
        std::vector<PhoneInterval> tier;
        try {
          tier = parse_alignment(utt.alignment_path);
        } catch (const std::exception& e) {
          alignment_errors.emplace_back(e.what());
          continue;
        }
        const auto wave = decode_wav(utt.audio_path);
        const auto recs = segment_utterance(rec.participant_id, static_cast<int>(u),
                                            wave.duration(), tier, mapping);
        for (const auto& seg : recs) {
          const size_t start = static_cast<size_t>(seg.segment_index) * kSegmentHopSamples;
          patches.push_back(log_mel(wave.samples.data() + start, kSegmentSamples, bank));
          segments.push_back(seg);
        }
      }
    }
    if (!alignment_errors.empty()) {
      std::string joined;
      for (const auto& e : alignment_errors) joined += "\n  " + e;
      fail("{} alignment file(s) failed to parse:{}", alignment_errors.size(), joined);
    }

    write_segment_table(config.segment_table(split), segments);
    write_patch_cache(config.patch_cache(split), segments, patches);

    std::map<VowelLabel, size_t> histogram;
    for (const auto& s : segments) histogram[s.label]++;
    std::string hist;
    for (int c = 0; c < kNumVowelClasses; ++c) {
      const auto label = static_cast<VowelLabel>(c);
      hist += fmt::format("{}={} ", to_string(label), histogram[label]);
    }
    std::cout << fmt::format("segment[{}]: {} segments: {}\n", to_string(split),
                             segments.size(), hist);
  }
  return 0;
}

int cmd_train_vowel(const PipelineConfig& config) {
  const auto train = load_split(config, SplitTag::Train);
  const auto dev = load_split(config, SplitTag::Dev);

  CnnHyper hyper;
  hyper.batch_size = config.cnn_batch;
  hyper.learning_rate = config.cnn_lr;
  hyper.l2 = config.cnn_l2;
  hyper.max_epochs = config.cnn_epochs;
  hyper.target_macro_f1 = config.cnn_target_f1;
  hyper.seed = config.seed;

  const auto balanced = oversample(train.set, config.seed);
  auto model = build_cnn(config.seed);
  const auto report = train_cnn(model, balanced, dev.set, hyper);

  save_cnn_checkpoint(model, config.cnn_checkpoint());
  write_text_atomic(path_join(config.report_dir, "train_cnn_report.csv"),
                    train_report_csv(report));
  std::cout << fmt::format(
      "train-vowel: {} train segments (oversampled {}), chosen epoch {}, dev macro-F1 "
      "{:.4f}\n",
      train.set.size(), balanced.size(), report.chosen_epoch,
      report.epoch_dev_macro_f1[static_cast<size_t>(report.chosen_epoch) - 1]);
  return 0;
}

int cmd_eval_vowel(const PipelineConfig& config) {
  require_artifact(config.cnn_checkpoint(), "train-vowel");
  const auto model = load_cnn_checkpoint(config.cnn_checkpoint());
  const auto dev = load_split(config, SplitTag::Dev);
  const auto report = evaluate_vowels(model, dev.set, parse_ct_list(config.ct_list));
  write_text_atomic(path_join(config.report_dir, "vowel_eval.csv"),
                    vowel_eval_csv(report));
  std::cout << fmt::format("eval-vowel: {} segments, macro-F1 at CT={}: {:.4f}\n",
                           report.total_segments, report.rows[0].ct,
                           report.rows[0].macro.f1);
  return 0;
}

int cmd_embed(const PipelineConfig& config) {
  require_artifact(config.cnn_checkpoint(), "train-vowel");
  const auto model = load_cnn_checkpoint(config.cnn_checkpoint());
  const auto kind = config.kind();
  for (SplitTag split : {SplitTag::Train, SplitTag::Dev}) {
    const auto data = load_split(config, split);
    const auto embeddings = extract_embeddings(model, data.set.patches, kind);
    auto store = FloatRecordFile::create(embedding_dim(kind));
    std::vector<float> row(static_cast<size_t>(embeddings.cols()));
    for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
      Eigen::Map<Eigen::RowVectorXf>(row.data(), embeddings.cols()) = embeddings.row(i);
      store.append(data.segments[static_cast<size_t>(i)].id(), row.data());
    }
    store.save(config.embedding_store(kind, split));
    std::cout << fmt::format("embed[{}]: {} x {} {} embeddings\n", to_string(split),
                             embeddings.rows(), embeddings.cols(), to_string(kind));
  }
  return 0;
}

int cmd_train_dep(const PipelineConfig& config) {
  const auto kind = config.kind();
  auto sequences = load_sequences(config, SplitTag::Train, kind);
  sequences = duplicate_positives(std::move(sequences));

  LstmHyper hyper;
  hyper.batch_size = config.lstm_batch;
  hyper.learning_rate = config.lstm_lr;
  hyper.l2 = config.lstm_l2;
  hyper.epochs = config.lstm_epochs;
  hyper.max_steps = config.lstm_max_steps;
  hyper.seed = config.seed;

  auto model = build_lstm(embedding_dim(kind), config.seed);
  const auto report = train_lstm(model, sequences, hyper, kind);
  save_lstm_checkpoint(model, kind, config.lstm_checkpoint(kind));
  write_text_atomic(
      path_join(config.report_dir, fmt::format("train_lstm_{}.csv", to_string(kind))),
      train_report_csv(report));
  std::cout << fmt::format("train-dep[{}]: {} sequences, {} epochs, final loss {:.4f}\n",
                           to_string(kind), sequences.size(), report.chosen_epoch,
                           report.epoch_loss.back());
  return 0;
}

int cmd_eval_dep(const PipelineConfig& config) {
  const auto kind = config.kind();
  require_artifact(config.lstm_checkpoint(kind), "train-dep");
  const auto model = load_lstm_checkpoint(config.lstm_checkpoint(kind));
  const auto dev = load_sequences(config, SplitTag::Dev, kind);
  const auto report = evaluate_depression(model, dev);
  write_text_atomic(path_join(config.report_dir, "dep_eval.csv"), dep_eval_csv(report));
  write_text_atomic(path_join(config.report_dir, "dep_predictions.csv"),
                    dep_predictions_csv(report));
  std::cout << fmt::format(
      "eval-dep[{}]: {} participants, depression F1 {:.4f}, macro F1 {:.4f}\n",
      to_string(kind), report.rows.size(), report.depression.f1, report.macro_f1);
  return 0;
}

int cmd_explain(const PipelineConfig& config) {
  const auto kind = config.kind();
  if (kind != EmbeddingKind::Conv5) {
    fail("explain works on the Conv 5 embedding (6 channels); set embedding = conv5");
  }
  require_artifact(config.lstm_checkpoint(kind), "train-dep");
  const auto model = load_lstm_checkpoint(config.lstm_checkpoint(kind));
  const auto dev = load_sequences(config, SplitTag::Dev, kind);
  const auto classifier = make_lstm_classifier(model);

  std::vector<ChannelExplanation> explanations;
  for (size_t i = 0; i < dev.size(); ++i) {
    auto ex = lime_explain(classifier, dev[i].steps.cast<double>(), config.lime_samples,
                           mix_seed(config.seed, i), config.ridge_alpha,
                           config.kernel_width);
    ex.sample_id = dev[i].participant_id;
    explanations.push_back(std::move(ex));
  }
  const auto census = rank_census(explanations);
  write_text_atomic(path_join(config.report_dir, "lime_explanations.csv"),
                    explanations_csv(explanations));
  write_text_atomic(path_join(config.report_dir, "lime_rank_census.csv"),
                    rank_census_csv(census));

  int top_channel = 0;
  for (int c = 1; c < kLimeChannels; ++c) {
    if (census(c, 0) > census(top_channel, 0)) top_channel = c;
  }
  std::cout << fmt::format("explain: {} participants, most often rank-1 channel: {}\n",
                           explanations.size(),
                           to_string(static_cast<VowelLabel>(top_channel)));
  return 0;
}

int cmd_trajectory(const PipelineConfig& config, const std::string& participant,
                   const std::string& split_name) {
  const auto kind = config.kind();
  require_artifact(config.lstm_checkpoint(kind), "train-dep");
  const auto model = load_lstm_checkpoint(config.lstm_checkpoint(kind));
  const SplitTag split = split_name == "train" ? SplitTag::Train : SplitTag::Dev;
  const auto sequences = load_sequences(config, split, kind);

  const ParticipantSequence* seq = nullptr;
  for (const auto& s : sequences) {
    if (s.participant_id == participant) seq = &s;
  }
  if (!seq) fail("participant '{}' not found in the {} split", participant, split_name);

  const auto t = decision_trajectory(model, seq->steps, config.smooth_window);
  const auto c = classify(model, seq->steps);
  const std::string stem = path_join(config.report_dir, "trajectory_" + participant);
  write_text_atomic(stem + ".csv", trajectory_csv(t));
  write_text_atomic(stem + ".svg",
                    trajectory_svg(t, fmt::format("{}  label={}  p(depression)={:.3f}",
                                                  participant, seq->label, c.probability)));
  std::cout << fmt::format("trajectory: {} steps for {}, final p(depression) {:.4f}\n",
                           t.raw.size(), participant, c.probability);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vowel-based depression detection pipeline"};
  app.fallthrough(true);
  app.require_subcommand(1);

  std::string config_path;
  PipelineConfig config;
  app.add_option("--config", config_path, "key = value config file");
  auto* seed_opt = app.add_option("--seed", config.seed, "master RNG seed");
  app.add_option("--data-dir", config.data_dir, "corpus root");
  app.add_option("--cache-dir", config.cache_dir, "segment/patch/embedding cache root");
  app.add_option("--checkpoint-dir", config.checkpoint_dir, "model checkpoint root");
  app.add_option("--report-dir", config.report_dir, "CSV/SVG report root");
  app.add_option("--embedding", config.embedding, "embedding kind: conv4 | conv5");

  auto* gen = app.add_subcommand("gen-data", "generate the synthetic corpus and splits");
  gen->add_option("--out", config.data_dir, "output directory (alias of --data-dir)");
  gen->add_option("--depressed", config.gen_depressed, "depressed participant count");
  gen->add_option("--control", config.gen_control, "control participant count");
  gen->add_option("--utterances", config.gen_utterances, "utterances per participant");
  gen->add_option("--dev-fraction", config.dev_fraction, "dev split fraction");

  auto* seg = app.add_subcommand("segment", "window, label and extract log-mel patches");
  auto* trv = app.add_subcommand("train-vowel", "train the vowel CNN");
  trv->add_option("--epochs", config.cnn_epochs, "max training epochs");
  trv->add_option("--target-f1", config.cnn_target_f1, "early-stop dev macro-F1");
  auto* evv = app.add_subcommand("eval-vowel", "confidence-thresholded vowel metrics");
  evv->add_option("--ct", config.ct_list, "comma-separated confidence thresholds");
  auto* emb = app.add_subcommand("embed", "extract vowel embeddings for both splits");
  emb->add_option("--kind", config.embedding, "conv4 | conv5");
  auto* trd = app.add_subcommand("train-dep", "train the depression LSTM");
  trd->add_option("--kind", config.embedding, "conv4 | conv5");
  trd->add_option("--epochs", config.lstm_epochs, "epochs (0 = kind default)");
  auto* evd = app.add_subcommand("eval-dep", "depression metrics on the dev split");
  evd->add_option("--kind", config.embedding, "conv4 | conv5");
  auto* exp = app.add_subcommand("explain", "modified LIME channel explanations");
  exp->add_option("--samples", config.lime_samples, "perturbed samples per participant");
  std::string participant, traj_split = "dev";
  auto* trj = app.add_subcommand("trajectory", "per-step depression probability plot");
  trj->add_option("--participant", participant, "participant id")->required();
  trj->add_option("--split", traj_split, "train | dev");
  auto* shw = app.add_subcommand("show-config", "print the effective configuration");

  // Parse twice so the config file loads first and flags win over it.
  try {
    app.parse(argc, argv);
    if (!config_path.empty()) {
      PipelineConfig from_file = load_config(config_path);
      const uint64_t flag_seed = config.seed;
      const bool seed_given = seed_opt->count() > 0;
      config = from_file;
      if (seed_given) config.seed = flag_seed;
      // re-parse so every explicitly provided flag overrides the file
      app.clear();
      app.parse(argc, argv);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (gen->parsed()) {
      if (seed_opt->count() == 0) {
        std::cerr << "error: gen-data requires --seed (no wall-clock defaults)\n";
        return 2;
      }
      return cmd_gen_data(config);
    }
    if (seg->parsed()) return cmd_segment(config);
    if (trv->parsed()) return cmd_train_vowel(config);
    if (evv->parsed()) return cmd_eval_vowel(config);
    if (emb->parsed()) return cmd_embed(config);
    if (trd->parsed()) return cmd_train_dep(config);
    if (evd->parsed()) return cmd_eval_dep(config);
    if (exp->parsed()) return cmd_explain(config);
    if (trj->parsed()) return cmd_trajectory(config, participant, traj_split);
    if (shw->parsed()) {
      std::cout << config_to_string(config);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
