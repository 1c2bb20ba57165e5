// synthattr: synthetic speech attribution toolkit CLI.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "synthattr/analysis/analysis.hpp"
#include "synthattr/augment/augment.hpp"
#include "synthattr/common/errors.hpp"
#include "synthattr/common/parallel.hpp"
#include "synthattr/dsp/features.hpp"
#include "synthattr/pipeline/pipeline.hpp"
#include "synthattr/pipeline/trainer.hpp"

namespace fs = std::filesystem;
using namespace synthattr;

namespace {

int run(int argc, char** argv) {
  CLI::App app{"synthattr: synthetic speech attribution toolkit"};
  app.require_subcommand(1);

  // fixture
  auto* fixture = app.add_subcommand("fixture", "generate a synthetic WAV corpus");
  std::string fx_out;
  int fx_classes = 6, fx_per_class = 10, fx_sample_rate = 16000;
  std::uint64_t fx_seed = 1;
  double fx_duration_mean = -1.0, fx_duration_std = -1.0;
  fixture->add_option("--out", fx_out, "output directory")->required();
  fixture->add_option("--classes", fx_classes, "number of classes (1..6)");
  fixture->add_option("--per-class", fx_per_class, "clips per class");
  fixture->add_option("--seed", fx_seed, "corpus seed");
  fixture->add_option("--sample-rate", fx_sample_rate, "sample rate in Hz");
  fixture->add_option("--duration-mean", fx_duration_mean,
                      "override mean clip duration (seconds)");
  fixture->add_option("--duration-std", fx_duration_std,
                      "override duration standard deviation (seconds)");

  // split
  auto* split = app.add_subcommand("split", "stratified train/val/test split");
  std::string sp_manifest, sp_root, sp_out;
  double sp_train = 0.72, sp_val = 0.08, sp_test = 0.20;
  std::uint64_t sp_seed = 1;
  split->add_option("--manifest", sp_manifest, "manifest CSV")->required();
  split->add_option("--root", sp_root, "corpus root")->required();
  split->add_option("--out", sp_out, "output manifest CSV")->required();
  split->add_option("--train", sp_train, "train fraction");
  split->add_option("--val", sp_val, "validation fraction");
  split->add_option("--test", sp_test, "test fraction");
  split->add_option("--seed", sp_seed, "shuffle seed");

  // augment
  auto* augment_cmd =
      app.add_subcommand("augment", "expand a manifest with augmented variants");
  std::string ag_manifest, ag_root, ag_out, ag_encode, ag_decode;
  std::vector<std::string> ag_specs;
  bool ag_default_specs = false, ag_no_materialize = false;
  std::uint64_t ag_seed = 1;
  augment_cmd->add_option("--manifest", ag_manifest, "manifest CSV")->required();
  augment_cmd->add_option("--root", ag_root, "corpus root")->required();
  augment_cmd->add_option("--out", ag_out, "output manifest CSV")->required();
  augment_cmd->add_option("--spec", ag_specs,
                          "augmentation spec, e.g. noise:snr_db=10 "
                          "reverb:rt60=0.3 codec:bandwidth_hz=6000:bit_depth=12");
  augment_cmd->add_flag("--default-specs", ag_default_specs,
                        "use one noise, one reverb and one codec spec sampled "
                        "from the default ranges");
  augment_cmd->add_option("--seed", ag_seed, "master augmentation seed");
  augment_cmd->add_option("--encode-cmd", ag_encode,
                          "external codec encode command with {in}/{out}");
  augment_cmd->add_option("--decode-cmd", ag_decode,
                          "external codec decode command with {in}/{out}");
  augment_cmd->add_flag("--no-materialize", ag_no_materialize,
                        "only write the expanded manifest");

  // features
  auto* features = app.add_subcommand("features", "dump per-clip feature files");
  std::string ft_manifest, ft_root, ft_out, ft_kind = "mfcc", ft_format = "csv";
  int ft_mfcc = 20, ft_mels = 64, ft_sample_rate = 16000;
  features->add_option("--manifest", ft_manifest, "manifest CSV")->required();
  features->add_option("--root", ft_root, "corpus root")->required();
  features->add_option("--out", ft_out, "output directory")->required();
  features->add_option("--kind", ft_kind, "mfcc | ms | stft");
  features->add_option("--format", ft_format, "csv | bin");
  features->add_option("--mfcc-coeffs", ft_mfcc, "MFCC coefficient count");
  features->add_option("--mel-bands", ft_mels, "mel band count");
  features->add_option("--sample-rate", ft_sample_rate, "ingest sample rate");

  // train (config file + per-key overrides)
  auto* train = app.add_subcommand("train", "train a model");
  std::string tr_config, tr_manifest, tr_root, tr_out;
  std::map<std::string, std::string> tr_overrides;
  train->add_option("--config", tr_config, "key=value config file");
  train->add_option("--manifest", tr_manifest, "manifest CSV")->required();
  train->add_option("--root", tr_root, "corpus root")->required();
  train->add_option("--out", tr_out, "run output directory")->required();
  std::map<std::string, std::string> defaults =
      pipeline::ExperimentConfig{}.to_map();
  std::map<std::string, std::shared_ptr<std::string>> override_slots;
  for (const auto& [key, value] : defaults) {
    auto slot = std::make_shared<std::string>();
    override_slots[key] = slot;
    train->add_option("--" + key, *slot, "config override (default " + value + ")");
  }

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "accuracy + confusion matrix");
  std::string ev_model, ev_manifest, ev_root, ev_out, ev_split = "test";
  evaluate->add_option("--model", ev_model, "checkpoint/model file")->required();
  evaluate->add_option("--manifest", ev_manifest, "manifest CSV")->required();
  evaluate->add_option("--root", ev_root, "corpus root")->required();
  evaluate->add_option("--split", ev_split, "train | val | test | eval");
  evaluate->add_option("--out", ev_out, "output directory for confusion.csv/svg");

  // embed
  auto* embed = app.add_subcommand("embed", "dump embeddings + t-SNE plot");
  std::string em_model, em_manifest, em_root, em_out, em_split = "test";
  double em_perplexity = 30.0;
  int em_iterations = 1000;
  std::uint64_t em_seed = 1;
  embed->add_option("--model", em_model, "checkpoint/model file")->required();
  embed->add_option("--manifest", em_manifest, "manifest CSV")->required();
  embed->add_option("--root", em_root, "corpus root")->required();
  embed->add_option("--split", em_split, "split to embed");
  embed->add_option("--out", em_out, "output directory")->required();
  embed->add_option("--perplexity", em_perplexity, "t-SNE perplexity");
  embed->add_option("--iterations", em_iterations, "t-SNE iterations");
  embed->add_option("--seed", em_seed, "t-SNE seed");

  // predict
  auto* predict = app.add_subcommand("predict", "label the eval split");
  std::string pr_model, pr_manifest, pr_root, pr_out;
  predict->add_option("--model", pr_model, "checkpoint/model file")->required();
  predict->add_option("--manifest", pr_manifest, "manifest CSV")->required();
  predict->add_option("--root", pr_root, "corpus root")->required();
  predict->add_option("--out", pr_out, "output prediction CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (fixture->parsed()) {
    auto spec = pipeline::FixtureSpec::standard(fx_classes, fx_per_class, fx_seed);
    spec.sample_rate = fx_sample_rate;
    for (auto& cls : spec.classes) {
      if (fx_duration_mean > 0) cls.duration_mean_s = fx_duration_mean;
      if (fx_duration_std >= 0) cls.duration_std_s = fx_duration_std;
    }
    const auto manifest = pipeline::generate_fixture_corpus(spec, fx_out);
    std::cout << "wrote " << manifest.entries.size() << " clips under " << fx_out
              << "\n";
  } else if (split->parsed()) {
    auto manifest = pipeline::read_manifest_csv(sp_manifest, sp_root);
    manifest = pipeline::stratified_split(manifest, sp_train, sp_val, sp_test,
                                          sp_seed);
    pipeline::write_manifest_csv(sp_out, manifest);
    std::cout << "train/val/test = " << manifest.count_in(pipeline::Split::train)
              << "/" << manifest.count_in(pipeline::Split::val) << "/"
              << manifest.count_in(pipeline::Split::test) << "\n";
  } else if (augment_cmd->parsed()) {
    auto manifest = pipeline::read_manifest_csv(ag_manifest, ag_root);
    manifest.seed = ag_seed;
    std::vector<augment::AugmentationSpec> specs;
    if (ag_default_specs) specs = augment::sample_default_specs(ag_seed);
    for (const auto& text : ag_specs)
      specs.push_back(augment::AugmentationSpec::parse(text));
    const auto expanded = augment::expand_with_augmentations(manifest, specs);
    pipeline::write_manifest_csv(ag_out, expanded);
    if (!ag_no_materialize) {
      augment::CodecHook hook{ag_encode, ag_decode};
      augment::materialize_augmentations(expanded, hook);
    }
    std::cout << "expanded " << manifest.entries.size() << " -> "
              << expanded.entries.size() << " entries\n";
  } else if (features->parsed()) {
    const auto manifest = pipeline::read_manifest_csv(ft_manifest, ft_root);
    fs::create_directories(ft_out);
    dsp::MfccParams params;
    params.n_mfcc = ft_mfcc;
    params.n_mels = ft_mels;
    params.stft.frame_length = static_cast<int>(std::lround(0.025 * ft_sample_rate));
    params.stft.hop_length = static_cast<int>(std::lround(0.010 * ft_sample_rate));
    params.f_max = std::min(8000.0, ft_sample_rate / 2.0);
    for (const auto& e : manifest.entries) {
      auto clip = audio::resample(
          audio::load_wav((fs::path(ft_root) / e.relative_path).string()),
          ft_sample_rate);
      dsp::FeatureMatrix fm;
      if (ft_kind == "mfcc")
        fm = dsp::mfcc(clip, params);
      else if (ft_kind == "ms")
        fm = dsp::mel_spectrogram(dsp::stft_power(clip, params.stft), params.n_mels,
                                  params.f_min, params.f_max);
      else if (ft_kind == "stft")
        fm = dsp::stft_power(clip, params.stft);
      else
        throw ConfigInvalid("unknown feature kind: " + ft_kind);
      fs::path rel(e.relative_path);
      rel.replace_extension(ft_format == "bin" ? ".feat" : ".csv");
      const fs::path target = fs::path(ft_out) / rel;
      fs::create_directories(target.parent_path());
      if (ft_format == "bin")
        dsp::write_feature_bin(target.string(), fm);
      else if (ft_format == "csv")
        dsp::write_feature_csv(target.string(), fm);
      else
        throw ConfigInvalid("unknown format: " + ft_format);
    }
    std::cout << "wrote " << manifest.entries.size() << " feature files\n";
  } else if (train->parsed()) {
    std::map<std::string, std::string> kv = defaults;
    if (!tr_config.empty())
      for (const auto& [key, value] : pipeline::read_config_file(tr_config))
        kv[key] = value;
    for (const auto& [key, slot] : override_slots)
      if (!slot->empty()) kv[key] = *slot;
    const auto cfg = pipeline::ExperimentConfig::from_map(kv);
    const auto manifest = pipeline::read_manifest_csv(tr_manifest, tr_root);
    const auto result = pipeline::train_model(cfg, manifest, tr_out);
    std::cout << "best val accuracy " << result.best_val_accuracy << " at epoch "
              << result.best_epoch << "; checkpoint " << result.checkpoint_path
              << "\n";
  } else if (evaluate->parsed()) {
    const auto manifest = pipeline::read_manifest_csv(ev_manifest, ev_root);
    const auto [accuracy, cm] = pipeline::evaluate_model(
        ev_model, manifest, pipeline::split_from_name(ev_split), ev_out);
    std::cout.precision(4);
    std::cout << "accuracy " << accuracy << " over " << cm.total() << " clips\n";
  } else if (embed->parsed()) {
    const auto manifest = pipeline::read_manifest_csv(em_manifest, em_root);
    auto [vectors, labels] = pipeline::embeddings_for_split(
        em_model, manifest, pipeline::split_from_name(em_split));
    analysis::TsneOptions options;
    options.perplexity = em_perplexity;
    options.iterations = em_iterations;
    options.seed = em_seed;
    const auto tsne = analysis::tsne_embed(vectors, options);
    fs::create_directories(em_out);
    analysis::write_embedding_csv((fs::path(em_out) / "embeddings.csv").string(),
                                  tsne.embedding, labels, em_model);
    analysis::write_scatter_svg((fs::path(em_out) / "tsne.svg").string(),
                                tsne.embedding, labels, "t-SNE embedding");
    const double sil = analysis::silhouette_score(vectors, labels);
    std::cout << "silhouette " << sil << ", KL " << tsne.kl_first << " -> "
              << tsne.kl_final << "\n";
  } else if (predict->parsed()) {
    const auto manifest = pipeline::read_manifest_csv(pr_manifest, pr_root);
    pipeline::predict_unlabeled(pr_model, manifest, pr_out);
    std::cout << "wrote " << pr_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
