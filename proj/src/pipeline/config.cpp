#include <fstream>
#include <sstream>

#include "synthattr/pipeline/pipeline.hpp"

namespace synthattr::pipeline {

std::string model_id_name(ModelId id) {
  switch (id) {
    case ModelId::inc_tssd: return "inc-tssd";
    case ModelId::res_tssd: return "res-tssd";
    case ModelId::svm: return "svm";
    case ModelId::gmm: return "gmm";
  }
  return "inc-tssd";
}

ModelId model_id_from_name(const std::string& name) {
  if (name == "inc-tssd") return ModelId::inc_tssd;
  if (name == "res-tssd") return ModelId::res_tssd;
  if (name == "svm") return ModelId::svm;
  if (name == "gmm") return ModelId::gmm;
  throw ConfigInvalid("unknown model: " + name);
}

std::string feature_id_name(FeatureId id) {
  switch (id) {
    case FeatureId::rw: return "rw";
    case FeatureId::ms: return "ms";
    case FeatureId::mfcc: return "mfcc";
  }
  return "rw";
}

FeatureId feature_id_from_name(const std::string& name) {
  if (name == "rw") return FeatureId::rw;
  if (name == "ms") return FeatureId::ms;
  if (name == "mfcc") return FeatureId::mfcc;
  throw ConfigInvalid("unknown feature kind: " + name);
}

void ExperimentConfig::validate() const {
  train.validate();
  const bool is_tssd = model == ModelId::inc_tssd || model == ModelId::res_tssd;
  if (is_tssd && feature != FeatureId::rw)
    throw ConfigInvalid("tssd models consume raw waveform (feature=rw) only");
  if (!is_tssd && feature == FeatureId::rw)
    throw ConfigInvalid("classical models need framed features (mfcc or ms)");
  if (clip_seconds <= 0) throw ConfigInvalid("clip_seconds must be positive");
  if (num_classes != 5 && num_classes != 6)
    throw ConfigInvalid("num_classes must be 5 or 6");
  if (sample_rate <= 0) throw ConfigInvalid("sample_rate must be positive");
}

namespace {

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stoi(cell));
  return out;
}

std::string join_int_list(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(xs[i]);
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::map<std::string, std::string> ExperimentConfig::to_map() const {
  std::map<std::string, std::string> kv;
  kv["model"] = model_id_name(model);
  kv["feature"] = feature_id_name(feature);
  kv["epochs"] = std::to_string(train.epochs);
  kv["batch_size"] = std::to_string(train.batch_size);
  kv["lr0"] = format_double(train.lr0);
  kv["gamma"] = format_double(train.gamma);
  kv["seed"] = std::to_string(train.seed);
  kv["optimizer"] =
      train.optimizer == nn::OptimizerKind::adam ? "adam" : "sgd_momentum";
  kv["precision"] =
      train.precision == nn::Precision::float64 ? "float64" : "float32";
  kv["augment"] = augment ? "true" : "false";
  kv["clip_seconds"] = format_double(clip_seconds);
  kv["num_classes"] = std::to_string(num_classes);
  kv["sample_rate"] = std::to_string(sample_rate);
  kv["threads"] = std::to_string(threads);
  kv["stop_val_accuracy"] = format_double(stop_val_accuracy);
  kv["inc_branch_channels"] = std::to_string(inc_branch_channels);
  kv["inc_blocks"] = std::to_string(inc_blocks);
  kv["res_stage_channels"] = join_int_list(res_stage_channels);
  kv["res_blocks_per_stage"] = std::to_string(res_blocks_per_stage);
  kv["penultimate_width"] = std::to_string(penultimate_width);
  kv["svm_lambda"] = format_double(svm_lambda);
  kv["svm_epochs"] = std::to_string(svm_epochs);
  kv["gmm_components"] = std::to_string(gmm_components);
  kv["mfcc_coeffs"] = std::to_string(mfcc_coeffs);
  kv["mel_bands"] = std::to_string(mel_bands);
  return kv;
}

ExperimentConfig ExperimentConfig::from_map(
    const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "model")
      cfg.model = model_id_from_name(value);
    else if (key == "feature")
      cfg.feature = feature_id_from_name(value);
    else if (key == "epochs")
      cfg.train.epochs = std::stoi(value);
    else if (key == "batch_size")
      cfg.train.batch_size = std::stoi(value);
    else if (key == "lr0")
      cfg.train.lr0 = std::stod(value);
    else if (key == "gamma")
      cfg.train.gamma = std::stod(value);
    else if (key == "seed")
      cfg.train.seed = std::stoull(value);
    else if (key == "optimizer") {
      if (value == "adam")
        cfg.train.optimizer = nn::OptimizerKind::adam;
      else if (value == "sgd_momentum")
        cfg.train.optimizer = nn::OptimizerKind::sgd_momentum;
      else
        throw ConfigInvalid("unknown optimizer: " + value);
    } else if (key == "precision") {
      if (value == "float32")
        cfg.train.precision = nn::Precision::float32;
      else if (value == "float64")
        cfg.train.precision = nn::Precision::float64;
      else
        throw ConfigInvalid("unknown precision: " + value);
    } else if (key == "augment")
      cfg.augment = value == "true" || value == "1";
    else if (key == "clip_seconds")
      cfg.clip_seconds = std::stod(value);
    else if (key == "num_classes")
      cfg.num_classes = std::stoi(value);
    else if (key == "sample_rate")
      cfg.sample_rate = std::stoi(value);
    else if (key == "threads")
      cfg.threads = std::stoi(value);
    else if (key == "stop_val_accuracy")
      cfg.stop_val_accuracy = std::stod(value);
    else if (key == "inc_branch_channels")
      cfg.inc_branch_channels = std::stoi(value);
    else if (key == "inc_blocks")
      cfg.inc_blocks = std::stoi(value);
    else if (key == "res_stage_channels")
      cfg.res_stage_channels = parse_int_list(value);
    else if (key == "res_blocks_per_stage")
      cfg.res_blocks_per_stage = std::stoi(value);
    else if (key == "penultimate_width")
      cfg.penultimate_width = std::stoi(value);
    else if (key == "svm_lambda")
      cfg.svm_lambda = std::stod(value);
    else if (key == "svm_epochs")
      cfg.svm_epochs = std::stoi(value);
    else if (key == "gmm_components")
      cfg.gmm_components = std::stoi(value);
    else if (key == "mfcc_coeffs")
      cfg.mfcc_coeffs = std::stoi(value);
    else if (key == "mel_bands")
      cfg.mel_bands = std::stoi(value);
    else
      throw ConfigInvalid("unknown config key: " + key);
  }
  return cfg;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r' ||
                             line.back() == '\t'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigInvalid(path + ":" + std::to_string(lineno) +
                          ": expected key=value");
    kv[line.substr(start, eq - start)] = line.substr(eq + 1);
  }
  return kv;
}

void write_config_file(const std::string& path,
                       const std::map<std::string, std::string>& kv) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  for (const auto& [key, value] : kv) os << key << '=' << value << '\n';
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os << "true\\pred";
  for (int c = 0; c < cm.class_count; ++c) os << ',' << c;
  os << '\n';
  for (int r = 0; r < cm.class_count; ++r) {
    os << r;
    for (int c = 0; c < cm.class_count; ++c) os << ',' << cm.at(r, c);
    os << '\n';
  }
}

void write_confusion_svg(const std::string& path, const ConfusionMatrix& cm,
                         const std::string& title) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  const int cell = 56, margin = 64;
  const int w = margin * 2 + cell * cm.class_count;
  const int h = margin * 2 + cell * cm.class_count;
  std::vector<double> row_total(cm.class_count, 0.0);
  for (int r = 0; r < cm.class_count; ++r)
    for (int c = 0; c < cm.class_count; ++c) row_total[r] += cm.at(r, c);

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
     << h << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2
     << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"15\">"
     << title << "</text>\n";
  for (int r = 0; r < cm.class_count; ++r)
    for (int c = 0; c < cm.class_count; ++c) {
      const double frac =
          row_total[r] > 0 ? static_cast<double>(cm.at(r, c)) / row_total[r] : 0.0;
      const int blue = static_cast<int>(255 - 175 * frac);
      const int redgreen = static_cast<int>(255 - 205 * frac);
      const int x = margin + c * cell, y = margin + r * cell;
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"rgb(" << redgreen << ','
         << redgreen << ',' << blue << ")\" stroke=\"#ccc\"/>\n";
      os << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 5
         << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\""
         << (frac > 0.55 ? " fill=\"white\"" : "") << ">" << cm.at(r, c)
         << "</text>\n";
    }
  for (int c = 0; c < cm.class_count; ++c) {
    os << "<text x=\"" << margin + c * cell + cell / 2 << "\" y=\"" << margin - 10
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
       << c << "</text>\n";
    os << "<text x=\"" << margin - 14 << "\" y=\"" << margin + c * cell + cell / 2 + 4
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
       << c << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace synthattr::pipeline
