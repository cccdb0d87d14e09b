#include "otf/io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace otf {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kCheckpointFormat = "otf-lstm-checkpoint-v1";
constexpr const char* kCodeVersion = "0.1.0";

json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError("failed to parse " + what + " as JSON");
  return j;
}

const json& require_field(const json& j, const std::string& field,
                          const std::string& what) {
  if (!j.contains(field))
    throw ConfigError(what + ": missing field: " + field);
  return j.at(field);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in.good() && !in.eof()) throw IoError("read failed: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out.good()) throw IoError("write failed: " + path);
}

// --- dataset ---

namespace {

json gen_config_to_json_obj(const GenConfig& c) {
  return json{{"num_classes", c.num_classes},
              {"feature_dim", c.feature_dim},
              {"subjects_count", c.subjects_count},
              {"sequences_per_subject_per_class", c.sequences_per_subject_per_class},
              {"min_length", c.min_length},
              {"max_length", c.max_length},
              {"noise_stddev", c.noise_stddev},
              {"subject_offset_stddev", c.subject_offset_stddev},
              {"seed", c.seed}};
}

GenConfig gen_config_from_json_obj(const json& j) {
  GenConfig c;
  const char* what = "gen config";
  c.num_classes = require_field(j, "num_classes", what).get<int>();
  c.feature_dim = require_field(j, "feature_dim", what).get<int>();
  c.subjects_count = require_field(j, "subjects_count", what).get<int>();
  c.sequences_per_subject_per_class =
      require_field(j, "sequences_per_subject_per_class", what).get<int>();
  c.min_length = require_field(j, "min_length", what).get<int>();
  c.max_length = require_field(j, "max_length", what).get<int>();
  c.noise_stddev = require_field(j, "noise_stddev", what).get<double>();
  c.subject_offset_stddev = require_field(j, "subject_offset_stddev", what).get<double>();
  c.seed = require_field(j, "seed", what).get<std::uint64_t>();
  c.validate();
  return c;
}

}  // namespace

std::string gen_config_to_json(const GenConfig& config) {
  return gen_config_to_json_obj(config).dump(2);
}

GenConfig parse_gen_config_json(const std::string& text) {
  return gen_config_from_json_obj(parse_json(text, "gen config"));
}

GenConfig load_gen_config(const std::string& path) {
  return parse_gen_config_json(read_text_file(path));
}

void save_dataset(const Dataset& ds, const std::string& path) {
  json seqs = json::array();
  for (const FeatureSequence& s : ds.sequences) {
    json frames = json::array();
    for (const Vec& f : s.frames) frames.push_back(f);
    seqs.push_back(json{{"class_id", s.class_id},
                        {"subject_id", s.subject_id},
                        {"apex_index", s.apex_index},
                        {"frames", std::move(frames)}});
  }
  json j{{"config", gen_config_to_json_obj(ds.config)}, {"sequences", std::move(seqs)}};
  write_text_file(path, j.dump(2) + "\n");
}

Dataset load_dataset(const std::string& path) {
  const json j = parse_json(read_text_file(path), "dataset " + path);
  Dataset ds;
  ds.config = gen_config_from_json_obj(require_field(j, "config", "dataset"));
  for (const json& js : require_field(j, "sequences", "dataset")) {
    FeatureSequence s;
    s.class_id = require_field(js, "class_id", "sequence").get<int>();
    s.subject_id = require_field(js, "subject_id", "sequence").get<int>();
    s.apex_index = require_field(js, "apex_index", "sequence").get<std::size_t>();
    for (const json& jf : require_field(js, "frames", "sequence")) {
      s.frames.push_back(jf.get<Vec>());
    }
    if (s.frames.empty()) throw ConfigError("dataset: sequence with no frames");
    if (s.apex_index >= s.frames.size())
      throw ConfigError("dataset: apex_index out of range");
    ds.sequences.push_back(std::move(s));
  }
  return ds;
}

// --- train config ---

std::string train_config_to_json(const TrainConfig& c) {
  return json{{"epochs", c.epochs},
              {"base_lr", c.base_lr},
              {"batch_size", c.batch_size},
              {"hidden_dim", c.hidden_dim},
              {"beta", c.beta},
              {"e3_weight", c.e3_weight},
              {"seed", c.seed},
              {"use_e2", c.use_e2},
              {"use_e3", c.use_e3},
              {"literal_eq5", c.literal_eq5},
              {"momentum", c.momentum},
              {"augment", c.augment}}
      .dump(2);
}

TrainConfig parse_train_config_json(const std::string& text) {
  const json j = parse_json(text, "train config");
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.base_lr = j.value("base_lr", c.base_lr);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.beta = j.value("beta", c.beta);
  c.e3_weight = j.value("e3_weight", c.e3_weight);
  c.seed = j.value("seed", c.seed);
  c.use_e2 = j.value("use_e2", c.use_e2);
  c.use_e3 = j.value("use_e3", c.use_e3);
  c.literal_eq5 = j.value("literal_eq5", c.literal_eq5);
  c.momentum = j.value("momentum", c.momentum);
  c.augment = j.value("augment", c.augment);
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::string& path) {
  return parse_train_config_json(read_text_file(path));
}

// --- checkpoint ---

namespace {

const std::vector<std::string>& block_names() {
  static const std::vector<std::string> names = {
      "input_gate_wx",  "input_gate_wh",  "input_gate_b",
      "forget_gate_wx", "forget_gate_wh", "forget_gate_b",
      "cell_gate_wx",   "cell_gate_wh",   "cell_gate_b",
      "output_gate_wx", "output_gate_wh", "output_gate_b",
      "intensity_w",    "intensity_b",    "class_w",       "class_b"};
  return names;
}

std::vector<const Vec*> block_views(const LstmParameters& p) {
  std::vector<const Vec*> v;
  for (const auto& gate : p.gates) {
    v.push_back(&gate.wx.data);
    v.push_back(&gate.wh.data);
    v.push_back(&gate.b);
  }
  v.push_back(&p.w_intensity);
  v.push_back(&p.b_intensity);
  v.push_back(&p.w_class.data);
  v.push_back(&p.b_class);
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json blocks;
  const auto views = block_views(ckpt.params);
  for (std::size_t i = 0; i < views.size(); ++i) {
    blocks[block_names()[i]] = *views[i];
  }
  const json j{{"format", kCheckpointFormat},
               {"input_dim", ckpt.params.dims.input_dim},
               {"hidden_dim", ckpt.params.dims.hidden_dim},
               {"num_classes", ckpt.params.dims.num_classes},
               {"seed", ckpt.seed},
               {"epochs_trained", ckpt.epochs_trained},
               {"blocks", std::move(blocks)}};
  write_text_file(path, j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  const json j = parse_json(read_text_file(path), "checkpoint " + path);
  if (require_field(j, "format", "checkpoint").get<std::string>() != kCheckpointFormat)
    throw ConfigError("checkpoint: unknown format marker");
  LstmDims dims;
  dims.input_dim = require_field(j, "input_dim", "checkpoint").get<std::size_t>();
  dims.hidden_dim = require_field(j, "hidden_dim", "checkpoint").get<std::size_t>();
  dims.num_classes = require_field(j, "num_classes", "checkpoint").get<std::size_t>();

  Checkpoint ckpt;
  ckpt.params = zero_params(dims);
  ckpt.seed = require_field(j, "seed", "checkpoint").get<std::uint64_t>();
  ckpt.epochs_trained = require_field(j, "epochs_trained", "checkpoint").get<int>();

  const json& blocks = require_field(j, "blocks", "checkpoint");
  std::vector<Vec*> views;
  for (auto& gate : ckpt.params.gates) {
    views.push_back(&gate.wx.data);
    views.push_back(&gate.wh.data);
    views.push_back(&gate.b);
  }
  views.push_back(&ckpt.params.w_intensity);
  views.push_back(&ckpt.params.b_intensity);
  views.push_back(&ckpt.params.w_class.data);
  views.push_back(&ckpt.params.b_class);

  for (std::size_t i = 0; i < views.size(); ++i) {
    const Vec block = require_field(blocks, block_names()[i], "checkpoint").get<Vec>();
    if (block.size() != views[i]->size())
      throw ConfigError("checkpoint: block " + block_names()[i] +
                        " has wrong length for declared dims");
    *views[i] = block;
  }
  return ckpt;
}

void save_cluster_model(const PerceivedClusterModel& model, const std::string& path) {
  json classes = json::array();
  for (const auto& [cls, mean] : model.class_means) {
    classes.push_back(json{{"class_id", cls},
                           {"mean", mean},
                           {"radius", model.radii.at(cls)},
                           {"perceived_expression_frames", model.expression_counts.at(cls)},
                           {"perceived_neutral_frames", model.neutral_counts.at(cls)}});
  }
  std::size_t total_neutral = 0;
  for (const auto& [key, perceived] : model.assignments) {
    (void)key;
    if (perceived == Perceived::Neutral) ++total_neutral;
  }
  const json j{{"neutral_mean", model.neutral_mean},
               {"total_assignments", model.assignments.size()},
               {"perceived_neutral_total", total_neutral},
               {"classes", std::move(classes)}};
  write_text_file(path, j.dump(2) + "\n");
}

// --- CSV writers ---

void write_train_log_csv(const TrainLog& log, const std::string& path) {
  std::ostringstream out;
  out << "epoch,phase,e1,e2,e3,total,lr,holdout_accuracy,wall_ms\n";
  for (const EpochRow& r : log.rows) {
    out << r.epoch << ',' << r.phase << ',' << format_double(r.e1) << ','
        << format_double(r.e2) << ',' << format_double(r.e3) << ','
        << format_double(r.total) << ',' << format_double(r.lr) << ',';
    if (r.holdout_accuracy) out << format_double(*r.holdout_accuracy);
    out << ',' << format_double(r.wall_ms) << '\n';
  }
  write_text_file(path, out.str());
}

void write_threshold_curve_csv(const std::vector<RatePoint>& curve,
                               const std::string& path) {
  std::ostringstream out;
  out << "theta,rate,correct,total\n";
  for (const RatePoint& p : curve) {
    out << format_double(p.theta) << ',' << format_double(p.rate) << ',' << p.correct
        << ',' << p.total << '\n';
  }
  write_text_file(path, out.str());
}

void write_similarity_curves_csv(
    const std::map<int, std::vector<SimilarityBin>>& curves, const std::string& path) {
  std::ostringstream out;
  out << "class_id,bin,t_center,mean_cosine,count\n";
  for (const auto& [cls, curve] : curves) {
    for (std::size_t b = 0; b < curve.size(); ++b) {
      out << cls << ',' << b << ',' << format_double(curve[b].t_center) << ','
          << format_double(curve[b].mean) << ',' << curve[b].count << '\n';
    }
  }
  write_text_file(path, out.str());
}

void write_eval_summary_json(const EvalReport& report, const std::string& path) {
  json thetas = json::array();
  json rates = json::array();
  for (const RatePoint& p : report.curve) {
    thetas.push_back(p.theta);
    rates.push_back(p.rate);
  }
  const json j{{"sequence_accuracy", report.seq_accuracy.accuracy},
               {"sequences_correct", report.seq_accuracy.correct},
               {"sequences_total", report.seq_accuracy.total},
               {"theta_grid", std::move(thetas)},
               {"recognition_rates", std::move(rates)},
               {"classes", report.similarity.size()}};
  write_text_file(path, j.dump(2) + "\n");
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_json, std::uint64_t seed,
                    const std::vector<std::pair<std::string, std::string>>& inputs,
                    const std::vector<std::string>& outputs, double duration_ms) {
  json in_obj;
  for (const auto& [label, p] : inputs) in_obj[label] = p;
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  const json j{
      {"command", command},
      {"config", parse_json(config_json, "manifest config snapshot")},
      {"seed", seed},
      {"inputs", std::move(in_obj)},
      {"outputs", outputs},
      {"code_version", kCodeVersion},
      {"written_at_unix_ms",
       std::chrono::duration_cast<std::chrono::milliseconds>(now).count()},
      {"duration_ms", duration_ms}};
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace otf
