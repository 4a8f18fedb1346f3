#include "spoofbench/training/train.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "spoofbench/metrics/eer.hpp"

namespace spoofbench::training {
namespace {

std::string_view scheduler_name(Scheduler s) {
  return s == Scheduler::plateau_halving ? "plateau_halving" : "none";
}

Scheduler parse_scheduler(const std::string& s) {
  if (s == "plateau_halving") return Scheduler::plateau_halving;
  if (s == "none") return Scheduler::none;
  throw IncompatibleConfigs("unknown scheduler " + s);
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

dataio::DatasetManifest select_splits(const dataio::DatasetManifest& m,
                                      const std::set<dataio::Split>& splits) {
  dataio::DatasetManifest out{m.name, {}};
  for (const auto& e : m.entries) {
    if (splits.count(e.split)) out.entries.push_back(e);
  }
  return out;
}

void set_lr(torch::optim::Adam& opt, double lr) {
  for (auto& g : opt.param_groups()) static_cast<torch::optim::AdamOptions&>(g.options()).lr(lr);
}

double eer_or_nan(const std::vector<metrics::ScoreRecord>& records) {
  try {
    return metrics::compute_eer(records).eer;
  } catch (const metrics::SingleClassInput&) {
    return std::nan("");
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw IncompatibleConfigs("learning_rate must be positive");
  if (patience < 1) throw IncompatibleConfigs("patience must be at least 1");
  if (max_epochs < 1) throw IncompatibleConfigs("max_epochs must be at least 1");
  if (batch_size < 1) throw IncompatibleConfigs("batch_size must be at least 1");
  if (!(scheduler_factor > 0.0 && scheduler_factor < 1.0)) {
    throw IncompatibleConfigs("scheduler_factor must lie in (0, 1)");
  }
  if (lr_floor < 0.0) throw IncompatibleConfigs("lr_floor must be non-negative");
  if (train_splits.empty()) throw IncompatibleConfigs("train_splits must not be empty");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  std::vector<std::string> splits;
  for (auto s : c.train_splits) splits.emplace_back(dataio::to_string(s));
  j = {{"learning_rate", c.learning_rate},
       {"max_epochs", c.max_epochs},
       {"patience", c.patience},
       {"batch_size", c.batch_size},
       {"seed", c.seed},
       {"scheduler", std::string(scheduler_name(c.scheduler))},
       {"scheduler_patience", c.scheduler_patience},
       {"scheduler_factor", c.scheduler_factor},
       {"lr_floor", c.lr_floor},
       {"train_splits", splits},
       {"stop_on", c.stop_on == StopCriterion::dev_loss ? "dev_loss" : "dev_eer"},
       {"dropout", c.dropout}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  static const std::set<std::string> known = {
      "learning_rate", "max_epochs", "patience",  "batch_size", "seed",    "scheduler",
      "scheduler_patience", "scheduler_factor", "lr_floor", "train_splits", "stop_on", "dropout"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw IncompatibleConfigs("unknown training key '" + k + "'");
  }
  TrainConfig d;
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.max_epochs = j.value("max_epochs", d.max_epochs);
  c.patience = j.value("patience", d.patience);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.seed = j.value("seed", d.seed);
  c.scheduler = parse_scheduler(j.value("scheduler", std::string("plateau_halving")));
  c.scheduler_patience = j.value("scheduler_patience", d.scheduler_patience);
  c.scheduler_factor = j.value("scheduler_factor", d.scheduler_factor);
  c.lr_floor = j.value("lr_floor", d.lr_floor);
  c.train_splits = d.train_splits;
  if (j.contains("train_splits")) {
    c.train_splits.clear();
    for (const auto& s : j.at("train_splits")) c.train_splits.insert(dataio::parse_split(s.get<std::string>()));
  }
  const auto stop = j.value("stop_on", std::string("dev_loss"));
  if (stop == "dev_loss") {
    c.stop_on = StopCriterion::dev_loss;
  } else if (stop == "dev_eer") {
    c.stop_on = StopCriterion::dev_eer;
  } else {
    throw IncompatibleConfigs("unknown stop_on " + stop);
  }
  c.dropout = j.value("dropout", d.dropout);
  c.validate();
}

nlohmann::json to_json_line(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"train_loss", finite_or_null(r.train_loss)},
          {"dev_loss", finite_or_null(r.dev_loss)},
          {"dev_eer", finite_or_null(r.dev_eer)},
          {"lr", r.lr}};
}

bool EarlyStopper::observe(double value) {
  ++epoch_;
  if (epoch_ == 1 || value < best_) {
    best_ = value;
    best_epoch_ = epoch_;
    bad_ = 0;
  } else {
    ++bad_;
  }
  return bad_ >= patience_;
}

double PlateauScheduler::observe(double value) {
  if (!seen_ || value < best_) {
    seen_ = true;
    best_ = value;
    bad_ = 0;
  } else if (++bad_ >= patience_) {
    lr_ = std::max(lr_ * factor_, floor_);
    bad_ = 0;
  }
  return lr_;
}

torch::Tensor classification_loss(const torch::Tensor& logits, const torch::Tensor& labels) {
  // Float32 log-softmax of O(10) logits is quantized near 5e-7, which swamps
  // the loss once a model fits its data; the two-column head is cheap in double.
  return torch::nll_loss(torch::log_softmax(logits.to(torch::kFloat64), 1), labels);
}

EvalOutput score_manifest(models::DetectorImpl& model, const dataio::DatasetManifest& manifest,
                          const FeatureSource& source, std::size_t batch_size) {
  const bool was_training = model.is_training();
  model.eval();
  torch::NoGradGuard ng;
  EvalOutput out;
  out.records.resize(manifest.size());
  std::vector<std::size_t> lengths(manifest.size(), 0);
  if (source.policy().mode == features::LengthMode::full) lengths = feature_lengths(manifest, source);
  double loss_sum = 0.0;
  for (const auto& idx : plan_eval_batches(lengths, batch_size, source.policy().mode)) {
    auto batch = load_batch(manifest, source, idx);
    auto logits = models::forward(model, batch);
    loss_sum += classification_loss(logits, batch.labels).item<double>() * idx.size();
    const auto s = models::score(logits);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto& e = manifest.entries[idx[k]];
      out.records[idx[k]] = {e.utt_id, s[k], e.label};
    }
  }
  out.mean_loss = manifest.size() ? loss_sum / manifest.size() : std::nan("");
  model.train(was_training);
  return out;
}

TrainResult train(const models::ModelConfig& model_cfg, const features::FeatureConfig& feat_cfg,
                  const features::LengthPolicy& policy, const dataio::DatasetManifest& train_set,
                  const dataio::DatasetManifest& dev_set, const TrainConfig& cfg,
                  const TrainOptions& options) {
  cfg.validate();
  feat_cfg.validate();
  const bool raw_feature = !features::is_spectral(feat_cfg.kind);
  if (raw_feature != (models::required_input(model_cfg.id) == models::InputKind::raw)) {
    throw IncompatibleConfigs(std::string(models::to_string(model_cfg.id)) + " cannot consume " +
                              std::string(features::to_string(feat_cfg.kind)) + " features");
  }
  const auto train_m = select_splits(train_set, cfg.train_splits);
  if (train_m.entries.empty()) throw EmptyManifest("no training entries in the selected splits");
  if (dev_set.entries.empty()) throw EmptyManifest("dev manifest is empty");

  std::optional<FeatureSource> own_train, own_dev;
  const FeatureSource* train_src = options.train_source;
  const FeatureSource* dev_src = options.dev_source;
  if (!train_src) train_src = &own_train.emplace(feat_cfg, policy);
  if (!dev_src) dev_src = &own_dev.emplace(feat_cfg, policy);
  if (!(train_src->feature() == feat_cfg) || !(dev_src->feature() == feat_cfg)) {
    throw IncompatibleConfigs("feature source does not match the feature config");
  }

  auto model = models::build(model_cfg);
  model->set_dropout_enabled(cfg.dropout);
  model->set_generator(at::detail::createCPUGenerator(mix_seed(cfg.seed, 0x5eed)));
  torch::optim::Adam opt(model->parameters(), torch::optim::AdamOptions(cfg.learning_rate));

  std::ofstream log;
  if (options.log_path) {
    if (options.log_path->has_parent_path()) {
      std::filesystem::create_directories(options.log_path->parent_path());
    }
    log.open(*options.log_path, std::ios::trunc);
    if (!log) throw Error("cannot write training log " + options.log_path->string());
  }

  EarlyStopper stopper(cfg.patience);
  PlateauScheduler scheduler(cfg.learning_rate, cfg.scheduler_factor, cfg.scheduler_patience,
                             cfg.lr_floor);
  TrainResult result;
  result.checkpoint.model = model_cfg;
  result.checkpoint.feature = feat_cfg;
  result.checkpoint.policy = policy;
  double lr = cfg.learning_rate;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    model->train();
    BatchIterator it(train_m, *train_src, cfg.batch_size, cfg.seed, epoch);
    double loss_sum = 0.0;
    std::size_t seen = 0, step = 0;
    while (auto batch = it.next()) {
      opt.zero_grad();
      auto loss = classification_loss(models::forward(*model, *batch), batch->labels);
      const double v = loss.item<double>();
      if (!std::isfinite(v)) {
        throw NonFiniteLoss("non-finite training loss at epoch " + std::to_string(epoch) +
                            ", step " + std::to_string(step) + " (first item " +
                            batch->utt_ids.front() + ", lr " + std::to_string(lr) + ")");
      }
      loss.backward();
      opt.step();
      loss_sum += v * batch->size();
      seen += batch->size();
      ++step;
    }

    auto dev = score_manifest(*model, dev_set, *dev_src, cfg.batch_size);
    if (!std::isfinite(dev.mean_loss)) {
      throw NonFiniteLoss("non-finite dev loss at epoch " + std::to_string(epoch));
    }
    EpochRecord rec{epoch, loss_sum / seen, dev.mean_loss, eer_or_nan(dev.records), lr};
    result.history.epochs.push_back(rec);
    if (log) log << to_json_line(rec).dump() << '\n' << std::flush;
    if (options.on_epoch) options.on_epoch(rec);

    double monitored = cfg.stop_on == StopCriterion::dev_loss ? rec.dev_loss : rec.dev_eer;
    if (std::isnan(monitored)) monitored = std::numeric_limits<double>::infinity();
    const bool stop = stopper.observe(monitored);
    if (stopper.best_epoch() == epoch) {
      result.checkpoint.state = capture_state(*model);
      result.checkpoint.best_epoch = epoch;
      result.checkpoint.best_dev_metric = monitored;
    }
    result.history.stopped_epoch = epoch;
    if (stop) break;
    if (cfg.scheduler == Scheduler::plateau_halving) {
      const double next = scheduler.observe(monitored);
      if (next != lr) {
        lr = next;
        set_lr(opt, lr);
      }
    }
  }
  result.history.best_epoch = stopper.best_epoch();
  return result;
}

std::vector<metrics::ScoreRecord> evaluate(const Checkpoint& checkpoint,
                                           const dataio::DatasetManifest& manifest,
                                           std::optional<std::uint64_t> seed,
                                           std::size_t batch_size, const FeatureSource* source) {
  auto policy = checkpoint.policy;
  if (seed) policy.rng_seed = *seed;
  std::optional<FeatureSource> own;
  if (!source) {
    source = &own.emplace(checkpoint.feature, policy);
  } else if (!(source->feature() == checkpoint.feature) || !(source->policy() == policy)) {
    throw IncompatibleConfigs("feature source does not match the checkpoint");
  }
  auto model = restore(checkpoint);
  return score_manifest(*model, manifest, *source, batch_size).records;
}

}  // namespace spoofbench::training
