#include "xfer/cli/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "xfer/augment.hpp"
#include "xfer/curves.hpp"
#include "xfer/dataset.hpp"
#include "xfer/error.hpp"
#include "xfer/eval.hpp"
#include "xfer/io.hpp"
#include "xfer/model_io.hpp"
#include "xfer/train.hpp"
#include "xfer/transfer.hpp"

namespace xfer::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::uint64_t seed = 42;
  std::string out;
};

struct SynthOptions {
  Common common;
  std::size_t per_class = 120;
  std::size_t image_size = 32;
};

struct AugmentOptions {
  Common common;
  std::string in;
  AugmentSpec spec;
};

struct TrainOptions {
  Common common;
  std::string data;
  std::string model;  // retrain only
  std::string cache;  // retrain only
  std::vector<std::string> classes;
  double lr = 0.01;
  std::size_t epochs = 50;
  std::size_t batch = 32;
  double test_fraction = 0.2;
  std::size_t image_size = 32;
  std::size_t hidden = 32;
};

struct EvaluateOptions {
  Common common;
  std::string model;
  std::string data;
  std::string matrix;
  double test_fraction = 0.2;
  std::string on = "test";
};

struct ReportOptions {
  std::string in;
  std::string format = "table";
};

class Progress {
 public:
  Progress(std::ostream& err, std::string command) : err_(err), command_(std::move(command)) {}
  void operator()(const std::string& message) const {
    err_ << "xfer " << command_ << ": " << message << "\n";
  }

 private:
  std::ostream& err_;
  std::string command_;
};

void require_dir_arg(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

void require_existing(const std::string& path, const char* flag) {
  if (!fs::exists(path)) throw UsageError(std::string(flag) + " '" + path + "' does not exist");
}

TrainConfig train_config(const TrainOptions& o) {
  TrainConfig c;
  c.learning_rate = o.lr;
  c.epochs = o.epochs;
  c.batch_size = o.batch;
  c.seed = o.common.seed;
  c.validation_fraction = o.test_fraction;
  c.validate();
  return c;
}

EpochCallback epoch_logger(const Progress& log) {
  return [&log](std::size_t epoch, const EpochRecord& r) {
    log("epoch=" + std::to_string(epoch) + " train_acc=" + fixed(r.train_accuracy, 4) +
        " val_acc=" + fixed(r.validation_accuracy, 4) + " train_ce=" +
        fixed(r.train_cross_entropy, 4) + " val_ce=" + fixed(r.validation_cross_entropy, 4));
  };
}

Dataset load_dataset(const std::string& root, std::size_t width, std::size_t height,
                     const Progress& log) {
  auto r = ingest_directory(root, IngestOptions{std::pair{width, height}});
  for (const auto& s : r.skipped) log("warning: skipped " + s.path + ": " + s.reason);
  log("ingested images=" + std::to_string(r.dataset.size()) +
      " classes=" + std::to_string(r.dataset.class_count()) +
      " skipped=" + std::to_string(r.skipped.size()));
  return std::move(r.dataset);
}

BottleneckCache subset(const BottleneckCache& cache, const Dataset& ds) {
  std::map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < cache.size(); ++i) row[cache.ids[i]] = i;
  BottleneckCache out{cache.fingerprint, cache.length, {}, {}};
  for (const auto& item : ds.items()) {
    const auto it = row.find(item.id);
    if (it == row.end()) throw StaleCacheError("bottleneck cache has no row for '" + item.id + "'");
    out.ids.push_back(item.id);
    out.features.push_back(cache.features[it->second]);
  }
  return out;
}

int run_synth(const SynthOptions& o, std::ostream&, std::ostream& err) {
  Progress log(err, "synth");
  require_dir_arg(o.common.out, "--out");
  const Dataset ds = synth_shapes(o.per_class, o.image_size, o.common.seed);
  write_dataset(ds, o.common.out);
  log("wrote images=" + std::to_string(ds.size()) + " to " + o.common.out);
  return kOk;
}

int run_augment(const AugmentOptions& o, std::ostream&, std::ostream& err) {
  Progress log(err, "augment");
  require_dir_arg(o.in, "--in");
  require_dir_arg(o.common.out, "--out");
  o.spec.validate();
  auto r = ingest_directory(o.in);
  for (const auto& s : r.skipped) log("warning: skipped " + s.path + ": " + s.reason);
  const Dataset aug = augment_dataset(r.dataset, o.spec, o.common.seed);
  write_dataset(aug, o.common.out);
  write_file_atomic(fs::path(o.common.out) / "augment_manifest.csv", augment_manifest_csv(aug));
  log("wrote images=" + std::to_string(aug.size()) + " from sources=" +
      std::to_string(r.dataset.size()));
  return kOk;
}

int run_train_base(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  Progress log(err, "train-base");
  require_dir_arg(o.data, "--data");
  require_dir_arg(o.common.out, "--out");
  require_existing(o.data, "--data");
  const TrainConfig cfg = train_config(o);
  Dataset ds = load_dataset(o.data, o.image_size, o.image_size, log);
  if (!o.classes.empty()) ds = ds.select_classes(o.classes);
  const auto split = stratified_split(ds, SplitSpec{o.test_fraction, o.common.seed, true});
  const auto train = examples_from(split.train);
  const auto val = examples_from(split.test);

  CnnSpec spec;
  spec.input = Shape{3, o.image_size, o.image_size};
  spec.hidden = o.hidden;
  spec.classes = ds.class_count();
  Network net = make_cnn(spec, o.common.seed);
  log("training classes=" + std::to_string(spec.classes) + " train=" +
      std::to_string(train.size()) + " val=" + std::to_string(val.size()) +
      " params=" + std::to_string(net.parameter_count()));
  const auto result = train_full(std::move(net), ExampleSpan(train), ExampleSpan(val), cfg,
                                 epoch_logger(log));
  const fs::path dir = o.common.out;
  save_model(result.net, dir / "model.json");
  write_file_atomic(dir / "base_curves.csv", emit_curves_csv(result.log));
  const auto& last = result.log.epochs.back();
  out << "train_acc " << fixed(last.train_accuracy) << "\nval_acc " << fixed(last.validation_accuracy)
      << "\n";
  log("wrote " + (dir / "model.json").string());
  return kOk;
}

int run_retrain(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  Progress log(err, "retrain");
  require_dir_arg(o.model, "--model");
  require_dir_arg(o.data, "--data");
  require_dir_arg(o.common.out, "--out");
  require_existing(o.model, "--model");
  require_existing(o.data, "--data");
  const TrainConfig cfg = train_config(o);
  const Network base = load_model(o.model);
  base.require_head();
  Dataset ds = load_dataset(o.data, base.input_shape().width, base.input_shape().height, log);
  if (!o.classes.empty()) ds = ds.select_classes(o.classes);
  const auto split = stratified_split(ds, SplitSpec{o.test_fraction, o.common.seed, true});

  const fs::path dir = o.common.out;
  BottleneckCache cache;
  if (!o.cache.empty() && fs::exists(o.cache)) {
    cache = load_bottlenecks(o.cache);
    require_fresh(cache, base);
    log("reusing bottleneck cache " + o.cache);
  } else {
    cache = extract_bottlenecks(base, ds);
    const fs::path where = o.cache.empty() ? dir / "bottlenecks.json" : fs::path(o.cache);
    save_bottlenecks(cache, where);
    log("extracted bottlenecks=" + std::to_string(cache.size()) + " length=" +
        std::to_string(cache.length) + " to " + where.string());
  }
  const BottleneckCache train = subset(cache, split.train);
  const BottleneckCache val = subset(cache, split.test);
  const auto train_labels = split.train.labels();
  const auto val_labels = split.test.labels();
  const std::string before = prefix_fingerprint(base);
  const auto head = retrain_head(train, train_labels, val, val_labels, ds.class_count(), cfg,
                                 epoch_logger(log));
  const Network retrained = attach_head(base, head.head);
  if (prefix_fingerprint(retrained) != before) {
    throw ContractError("feature extractor changed during head retraining");
  }
  save_model(retrained, dir / "retrained.json");
  write_file_atomic(dir / "head_curves.csv", emit_curves_csv(head.log));
  const auto& last = head.log.epochs.back();
  out << "train_acc " << fixed(last.train_accuracy) << "\nval_acc " << fixed(last.validation_accuracy)
      << "\nprefix_sha256 " << before << "\n";
  log("wrote " + (dir / "retrained.json").string());
  return kOk;
}

void write_report(const ConfusionMatrix& cm, const fs::path& dir, std::ostream& out) {
  const MetricsReport report = make_report(cm);
  write_file_atomic(dir / "report.json", emit_report(report, ReportFormat::json));
  const std::string table = emit_report(report, ReportFormat::table);
  write_file_atomic(dir / "report.txt", table);
  write_file_atomic(dir / "confusion.csv", matrix_csv(cm));
  out << table;
}

int run_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  Progress log(err, "evaluate");
  require_dir_arg(o.common.out, "--out");
  const fs::path dir = o.common.out;
  if (!o.matrix.empty()) {
    if (!o.model.empty() || !o.data.empty()) {
      throw UsageError("--matrix cannot be combined with --model/--data");
    }
    require_existing(o.matrix, "--matrix");
    const ConfusionMatrix cm = parse_matrix_csv(read_file(o.matrix));
    log("replaying matrix classes=" + std::to_string(cm.k()) + " total=" + std::to_string(cm.total()));
    write_report(cm, dir, out);
    return kOk;
  }
  require_dir_arg(o.model, "--model");
  require_dir_arg(o.data, "--data");
  require_existing(o.model, "--model");
  require_existing(o.data, "--data");
  if (o.on != "test" && o.on != "all") throw UsageError("--on must be 'test' or 'all'");
  const Network net = load_model(o.model);
  const Dataset ds = load_dataset(o.data, net.input_shape().width, net.input_shape().height, log);
  if (net.class_count() != ds.class_count()) {
    throw DataError("model predicts " + std::to_string(net.class_count()) + " classes, dataset has " +
                    std::to_string(ds.class_count()));
  }
  const Dataset target =
      o.on == "all" ? ds : stratified_split(ds, SplitSpec{o.test_fraction, o.common.seed, true}).test;
  const auto examples = examples_from(target);
  const SplitScore score = evaluate_split(net, ExampleSpan(examples));
  log("evaluated images=" + std::to_string(examples.size()) + " accuracy=" + fixed(score.accuracy, 4) +
      " cross_entropy=" + fixed(score.cross_entropy, 4));
  write_report(confusion_from_predictions(score.predictions, ds.class_count(), ds.class_names()), dir,
               out);
  return kOk;
}

int run_report(const ReportOptions& o, std::ostream& out, std::ostream&) {
  require_dir_arg(o.in, "--in");
  require_existing(o.in, "--in");
  const MetricsReport report = parse_report_json(read_file(o.in));
  out << emit_report(report, o.format == "json" ? ReportFormat::json : ReportFormat::table);
  return kOk;
}

void add_common(CLI::App* cmd, Common& c, bool needs_out = true) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  if (needs_out) cmd->add_option("--out", c.out, "Output directory")->required();
}

void add_training(CLI::App* cmd, TrainOptions& o) {
  cmd->add_option("--data", o.data, "Dataset root (root/<class>/<image>.ppm)")->required();
  cmd->add_option("--lr", o.lr, "Learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", o.epochs, "Epochs")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--batch", o.batch, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--test-fraction", o.test_fraction, "Held-out fraction per class")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--classes", o.classes, "Restrict to these classes, in this order")->delimiter(',');
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transfer-learning image classification toolkit", "xfer"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_config("--config", "", "TOML config file; flags override its values");
  app.allow_config_extras(CLI::config_extras_mode::error);

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "Generate the synthetic 5-class shapes dataset");
  add_common(s, synth.common);
  s->add_option("--per-class", synth.per_class, "Images per class")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--image-size", synth.image_size, "Image side in pixels")->capture_default_str()->check(CLI::Range(16, 4096));

  AugmentOptions aug;
  auto* a = app.add_subcommand("augment", "Write original + 5 augmented variants per image");
  add_common(a, aug.common);
  a->add_option("--in", aug.in, "Input dataset root")->required();
  a->add_option("--rotation", aug.spec.rotation_degrees, "Rotation in degrees")->capture_default_str();
  a->add_option("--translation", aug.spec.translation_fraction, "Max shift as a fraction of size")->capture_default_str();
  a->add_option("--lighting", aug.spec.lighting_factor, "Brightness factor")->capture_default_str();

  TrainOptions base;
  auto* tb = app.add_subcommand("train-base", "Train the small CNN on all of its parameters");
  add_common(tb, base.common);
  add_training(tb, base);
  tb->add_option("--image-size", base.image_size, "Resize images to this side")->capture_default_str()->check(CLI::Range(4, 4096));
  tb->add_option("--hidden", base.hidden, "Units in the feature layer")->capture_default_str()->check(CLI::PositiveNumber);

  TrainOptions re;
  auto* rt = app.add_subcommand("retrain", "Freeze the feature extractor and retrain the final layer");
  add_common(rt, re.common);
  add_training(rt, re);
  rt->add_option("--model", re.model, "Base model JSON")->required();
  rt->add_option("--cache", re.cache, "Bottleneck cache file to reuse or create");

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "Confusion matrix and metrics report");
  add_common(e, ev.common);
  e->add_option("--model", ev.model, "Model JSON");
  e->add_option("--data", ev.data, "Dataset root");
  e->add_option("--matrix", ev.matrix, "Confusion-matrix CSV to replay instead of a model");
  e->add_option("--test-fraction", ev.test_fraction, "Held-out fraction per class")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  e->add_option("--on", ev.on, "Evaluate the held-out split ('test') or every image ('all')")->capture_default_str();

  ReportOptions rep;
  auto* r = app.add_subcommand("report", "Render a report.json");
  r->add_option("--in", rep.in, "report.json")->required();
  r->add_option("--format", rep.format, "table or json")->capture_default_str()->check(CLI::IsMember({"table", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (s->parsed()) return run_synth(synth, out, err);
    if (a->parsed()) return run_augment(aug, out, err);
    if (tb->parsed()) return run_train_base(base, out, err);
    if (rt->parsed()) return run_retrain(re, out, err);
    if (e->parsed()) return run_evaluate(ev, out, err);
    if (r->parsed()) return run_report(rep, out, err);
  } catch (const UsageError& ex) {
    err << "xfer: usage error: " << ex.what() << "\n";
    return kUsage;
  } catch (const NumericError& ex) {
    err << "xfer: numeric error: " << ex.what() << "\n";
    return kNumeric;
  } catch (const DataError& ex) {
    err << "xfer: data error: " << ex.what() << "\n";
    return kData;
  } catch (const std::exception& ex) {
    err << "xfer: error: " << ex.what() << "\n";
    return kData;
  }
  return kUsage;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"xfer"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace xfer::cli
