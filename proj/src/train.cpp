#include "mrccs/train.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mrccs/errors.hpp"

namespace fs = std::filesystem;

namespace mrccs {
namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string fixed4(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw DataError("cannot write " + path);
}

}  // namespace

void parse_ratio(const std::string& text, long* num, long* den) {
  size_t slash = text.find('/');
  long n = 0, d = 0;
  if (slash != std::string::npos) {
    std::string a = text.substr(0, slash);
    std::string b = text.substr(slash + 1);
    if (!all_digits(a) || !all_digits(b))
      throw ConfigError("bad ratio \"" + text +
                        "\" (want \"num/den\" or a decimal percent)");
    n = std::stol(a);
    d = std::stol(b);
  } else {
    // Decimal percent: digits with an optional fractional part.
    size_t dot = text.find('.');
    std::string whole = dot == std::string::npos ? text : text.substr(0, dot);
    std::string frac = dot == std::string::npos ? "" : text.substr(dot + 1);
    if (!all_digits(whole) || (dot != std::string::npos && !all_digits(frac)))
      throw ConfigError("bad ratio \"" + text +
                        "\" (want \"num/den\" or a decimal percent)");
    if (frac.size() > 9)
      throw ConfigError("ratio \"" + text + "\" has too many decimal places");
    n = std::stol(whole + frac);
    d = 100;
    for (size_t i = 0; i < frac.size(); ++i) d *= 10;
  }
  if (n <= 0 || d <= 0)
    throw ConfigError("ratio \"" + text + "\" must be positive");
  long g = std::gcd(n, d);
  *num = n / g;
  *den = d / g;
}

std::string ratio_percent_text(const SensingPlan& plan) {
  double pct = 100.0 * static_cast<double>(plan.m) /
               static_cast<double>(plan.pixels_per_block());
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", pct);
  std::string s = buf;
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

void TrainConfig::validate() const {
  model.validate();
  if (epochs < 1 || epochs > 200)
    throw ConfigError("epochs must be in [1,200], got " +
                      std::to_string(epochs));
  if (steps_per_epoch < 1)
    throw ConfigError("steps_per_epoch must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (checkpoint_every < 1)
    throw ConfigError("checkpoint_every must be positive");
  const int mult = std::lcm(1 << model.plan.k, 4);
  if (patch < mult || patch % mult != 0)
    throw ConfigError("patch size " + std::to_string(patch) +
                      " must be a positive multiple of " +
                      std::to_string(mult));
}

KvMap TrainConfig::to_kv() const {
  KvMap kv;
  kv["ratio"] = model.plan.ratio_string();
  kv["variant"] = variant_name(model.plan.variant);
  kv["feature_width"] = std::to_string(model.plan.feature_width);
  kv["deep_channels"] = std::to_string(model.deep_channels);
  kv["mrb_count"] = std::to_string(model.mrb_count);
  kv["measurements_reuse"] = model.measurements_reuse ? "1" : "0";
  kv["epochs"] = std::to_string(epochs);
  kv["steps_per_epoch"] = std::to_string(steps_per_epoch);
  kv["batch_size"] = std::to_string(batch_size);
  kv["patch"] = std::to_string(patch);
  kv["checkpoint_every"] = std::to_string(checkpoint_every);
  kv["seed"] = std::to_string(seed);
  return kv;
}

TrainConfig TrainConfig::from_kv(KvReader& reader) {
  TrainConfig cfg;
  SensingVariant variant =
      variant_from_name(reader.get_string("variant", "gsm_plus"));
  long num = 0, den = 0;
  parse_ratio(reader.get_string("ratio"), &num, &den);
  int feature_width =
      static_cast<int>(reader.get_int("feature_width", 16));
  cfg.model.plan = plan_sensing(num, den, variant, feature_width);
  cfg.model.deep_channels =
      static_cast<int>(reader.get_int("deep_channels", 32));
  cfg.model.mrb_count = static_cast<int>(reader.get_int("mrb_count", 2));
  cfg.model.measurements_reuse = reader.get_bool("measurements_reuse", true);
  cfg.epochs = static_cast<int>(reader.get_int("epochs", 200));
  cfg.steps_per_epoch =
      static_cast<int>(reader.get_int("steps_per_epoch", 400));
  cfg.batch_size = static_cast<int>(reader.get_int("batch_size", 4));
  cfg.patch = static_cast<int>(reader.get_int("patch", 96));
  cfg.checkpoint_every =
      static_cast<int>(reader.get_int("checkpoint_every", 20));
  cfg.seed = reader.get_u64("seed", 1);
  cfg.validate();
  return cfg;
}

TrainConfig TrainConfig::from_kv(const KvMap& kv) {
  KvReader reader(kv);
  TrainConfig cfg = from_kv(reader);
  reader.finish();
  return cfg;
}

BatchLoss build_batch_loss(Tape& tape, const Model& model,
                           const std::vector<Tensor3>& batch,
                           ParamStore& store) {
  if (batch.empty()) throw ConfigError("loss needs a nonempty batch");
  BatchLoss out;
  for (const auto& x : batch) {
    Tape::NodeId xn = tape.constant(x);
    ForwardNodes f = model.build_forward(tape, xn, store);
    Tape::NodeId li = tape.sum_squares(tape.sub(f.initial, xn));
    Tape::NodeId ld = tape.sum_squares(tape.sub(f.refined, xn));
    out.initial = out.initial < 0 ? li : tape.add(out.initial, li);
    out.deep = out.deep < 0 ? ld : tape.add(out.deep, ld);
  }
  out.total = tape.add(out.deep, out.initial);
  return out;
}

float loss_initial(const Model& model, const std::vector<Tensor3>& batch,
                   ParamStore& store) {
  Tape tape;
  return tape.scalar(build_batch_loss(tape, model, batch, store).initial);
}

float loss_deep(const Model& model, const std::vector<Tensor3>& batch,
                ParamStore& store) {
  Tape tape;
  return tape.scalar(build_batch_loss(tape, model, batch, store).deep);
}

float loss_total(const Model& model, const std::vector<Tensor3>& batch,
                 ParamStore& store) {
  Tape tape;
  return tape.scalar(build_batch_loss(tape, model, batch, store).total);
}

TrainResult train(const TrainConfig& cfg, const std::vector<Tensor3>& images,
                  const std::string& out_dir, std::ostream* progress) {
  cfg.validate();
  if (images.empty()) throw DataError("no training images given");
  fs::create_directories(out_dir);

  const KvMap cfg_kv = cfg.to_kv();
  write_text_file(out_dir + "/config.txt", serialize_kv(cfg_kv));

  Model model(cfg.model);
  ParamStore store;
  model.register_params(store);
  model.init_params(store, cfg.seed);
  AdamState adam;

  const std::string log_path = out_dir + "/train_log.csv";
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw DataError("cannot write " + log_path);
  log << "epoch,step,loss,lr\n";

  std::string last_checkpoint;
  long global_step = 0;
  double epoch_mean = 0.0;
  char buf[128];
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(epoch);
    double loss_sum = 0.0;
    for (int step = 0; step < cfg.steps_per_epoch; ++step, ++global_step) {
      const uint64_t step_seed =
          Rng::mix(cfg.seed, static_cast<uint64_t>(global_step) + 1);
      PatchBatch batch =
          sample_patches(images, step_seed, cfg.batch_size, cfg.patch);
      Tape tape;
      BatchLoss loss = build_batch_loss(tape, model, batch.patches, store);
      const float total = tape.scalar(loss.total);
      if (!std::isfinite(total))
        throw NumericError(
            "training loss became non-finite at epoch " +
            std::to_string(epoch) + ", step " + std::to_string(step) +
            "; last good checkpoint: " +
            (last_checkpoint.empty() ? "(none)" : last_checkpoint));
      store.zero_grads();
      tape.backward(loss.total);
      adam.step(store, lr);
      loss_sum += total;
      std::snprintf(buf, sizeof(buf), "%d,%d,%.9g,%.17g\n", epoch, step,
                    static_cast<double>(total), lr);
      log << buf;
    }
    epoch_mean = loss_sum / cfg.steps_per_epoch;
    if (progress) {
      std::snprintf(buf, sizeof(buf), "epoch %d mean_loss %.6g lr %.17g\n",
                    epoch, epoch_mean, lr);
      *progress << buf << std::flush;
    }
    if ((epoch + 1) % cfg.checkpoint_every == 0) {
      std::snprintf(buf, sizeof(buf), "/checkpoint_epoch%03d.mrcc", epoch + 1);
      const std::string path = out_dir + buf;
      save_checkpoint(path, cfg_kv, store);
      last_checkpoint = path;
    }
  }
  log.flush();
  if (!log) throw DataError("cannot write " + log_path);

  TrainResult result;
  result.final_checkpoint = out_dir + "/checkpoint_final.mrcc";
  save_checkpoint(result.final_checkpoint, cfg_kv, store);
  result.log_path = log_path;
  result.last_epoch_mean_loss = epoch_mean;
  return result;
}

MetricsReport evaluate(const Model& model, ParamStore& store,
                       const std::vector<NamedImage>& images,
                       const std::string& dataset_name,
                       const std::string& out_dir,
                       const std::string& expected_ratio) {
  const SensingPlan& plan = model.config().plan;
  if (!expected_ratio.empty()) {
    long num = 0, den = 0;
    parse_ratio(expected_ratio, &num, &den);
    if (static_cast<long>(plan.m) * den !=
        num * plan.pixels_per_block())
      throw ConfigError("checkpoint sensing ratio " + plan.ratio_string() +
                        " does not match requested ratio " + expected_ratio);
  }
  if (images.empty()) throw DataError("evaluation set is empty");
  if (!out_dir.empty()) fs::create_directories(out_dir);

  const double ratio_pct = 100.0 * static_cast<double>(plan.m) /
                           static_cast<double>(plan.pixels_per_block());
  const std::string sensing_name = variant_name(plan.variant);
  MetricsReport report;
  for (const auto& img : images) {
    CropRecord record;
    Tensor3 padded = pad_to_multiple(img.luma, model.size_multiple(), &record);
    ReconstructionOutput out = model.forward(padded, store);
    Tensor3 refined = crop_to(out.refined, record);
    for (float& v : refined.data) v = std::clamp(v, 0.0f, 1.0f);

    MetricRow row;
    row.dataset = dataset_name;
    row.image = img.name;
    row.ratio_percent = ratio_pct;
    row.variant = sensing_name;
    row.psnr_db = psnr(refined, img.luma);
    row.ssim = ssim(refined, img.luma);
    report.rows.push_back(row);

    if (!out_dir.empty()) {
      const std::string stem = fs::path(img.name).stem().string();
      save_gray_png(out_dir + "/" + stem + "_recon.png", refined);
      Tensor3 residual(1, refined.height, refined.width);
      for (size_t i = 0; i < residual.data.size(); ++i)
        residual.data[i] = std::fabs(refined.data[i] - img.luma.data[i]);
      save_gray_png(out_dir + "/" + stem + "_residual.png", residual);
    }
  }
  return report;
}

std::string ablation_matrix(const std::vector<Tensor3>& train_images,
                            const std::vector<NamedImage>& eval_images,
                            const std::string& eval_set_name,
                            const std::vector<std::string>& ratios,
                            const AblationBudget& budget,
                            const std::string& out_dir,
                            std::ostream* progress) {
  if (ratios.empty()) throw ConfigError("ablation needs at least one ratio");
  fs::create_directories(out_dir);

  struct Cell {
    SensingVariant variant;
    bool reuse;
    const char* label;
  };
  // Plain stacked-conv sensing first, then the residual multi-scale sampler;
  // measurements reuse off before on, so the four rows read as an upgrade
  // ladder.
  const Cell cells[4] = {
      {SensingVariant::SEQ_CONV, false, "seq_conv"},
      {SensingVariant::GSM_PLUS, false, "gsm_plus"},
      {SensingVariant::SEQ_CONV, true, "seq_conv"},
      {SensingVariant::GSM_PLUS, true, "gsm_plus"},
  };

  std::string csv = "sensing,reuse,ratio,psnr_db,ssim,checkpoint\n";
  for (size_t ci = 0; ci < 4; ++ci) {
    const Cell& cell = cells[ci];
    for (size_t ri = 0; ri < ratios.size(); ++ri) {
      long num = 0, den = 0;
      parse_ratio(ratios[ri], &num, &den);
      TrainConfig tc;
      tc.model.plan =
          plan_sensing(num, den, cell.variant, budget.feature_width);
      tc.model.deep_channels = budget.deep_channels;
      tc.model.mrb_count = budget.mrb_count;
      tc.model.measurements_reuse = cell.reuse;
      tc.epochs = 1;
      tc.steps_per_epoch = budget.steps;
      tc.batch_size = budget.batch_size;
      tc.patch = budget.patch;
      tc.checkpoint_every = tc.epochs + 1;  // final checkpoint only
      tc.seed = Rng::mix(budget.seed, ci * 64 + ri);

      const std::string cell_dir = out_dir + "/" + cell.label +
                                   (cell.reuse ? "_reuse_" : "_plain_") +
                                   ratio_percent_text(tc.model.plan);
      if (progress)
        *progress << "ablation cell " << cell.label
                  << (cell.reuse ? "+reuse" : "") << " @ "
                  << ratio_percent_text(tc.model.plan) << "%\n"
                  << std::flush;
      TrainResult trained = train(tc, train_images, cell_dir);

      ParamContainer loaded = load_checkpoint(trained.final_checkpoint);
      Model model(tc.model);
      MetricsReport report =
          evaluate(model, loaded.params, eval_images, eval_set_name);
      csv += std::string(cell.label) + "," + (cell.reuse ? "1" : "0") + "," +
             ratio_percent_text(tc.model.plan) + "," +
             fixed4(report.mean_psnr()) + "," + fixed4(report.mean_ssim()) +
             "," + trained.final_checkpoint + "\n";
    }
  }
  const std::string csv_path = out_dir + "/ablation.csv";
  write_text_file(csv_path, csv);
  return csv_path;
}

}  // namespace mrccs
