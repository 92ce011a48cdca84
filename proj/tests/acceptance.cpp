// End-to-end acceptance gate. Runs nine independently reported checks covering
// operator linearity, exact sampling-ratio accounting, dense-matrix agreement,
// analytic-vs-numeric gradients, SSIM fidelity, optimizer convergence, quality
// ordering across ratios, schedule/determinism guarantees, and the shipped
// full-scale configuration files. Prints exactly one PASS/FAIL line per check
// on stdout (progress chatter goes to stderr) and exits with the number of
// failures. Optional arguments select a subset by number, e.g. `acceptance 6`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mrccs/checkpoint.hpp"
#include "mrccs/data.hpp"
#include "mrccs/kv.hpp"
#include "mrccs/metrics.hpp"
#include "mrccs/optim.hpp"
#include "mrccs/reconstruction.hpp"
#include "mrccs/rng.hpp"
#include "mrccs/sensing.hpp"
#include "mrccs/tape.hpp"
#include "mrccs/train.hpp"
#include "oracles.hpp"

using namespace mrccs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::vector<std::pair<int, int>> kRatioLadder = {
    {1, 64}, {2, 64}, {4, 64}, {8, 64}, {16, 64}, {2, 4}};

const std::vector<SensingVariant> kVariants = {
    SensingVariant::GSM, SensingVariant::GSM_PLUS, SensingVariant::SINGLE_CONV,
    SensingVariant::SEQ_CONV};

const char* variant_label(SensingVariant v) {
  switch (v) {
    case SensingVariant::GSM: return "gsm";
    case SensingVariant::GSM_PLUS: return "gsm_plus";
    case SensingVariant::SINGLE_CONV: return "single_conv";
    case SensingVariant::SEQ_CONV: return "seq_conv";
  }
  return "?";
}

Tensor3 random_image(Rng& rng, int h, int w, float lo = 0.0f, float hi = 1.0f) {
  Tensor3 x(1, h, w);
  for (auto& v : x.data) v = rng.uniform(lo, hi);
  return x;
}

fs::path scratch_dir(const std::string& leaf) {
  fs::path dir = fs::temp_directory_path() / "mrccs_acceptance" / leaf;
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
  return dir;
}

std::string slurp_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

// --- 1. The sensing operator is linear to float tolerance. ------------------

Outcome check_linearity() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_at;
  uint64_t seed = 101;
  for (SensingVariant variant : kVariants) {
    for (auto [num, den] : kRatioLadder) {
      Sensor sensor(plan_sensing(num, den, variant, 16));
      ParamStore store;
      sensor.register_params(store);
      Rng init_rng(seed++);
      sensor.init_params(store, init_rng);
      Rng rng(Rng::mix(4201, seed));
      for (int trial = 0; trial < 100; ++trial) {
        const float alpha = rng.uniform(-2.0f, 2.0f);
        const float beta = rng.uniform(-2.0f, 2.0f);
        Tensor3 x = random_image(rng, 96, 96, -1.0f, 1.0f);
        Tensor3 z = random_image(rng, 96, 96, -1.0f, 1.0f);
        Tensor3 mix(1, 96, 96);
        for (size_t i = 0; i < mix.data.size(); ++i) {
          mix.data[i] = alpha * x.data[i] + beta * z.data[i];
        }
        const Tensor3 sx = sensor.sense(x, store).tensor;
        const Tensor3 sz = sensor.sense(z, store).tensor;
        const Tensor3 sm = sensor.sense(mix, store).tensor;
        double num_inf = 0.0, den_inf = 0.0;
        for (size_t i = 0; i < sm.data.size(); ++i) {
          const double lin = static_cast<double>(alpha) * sx.data[i] +
                             static_cast<double>(beta) * sz.data[i];
          num_inf = std::max(num_inf, std::fabs(sm.data[i] - lin));
          den_inf = std::max(den_inf, std::fabs(lin));
        }
        const double rel = num_inf / std::max(den_inf, 1e-12);
        if (rel > worst) {
          worst = rel;
          worst_at = std::string(variant_label(variant)) + " " +
                     std::to_string(num) + "/" + std::to_string(den);
        }
      }
    }
  }
  Outcome r;
  r.ok = worst <= 1e-4;
  r.detail = "worst rel err " + format_double("%.3g", worst) + " (" + worst_at +
             "), " + format_double("%.1f", seconds_since(t0)) + " s";
  return r;
}

// --- 2. Measurement counts hit the requested ratios exactly. ----------------

Outcome check_ratio_exactness() {
  uint64_t seed = 310;
  for (SensingVariant variant : kVariants) {
    for (auto [num, den] : kRatioLadder) {
      Sensor sensor(plan_sensing(num, den, variant, 16));
      ParamStore store;
      sensor.register_params(store);
      Rng init_rng(seed++);
      sensor.init_params(store, init_rng);
      for (int size : {96, 256}) {
        const Tensor3 x(1, size, size, 0.25f);
        const Tensor3 y = sensor.sense(x, store).tensor;
        const long long count = static_cast<long long>(y.data.size());
        const long long pixels = static_cast<long long>(size) * size;
        if (count * den != static_cast<long long>(num) * pixels) {
          Outcome r;
          r.detail = std::string(variant_label(variant)) + " " +
                     std::to_string(num) + "/" + std::to_string(den) + " at " +
                     std::to_string(size) + "^2: " + std::to_string(count) +
                     " measurements from " + std::to_string(pixels) + " pixels";
          return r;
        }
      }
    }
  }
  Outcome r;
  r.ok = true;
  r.detail = "count*den == num*pixels for 4 variants x 6 ratios at 96^2 and 256^2";
  return r;
}

// --- 3. The dense materialization agrees with the operator. -----------------

Outcome check_matrix_agreement() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  uint64_t seed = 555;
  for (SensingVariant variant : kVariants) {
    for (auto [num, den] : kRatioLadder) {
      Sensor sensor(plan_sensing(num, den, variant, 16));
      ParamStore store;
      sensor.register_params(store);
      Rng init_rng(seed++);
      sensor.init_params(store, init_rng);
      const SensingMatrix mat = extract_matrix(sensor, store, 16, 16);
      Rng rng(Rng::mix(7070, seed));
      for (int img = 0; img < 20; ++img) {
        Tensor3 x = random_image(rng, 16, 16, -1.0f, 1.0f);
        const Tensor3 y = sensor.sense(x, store).tensor;
        if (static_cast<int>(y.data.size()) != mat.rows) {
          Outcome r;
          r.detail = "row count mismatch";
          return r;
        }
        double scale = 1.0;
        for (float v : y.data) scale = std::max(scale, std::fabs(static_cast<double>(v)));
        for (int rrow = 0; rrow < mat.rows; ++rrow) {
          double acc = 0.0;
          for (int c = 0; c < mat.cols; ++c) acc += static_cast<double>(mat.at(rrow, c)) * x.data[c];
          worst = std::max(worst, std::fabs(acc - y.data[rrow]) / scale);
        }
      }
    }
  }
  Outcome r;
  r.ok = worst <= 1e-4;
  r.detail = "worst rel disagreement " + format_double("%.3g", worst) + ", " +
             format_double("%.1f", seconds_since(t0)) + " s";
  return r;
}

// --- 4. Backprop gradients match central differences. -----------------------

// Central differences live on the same 32-bit forward pass as the gradients,
// so the comparison point matters twice over. At the random init the loss is
// ~2e4 and its float ULP swamps a small difference window; a short warm-up
// brings it to O(100). Training also parks some ReLU pre-activations exactly
// on their kinks, where a two-sided difference is not a derivative at all —
// those windows are detected by the FD quotient failing to stabilize across
// three step sizes (no reference to the autodiff value, so the screen cannot
// mask a real mismatch) and the next-strongest coordinate is sampled instead.
Outcome check_gradients() {
  const auto t0 = Clock::now();
  ModelConfig mc;
  mc.plan = plan_sensing(1, 4, SensingVariant::GSM_PLUS, 4);
  mc.deep_channels = 4;
  mc.mrb_count = 1;
  mc.measurements_reuse = true;
  Model model(mc);
  ParamStore store;
  model.register_params(store);
  model.init_params(store, 17);

  Rng data_rng(23);
  std::vector<Tensor3> batch;
  batch.push_back(random_image(data_rng, 16, 16));

  AdamState adam;
  for (int step = 0; step < 150; ++step) {
    Tape tape;
    BatchLoss warm = build_batch_loss(tape, model, batch, store);
    store.zero_grads();
    tape.backward(warm.total);
    adam.step(store, 1e-3);
  }

  Tape tape;
  BatchLoss loss = build_batch_loss(tape, model, batch, store);
  store.zero_grads();
  tape.backward(loss.total);
  const double loss_value = static_cast<double>(tape.value(loss.total).data[0]);

  struct Coord {
    ParamStore::Entry* entry;
    size_t index;
    double magnitude;
  };
  std::vector<Coord> by_group[3];
  for (auto& e : store) {
    const int group = e.name.rfind("sensing.", 0) == 0 ? 0
                      : e.name.rfind("init.", 0) == 0 ? 1
                                                      : 2;
    for (size_t i = 0; i < e.value.size(); ++i) {
      by_group[group].push_back({&e, i, std::fabs(e.grad[i])});
    }
  }

  size_t checked = 0;
  size_t kink_skipped = 0;
  double max_rel = 0.0;
  std::string worst = "none";
  for (auto& coords : by_group) {
    std::sort(coords.begin(), coords.end(),
              [](const Coord& a, const Coord& b) { return a.magnitude > b.magnitude; });
    int accepted = 0;
    for (size_t c = 0; c < coords.size() && accepted < 25; ++c) {
      ParamStore::Entry& e = *coords[c].entry;
      const size_t i = coords[c].index;
      const double ad = e.grad[i];
      if (std::fabs(ad) < 0.2) break;  // below this, float noise owns the quotient
      double fds[3];
      int j = 0;
      for (double h : {2e-3, 4e-3, 8e-3}) {
        const float saved = e.value[i];
        e.value[i] = static_cast<float>(saved + h);
        const double up = loss_total(model, batch, store);
        e.value[i] = static_cast<float>(saved - h);
        const double down = loss_total(model, batch, store);
        e.value[i] = saved;
        fds[j++] = (up - down) / (2.0 * h);
      }
      const double lo = std::min({fds[0], fds[1], fds[2]});
      const double hi = std::max({fds[0], fds[1], fds[2]});
      const double spread =
          (hi - lo) / std::max({std::fabs(fds[1]), std::fabs(ad), 1e-3});
      if (spread > 2e-3) {
        ++kink_skipped;
        continue;
      }
      const double rel =
          std::fabs(ad - fds[1]) / std::max({std::fabs(ad), std::fabs(fds[1]), 1e-3});
      ++accepted;
      ++checked;
      if (rel > max_rel) {
        max_rel = rel;
        worst = e.name + "[" + std::to_string(i) + "]";
      }
    }
  }

  Outcome r;
  r.ok = checked >= 50 && max_rel < 1e-2;
  r.detail = std::to_string(checked) + " params across 3 groups (" +
             std::to_string(kink_skipped) + " kink-broken windows resampled), "
             "max rel err " + format_double("%.3g", max_rel) + " at " + worst +
             ", loss " + format_double("%.3g", loss_value) + " at check point, " +
             format_double("%.1f", seconds_since(t0)) + " s";
  return r;
}

// --- 5. Fast SSIM equals the windowed brute-force sum. ----------------------

Outcome check_ssim() {
  Rng rng(6400);
  double worst = 0.0;
  for (int pair = 0; pair < 10; ++pair) {
    Tensor3 a = random_image(rng, 64, 64);
    Tensor3 b = random_image(rng, 64, 64);
    worst = std::max(worst, std::fabs(ssim(a, b) - oracles::ssim_brute(a, b)));
    if (pair == 0 && ssim(a, a) != 1.0) {
      Outcome r;
      r.detail = "ssim(x, x) != 1.0 exactly";
      return r;
    }
  }
  Outcome r;
  r.ok = worst <= 1e-6;
  r.detail = "max |fast - brute| " + format_double("%.3g", worst) +
             " over 10 pairs; ssim(x, x) == 1.0 exactly";
  return r;
}

// --- 6. The default model overfits a fixed batch well past 35 dB. -----------

Tensor3 smooth_patch(int index, int size) {
  static const int f1x[8] = {1, 2, 1, 2, 1, 0, 1, 2};
  static const int f1y[8] = {1, 0, 2, 1, 0, 1, 2, 2};
  const double tau = 6.283185307179586;
  const double p1 = tau * index / 8.0;
  Tensor3 t(1, size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double u = static_cast<double>(x) / size;
      const double v = static_cast<double>(y) / size;
      double val = 0.5 + 0.06 * (u + v - 1.0);
      val += 0.15 * std::sin(tau * (f1x[index] * u + f1y[index] * v) + p1);
      t.at(0, y, x) = static_cast<float>(val);
    }
  }
  return t;
}

// Two-phase schedule inside the 2000-step budget. Phase 1 trains only the
// sensing + initial-expansion path: its graphs cost milliseconds per step, and
// because the refinement network's output conv starts at zero, the refined
// output equals the initial one, so the refined PSNR inherits everything phase
// 1 learns. Phase 2 then trains the full model jointly on the two-term loss
// from that warm start. Joint training from scratch is far slower here: the
// deep path's gradients do little for image fit until the linear path is good,
// so spending whole-model steps on that stretch wastes most of the budget.
Outcome check_overfit() {
  const auto t0 = Clock::now();
  std::vector<Tensor3> patches;
  for (int i = 0; i < 8; ++i) patches.push_back(smooth_patch(i, 96));

  ModelConfig mc;
  mc.plan = plan_sensing(1, 4, SensingVariant::GSM_PLUS, 16);
  mc.deep_channels = 32;
  mc.mrb_count = 2;
  Model model(mc);
  ParamStore store;
  model.register_params(store);
  model.init_params(store, 99);

  auto refined_psnr = [&] {
    double sq = 0.0;
    for (const Tensor3& p : patches) {
      const Tensor3 refined = model.forward(p, store).refined;
      for (size_t i = 0; i < p.data.size(); ++i) {
        const double d = static_cast<double>(refined.data[i]) - p.data[i];
        sq += d * d;
      }
    }
    return 10.0 * std::log10(1.0 / (sq / (8.0 * 96 * 96)));
  };

  const int phase1_steps = 1100;
  {
    AdamState adam;
    for (int step = 1; step <= phase1_steps; ++step) {
      std::vector<Tensor3> batch(patches.begin() + (step % 4) * 2,
                                 patches.begin() + (step % 4) * 2 + 2);
      Tape tape;
      Tape::NodeId loss = -1;
      for (const Tensor3& p : batch) {
        const Tape::NodeId xn = tape.constant(p);
        const Tape::NodeId y = model.sensor().build(tape, xn, store);
        const Tape::NodeId init = model.build_initial(tape, y, store);
        const Tape::NodeId term = tape.sum_squares(tape.sub(init, xn));
        loss = loss < 0 ? term : tape.add(loss, term);
      }
      store.zero_grads();
      tape.backward(loss);
      adam.step(store, 5e-3);
    }
  }
  double best_psnr = refined_psnr();
  std::fprintf(stderr,
               "  [overfit] %d initial-path steps, refined psnr %.2f dB"
               " (%.0f s)\n",
               phase1_steps, best_psnr, seconds_since(t0));

  int steps_used = phase1_steps;
  {
    AdamState adam;
    const int joint_cap = 2000 - phase1_steps;
    for (int step = 1; step <= joint_cap; ++step) {
      std::vector<Tensor3> batch(patches.begin() + (step % 4) * 2,
                                 patches.begin() + (step % 4) * 2 + 2);
      Tape tape;
      BatchLoss loss = build_batch_loss(tape, model, batch, store);
      store.zero_grads();
      tape.backward(loss.total);
      adam.step(store, 1e-3);
      steps_used = phase1_steps + step;
      if (step % 50 == 0 || step == joint_cap) {
        const double train_psnr = refined_psnr();
        best_psnr = std::max(best_psnr, train_psnr);
        std::fprintf(stderr,
                     "  [overfit] joint step %d train psnr %.2f dB (%.0f s)\n",
                     step, train_psnr, seconds_since(t0));
        if (train_psnr >= 35.0 && step >= 300) break;
        if (seconds_since(t0) > 540.0) break;  // leave headroom under 10 min
      }
    }
  }
  Outcome r;
  r.ok = best_psnr >= 35.0;
  r.detail = format_double("%.2f", best_psnr) + " dB training psnr after " +
             std::to_string(steps_used) + " steps, " +
             format_double("%.0f", seconds_since(t0)) + " s";
  return r;
}

// --- 7. Held-out quality is ordered by sampling ratio. ----------------------

Tensor3 textured_image(uint64_t seed, int size) {
  Rng rng(Rng::mix(424242, seed));
  const double tau = 6.283185307179586;
  struct Wave { int fx, fy; double amp, phase; };
  std::vector<Wave> waves;
  double total = 0.0;
  for (int j = 0; j < 4; ++j) {
    Wave w;
    w.fx = rng.uniform_int(9);
    w.fy = rng.uniform_int(9);
    if (w.fx == 0 && w.fy == 0) w.fx = 1 + j;
    w.amp = 0.04 + 0.10 * rng.uniform();
    w.phase = tau * rng.uniform();
    total += w.amp;
    waves.push_back(w);
  }
  for (Wave& w : waves) w.amp *= 0.42 / total;
  const double dc = 0.45 + 0.10 * rng.uniform();
  Tensor3 t(1, size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double val = dc;
      for (const Wave& w : waves) {
        val += w.amp * std::sin(tau * (w.fx * static_cast<double>(x) +
                                       w.fy * static_cast<double>(y)) / size +
                                w.phase);
      }
      t.at(0, y, x) = static_cast<float>(val);
    }
  }
  return t;
}

Outcome check_ratio_ordering() {
  const auto t0 = Clock::now();
  std::vector<Tensor3> train_set;
  for (int i = 0; i < 64; ++i) train_set.push_back(textured_image(i, 64));
  std::vector<Tensor3> held_out;
  for (int i = 0; i < 8; ++i) held_out.push_back(textured_image(9000 + i, 32));

  const std::vector<std::pair<int, int>> ratios = {{1, 16}, {1, 8}, {1, 4}, {1, 2}};
  std::vector<double> psnrs;
  for (auto [num, den] : ratios) {
    ModelConfig mc;
    mc.plan = plan_sensing(num, den, SensingVariant::GSM_PLUS, 8);
    mc.deep_channels = 8;
    mc.mrb_count = 1;
    Model model(mc);
    ParamStore store;
    model.register_params(store);
    model.init_params(store, 5);
    AdamState adam;
    for (int step = 0; step < 3000; ++step) {
      PatchBatch batch = sample_patches(train_set, Rng::mix(777, step), 2, 32);
      Tape tape;
      BatchLoss loss = build_batch_loss(tape, model, batch.patches, store);
      store.zero_grads();
      tape.backward(loss.total);
      adam.step(store, 1e-3);
    }
    double acc = 0.0;
    for (const Tensor3& probe : held_out) {
      Tensor3 refined = model.forward(probe, store).refined;
      for (auto& v : refined.data) v = std::clamp(v, 0.0f, 1.0f);
      acc += psnr(refined, probe);
    }
    psnrs.push_back(acc / held_out.size());
    std::fprintf(stderr, "  [ordering] %d/%d held-out psnr %.2f dB (%.0f s)\n",
                 num, den, psnrs.back(), seconds_since(t0));
  }

  int inversions = 0;
  double worst_drop = 0.0;
  for (size_t i = 0; i + 1 < psnrs.size(); ++i) {
    if (psnrs[i + 1] < psnrs[i]) {
      ++inversions;
      worst_drop = std::max(worst_drop, psnrs[i] - psnrs[i + 1]);
    }
  }
  Outcome r;
  r.ok = inversions == 0 || (inversions == 1 && worst_drop <= 0.1);
  std::string list;
  for (size_t i = 0; i < psnrs.size(); ++i) {
    list += (i ? " " : "") + format_double("%.2f", psnrs[i]);
  }
  r.detail = "held-out psnr [" + list + "] dB across {6.25, 12.5, 25, 50}%, " +
             std::to_string(inversions) + " inversion(s), " +
             format_double("%.0f", seconds_since(t0)) + " s";
  return r;
}

// --- 8. Exact schedule steps; bit-identical reruns and round trips. ---------

Outcome check_schedule_determinism() {
  const auto t0 = Clock::now();
  if (lr_at_epoch(0) != 1e-3) {
    Outcome r;
    r.detail = "lr at epoch 0 is not 1e-3";
    return r;
  }
  int prev = 0;
  for (int milestone : {60, 90, 120, 150, 180}) {
    if (lr_at_epoch(milestone) != lr_at_epoch(milestone - 1) * 0.25 ||
        lr_at_epoch(milestone - 1) != lr_at_epoch(prev)) {
      Outcome r;
      r.detail = "learning rate does not quarter exactly at epoch " +
                 std::to_string(milestone);
      return r;
    }
    prev = milestone;
  }

  const KvMap kv = parse_kv_file(std::string(MRCCS_CONFIG_DIR) + "/smoke.cfg");
  KvReader reader(kv);
  (void)reader.get_string("train_dir");  // smoke file points at real data; unused here
  TrainConfig cfg = TrainConfig::from_kv(reader);
  reader.finish();

  std::vector<Tensor3> images;
  for (int i = 0; i < 8; ++i) images.push_back(textured_image(500 + i, 128));

  const fs::path dir_a = scratch_dir("smoke_a");
  const fs::path dir_b = scratch_dir("smoke_b");
  const TrainResult run_a = train(cfg, images, dir_a.string());
  const TrainResult run_b = train(cfg, images, dir_b.string());
  const std::string bytes_a = slurp_bytes(run_a.final_checkpoint);
  const std::string bytes_b = slurp_bytes(run_b.final_checkpoint);
  if (bytes_a.empty() || bytes_a != bytes_b) {
    Outcome r;
    r.detail = "two seeded smoke runs produced different checkpoints";
    return r;
  }

  const ParamContainer trained = load_checkpoint(run_a.final_checkpoint);
  TrainConfig trained_cfg = TrainConfig::from_kv(trained.config);
  Model trained_model(trained_cfg.model);
  ParamStore trained_store = trained.params;
  const Tensor3 probe = textured_image(31337, 96);
  const Tensor3 out_trained = trained_model.forward(probe, trained_store).refined;

  const fs::path ckpt_copy = dir_a / "round_trip.bin";
  save_checkpoint(ckpt_copy.string(), trained.config, trained_store);
  ParamContainer reloaded = load_checkpoint(ckpt_copy.string());
  Model reloaded_model(TrainConfig::from_kv(reloaded.config).model);
  const Tensor3 out_reloaded = reloaded_model.forward(probe, reloaded.params).refined;
  if (out_trained.data != out_reloaded.data) {
    Outcome r;
    r.detail = "save -> load -> forward changed the output";
    return r;
  }

  Outcome r;
  r.ok = true;
  r.detail = "lr quarters exactly at {60, 90, 120, 150, 180}; smoke reruns and "
             "checkpoint round trips are bit-identical, " +
             format_double("%.0f", seconds_since(t0)) + " s";
  return r;
}

// --- 9. Shipped full-scale configs match the reference protocol. ------------

Outcome check_shipped_configs() {
  const std::vector<std::pair<std::string, std::pair<int, int>>> expected = {
      {"full_1.5625.cfg", {1, 64}}, {"full_3.125.cfg", {1, 32}},
      {"full_6.25.cfg", {1, 16}},   {"full_12.5.cfg", {1, 8}},
      {"full_25.cfg", {1, 4}},      {"full_50.cfg", {1, 2}}};
  for (const auto& [name, ratio] : expected) {
    const std::string path = std::string(MRCCS_CONFIG_DIR) + "/" + name;
    KvMap kv;
    try {
      kv = parse_kv_file(path);
    } catch (const std::exception& e) {
      Outcome r;
      r.detail = name + ": " + e.what();
      return r;
    }
    KvReader reader(kv);
    reader.get_string("train_dir");
    TrainConfig cfg = TrainConfig::from_kv(reader);
    reader.finish();
    const SensingPlan& plan = cfg.model.plan;
    const bool ratio_ok =
        static_cast<long>(plan.m) * ratio.second ==
        static_cast<long>(ratio.first) * plan.pixels_per_block();
    if (!ratio_ok || plan.variant != SensingVariant::GSM_PLUS ||
        plan.feature_width != 16 || cfg.model.deep_channels != 32 ||
        cfg.model.mrb_count != 2 || !cfg.model.measurements_reuse ||
        cfg.epochs != 200 || cfg.steps_per_epoch != 400 ||
        cfg.batch_size != 4 || cfg.patch != 96) {
      Outcome r;
      r.detail = name + " deviates from the full-scale protocol";
      return r;
    }
  }
  Outcome r;
  r.ok = true;
  r.detail = "six full-scale configs ship the 200x400 batch-4 96-crop protocol; "
             "benchmark-set quality targets run outside this suite (bench is "
             "local-only)";
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* label;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria = {
      {"sensing linearity", check_linearity},
      {"exact sampling ratios", check_ratio_exactness},
      {"dense matrix agreement", check_matrix_agreement},
      {"gradient check", check_gradients},
      {"ssim fidelity", check_ssim},
      {"fixed-batch overfit", check_overfit},
      {"quality ordered by ratio", check_ratio_ordering},
      {"schedule and determinism", check_schedule_determinism},
      {"shipped full-scale configs", check_shipped_configs},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].run();
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d (%s): %s — %s\n", number, criteria[i].label,
                outcome.ok ? "PASS" : "FAIL", outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.ok) ++failures;
  }
  return failures;
}
