#include "train/trainer.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "core/ops.hpp"
#include "metrics/metrics.hpp"
#include "train/adamw.hpp"
#include "train/loss.hpp"

namespace medivista {

namespace {

struct LoadedRecord {
    Tensor video;
    SparseLabels labels;
    int ed, es;
};

std::vector<LoadedRecord> preload(const Dataset& data, const std::vector<size_t>& idx) {
    std::vector<LoadedRecord> out;
    out.reserve(idx.size());
    for (size_t i : idx) {
        out.push_back({data.load_video(i), data.sparse_labels(i), data.records[i].ed,
                       data.records[i].es});
    }
    return out;
}

double validation_dice(const MediVistaModel& model, const std::vector<LoadedRecord>& val,
                       uint8_t cls) {
    if (val.empty()) return 0.0;
    const int t = model.config().frames;
    const int64_t plane = static_cast<int64_t>(model.config().height) * model.config().width;
    double total = 0.0;
    int frames = 0;
    for (const LoadedRecord& rec : val) {
        Clip clip = sample_clip(rec.video, rec.labels, rec.ed, rec.es, t);
        std::vector<uint8_t> pred = predict_masks(model, clip.video);
        for (const auto& [f, gt] : clip.labels.masks) {
            std::vector<uint8_t> pf(pred.begin() + f * plane, pred.begin() + (f + 1) * plane);
            total += dice(pf, gt, cls);
            ++frames;
        }
    }
    return frames ? total / frames : 0.0;
}

}  // namespace

std::vector<uint8_t> predict_masks(const MediVistaModel& model, const Tensor& video) {
    NoGradGuard ng;
    Tensor batched = reshape(video, {1, video.dim(0), video.dim(1), video.dim(2), video.dim(3)});
    Tensor logits = model.forward(batched);  // [1,C,T,H,W]
    const int classes = logits.dim(1), t = logits.dim(2);
    const int64_t plane = static_cast<int64_t>(logits.dim(3)) * logits.dim(4);
    std::vector<uint8_t> out(static_cast<size_t>(t) * plane);
    const double* p = logits.data();
    for (int f = 0; f < t; ++f)
        for (int64_t i = 0; i < plane; ++i) {
            int best = 0;
            double best_v = p[(static_cast<int64_t>(0) * t + f) * plane + i];
            for (int c = 1; c < classes; ++c) {
                const double v = p[(static_cast<int64_t>(c) * t + f) * plane + i];
                if (v > best_v) {
                    best_v = v;
                    best = c;
                }
            }
            out[static_cast<size_t>(f * plane + i)] = static_cast<uint8_t>(best);
        }
    return out;
}

void write_metrics_csv(const std::filesystem::path& file, const std::vector<EpochLog>& log) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("trainer: cannot write " + file.string());
    out << "epoch,train_loss,val_dice,wall_seconds\n";
    char buf[160];
    for (const EpochLog& e : log) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.3f\n", e.epoch, e.train_loss, e.val_dice,
                      e.wall_seconds);
        out << buf;
    }
}

TrainResult train_loop(const Dataset& data, MediVistaModel& model, const TrainConfig& cfg,
                       const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    const auto train_idx = data.split_indices("train");
    const auto val_idx = data.split_indices("val");
    if (train_idx.empty()) throw std::invalid_argument("train_loop: dataset has no train split");

    std::vector<LoadedRecord> train_set = preload(data, train_idx);
    std::vector<LoadedRecord> val_set = preload(data, val_idx);

    TrainResult result;
    result.checkpoint_dir = out_dir / "checkpoint";
    const int clip_len = std::min(cfg.clip_len, data.frames);

    auto save_best = [&]() {
        save_checkpoint(result.checkpoint_dir, model.params(), model.config());
    };

    int epoch = 0;
    for (const auto& [phase, epochs] :
         {std::pair<MediVistaModel::Phase, int>{MediVistaModel::Phase::pretrain,
                                                cfg.pretrain_epochs},
          std::pair<MediVistaModel::Phase, int>{MediVistaModel::Phase::adapt, cfg.epochs}}) {
        if (epochs <= 0) continue;
        model.set_phase(phase);
        AdamW opt(model.params().trainable(),
                  {cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.weight_decay});
        const char* phase_name = phase == MediVistaModel::Phase::pretrain ? "pretrain" : "adapt";

        for (int pe = 0; pe < epochs; ++pe, ++epoch) {
            const auto t0 = std::chrono::steady_clock::now();
            // seeded order, reproducible per epoch
            std::vector<size_t> order(train_set.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = i;
            RngStream shuffle = RngStream::keyed({cfg.seed, static_cast<uint64_t>(epoch), 0x73687566ULL});
            for (size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1],
                          order[static_cast<size_t>(shuffle.uniform_int(static_cast<int>(i)))]);
            }

            double epoch_loss = 0.0;
            int64_t samples = 0;
            try {
                for (size_t at = 0; at < order.size(); at += static_cast<size_t>(cfg.batch_size)) {
                    const size_t batch_end =
                        std::min(order.size(), at + static_cast<size_t>(cfg.batch_size));
                    const double inv_batch = 1.0 / static_cast<double>(batch_end - at);
                    for (size_t bi = at; bi < batch_end; ++bi) {
                        const LoadedRecord& rec = train_set[order[bi]];
                        Clip clip = sample_clip(rec.video, rec.labels, rec.ed, rec.es, clip_len);
                        std::vector<double> buf = clip.video.values();
                        SparseLabels labels = clip.labels;
                        RngStream aug = RngStream::keyed({cfg.seed, static_cast<uint64_t>(epoch),
                                                          static_cast<uint64_t>(order[bi]),
                                                          0x617567ULL});
                        augment_clip(buf, clip_len, data.height, data.width, labels, cfg.augment,
                                     aug);
                        Tensor video = Tensor::from({1, 1, clip_len, data.height, data.width},
                                                    std::move(buf));
                        Tensor logits = model.forward(video);
                        Tensor logits_one = reshape(
                            logits, {model.config().num_classes, clip_len, data.height, data.width});
                        Tensor loss = scale(masked_loss(logits_one, labels), inv_batch);
                        epoch_loss += loss[0] / inv_batch;
                        ++samples;
                        backward(loss);
                    }
                    opt.step();
                    opt.zero_grad();
                }
            } catch (const std::runtime_error& e) {
                // non-finite activations surface here; keep the last good checkpoint
                result.aborted = true;
                result.abort_reason = e.what();
                std::cerr << "train_loop: aborted at epoch " << epoch << ": " << e.what() << "\n";
                break;
            }

            const double train_loss = samples ? epoch_loss / static_cast<double>(samples) : 0.0;
            const double val = validation_dice(model, val_set, 1);
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                    .count();
            result.log.push_back({epoch, phase_name, train_loss, val, wall});
            if (val >= result.best_val_dice) {
                result.best_val_dice = val;
                result.best_epoch = epoch;
                save_best();
            }
        }
        if (result.aborted) break;
    }

    if (result.log.empty() && !result.aborted) {
        // zero-epoch runs still produce a usable checkpoint
        save_best();
    }
    write_metrics_csv(out_dir / "metrics.csv", result.log);
    return result;
}

}  // namespace medivista
