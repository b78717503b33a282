#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "model/model.hpp"
#include "train/data.hpp"

namespace medivista {

struct EpochLog {
    int epoch = 0;
    std::string phase;  // pretrain | adapt
    double train_loss = 0.0;
    double val_dice = 0.0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    std::vector<EpochLog> log;
    double best_val_dice = -1.0;
    int best_epoch = -1;
    bool aborted = false;
    std::string abort_reason;
    std::filesystem::path checkpoint_dir;
};

// Two-phase recipe: cfg.pretrain_epochs of full-network training, then the
// backbone is frozen and cfg.epochs of adapter/FacT training follow. The
// best-validation-Dice checkpoint is kept; a non-finite loss aborts the run
// with the last good checkpoint in place.
TrainResult train_loop(const Dataset& data, MediVistaModel& model, const TrainConfig& cfg,
                       const std::filesystem::path& out_dir);

// Arg-max class ids [T,H,W] for one video, forward pass without the tape.
std::vector<uint8_t> predict_masks(const MediVistaModel& model, const Tensor& video);

void write_metrics_csv(const std::filesystem::path& file, const std::vector<EpochLog>& log);

}  // namespace medivista
