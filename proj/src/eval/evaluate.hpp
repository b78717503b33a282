#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "model/model.hpp"
#include "train/data.hpp"

namespace medivista {

struct StructureMetrics {
    std::string structure;
    double dice = 0.0;
    std::optional<double> dh_mm, da_mm;  // absent when a boundary is missing
    std::optional<double> l_pred, l_gt;  // absent when the class vanishes
};

struct VolumeEstimate {
    double edv_ml = 0.0, esv_ml = 0.0, ef_pct = 0.0;
};

struct VideoEval {
    std::string id;
    std::vector<StructureMetrics> structures;
    std::optional<VolumeEstimate> pred_volumes;  // endo, Simpson method of disks
    double true_edv_ml = 0.0, true_esv_ml = 0.0, true_ef_pct = 0.0;
};

struct PearsonBlock {
    double edv = 0.0, esv = 0.0, ef = 0.0;
    int samples = 0;
};

struct EvalReport {
    std::vector<VideoEval> videos;
    std::vector<std::string> structures;
    std::optional<PearsonBlock> pearson_block;
};

// Runs the model over one split and scores every (video, structure) pair.
EvalReport evaluate_split(const MediVistaModel& model, const Dataset& data,
                          const std::string& split);

// Same scoring against an arbitrary mask source (record index -> [T,H,W]
// class ids); lets ground truth be scored against itself.
using MaskPredictor = std::function<std::vector<uint8_t>(size_t record_index)>;
EvalReport evaluate_predictions(const Dataset& data, const std::string& split,
                                const MaskPredictor& predictor);

// CSV report: per-(video, structure) rows, a mean +/- std summary block,
// per-video volume rows with the EF < 45% pathological-risk flag, and the
// Pearson block when ground-truth volumes are available.
void write_report_csv(const std::filesystem::path& file, const EvalReport& report);

}  // namespace medivista
