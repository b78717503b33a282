#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/tensor.hpp"
#include "model/config.hpp"

namespace medivista {

// Per-frame class-id masks for the handful of annotated frames in a clip.
struct SparseLabels {
    int height = 0, width = 0;
    std::map<int, std::vector<uint8_t>> masks;  // frame index -> H*W class ids

    std::vector<int> labeled_frames() const;
    void validate(int frames) const;
};

struct DatasetRecord {
    std::string id;
    std::string video_file, mask_file;
    int ed = 0, es = 0;
    std::string split;  // train | val | test
    double eject = 0.0;
    double edv_ml = 0.0, esv_ml = 0.0, ef_pct = 0.0;
    std::map<std::string, std::vector<double>> areas;  // per-structure analytic area curves
};

// Directory layout: manifest.json + videos/*.mvst + masks/*.mvst.
struct Dataset {
    std::filesystem::path dir;
    double spacing_mm = 1.0;
    int frames = 0, height = 0, width = 0;
    std::vector<std::string> classes;  // index = class id, [0] = "background"
    std::vector<DatasetRecord> records;

    static Dataset load(const std::filesystem::path& dir);
    std::vector<size_t> split_indices(const std::string& split) const;
    Tensor load_video(size_t i) const;               // [1,T,H,W]
    std::vector<uint8_t> load_mask(size_t i) const;  // [T,H,W]
    SparseLabels sparse_labels(size_t i) const;      // ED/ES frames only
};

struct Clip {
    Tensor video;  // [1,clip_len,H,W]
    SparseLabels labels;
    std::vector<int> source_frames;
};

// Frames from ED onward; when the window is shorter than clip_len the
// sampling continues past ES and wraps cyclically. Every clip position whose
// source frame carries a mask is labeled.
Clip sample_clip(const Tensor& video, const SparseLabels& labels, int ed_idx, int es_idx,
                 int clip_len);

// In-place flip / zoom / gamma on a raw clip buffer; masks track the
// geometric part pixel-exactly.
void augment_clip(std::vector<double>& video, int t, int h, int w, SparseLabels& labels,
                  const AugmentConfig& cfg, RngStream& rng);

}  // namespace medivista
