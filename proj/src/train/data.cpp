#include "train/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "core/mvst.hpp"

namespace medivista {

std::vector<int> SparseLabels::labeled_frames() const {
    std::vector<int> out;
    out.reserve(masks.size());
    for (const auto& [f, m] : masks) out.push_back(f);
    return out;
}

void SparseLabels::validate(int frames) const {
    if (masks.empty()) throw std::invalid_argument("sparse labels: no labeled frames");
    for (const auto& [f, m] : masks) {
        if (f < 0 || f >= frames) {
            throw std::invalid_argument("sparse labels: frame " + std::to_string(f) +
                                        " outside clip of " + std::to_string(frames));
        }
        if (static_cast<int64_t>(m.size()) != static_cast<int64_t>(height) * width) {
            throw std::invalid_argument("sparse labels: mask size mismatch at frame " +
                                        std::to_string(f));
        }
    }
}

Dataset Dataset::load(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw std::runtime_error("dataset: no manifest.json in " + dir.string());
    nlohmann::json j = nlohmann::json::parse(in);
    Dataset d;
    d.dir = dir;
    d.spacing_mm = j.at("spacing_mm").get<double>();
    d.frames = j.at("frames").get<int>();
    d.height = j.at("height").get<int>();
    d.width = j.at("width").get<int>();
    d.classes = j.at("classes").get<std::vector<std::string>>();
    for (const auto& r : j.at("records")) {
        DatasetRecord rec;
        rec.id = r.at("id").get<std::string>();
        rec.video_file = r.at("video").get<std::string>();
        rec.mask_file = r.at("mask").get<std::string>();
        rec.ed = r.at("ed").get<int>();
        rec.es = r.at("es").get<int>();
        rec.split = r.at("split").get<std::string>();
        rec.eject = r.value("eject", 0.0);
        rec.edv_ml = r.value("edv_ml", 0.0);
        rec.esv_ml = r.value("esv_ml", 0.0);
        rec.ef_pct = r.value("ef_pct", 0.0);
        if (r.contains("areas")) {
            for (auto it = r.at("areas").begin(); it != r.at("areas").end(); ++it) {
                rec.areas[it.key()] = it.value().get<std::vector<double>>();
            }
        }
        d.records.push_back(std::move(rec));
    }
    return d;
}

std::vector<size_t> Dataset::split_indices(const std::string& split) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < records.size(); ++i)
        if (records[i].split == split) out.push_back(i);
    return out;
}

Tensor Dataset::load_video(size_t i) const {
    Tensor t = read_mvst_tensor(dir / records.at(i).video_file);
    if (t.ndim() != 4) throw std::runtime_error("dataset: video rank != 4 for " + records.at(i).id);
    return t;
}

std::vector<uint8_t> Dataset::load_mask(size_t i) const {
    MvstFile f = read_mvst(dir / records.at(i).mask_file);
    if (f.dtype != MvstDtype::u8 || f.shape.size() != 3) {
        throw std::runtime_error("dataset: mask must be u8 [T,H,W] for " + records.at(i).id);
    }
    return std::move(f.u8);
}

SparseLabels Dataset::sparse_labels(size_t i) const {
    const DatasetRecord& rec = records.at(i);
    std::vector<uint8_t> dense = load_mask(i);
    const int64_t plane = static_cast<int64_t>(height) * width;
    SparseLabels labels;
    labels.height = height;
    labels.width = width;
    for (int f : {rec.ed, rec.es}) {
        labels.masks[f] = std::vector<uint8_t>(dense.begin() + f * plane,
                                               dense.begin() + (f + 1) * plane);
    }
    return labels;
}

Clip sample_clip(const Tensor& video, const SparseLabels& labels, int ed_idx, int es_idx,
                 int clip_len) {
    if (video.ndim() != 4) throw std::invalid_argument("sample_clip: video must be [C,T,H,W]");
    const int c = video.dim(0), tv = video.dim(1), h = video.dim(2), w = video.dim(3);
    if (tv < 2) throw std::invalid_argument("sample_clip: video has fewer than 2 frames");
    if (ed_idx < 0 || es_idx >= tv || ed_idx >= es_idx) {
        throw std::invalid_argument("sample_clip: need ed < es < frames, got ed=" +
                                    std::to_string(ed_idx) + " es=" + std::to_string(es_idx) +
                                    " frames=" + std::to_string(tv));
    }
    if (clip_len < 2) throw std::invalid_argument("sample_clip: clip length must be >= 2");

    Clip clip;
    clip.source_frames.reserve(static_cast<size_t>(clip_len));
    for (int i = 0; i < clip_len; ++i) clip.source_frames.push_back((ed_idx + i) % tv);

    const int64_t plane = static_cast<int64_t>(h) * w;
    std::vector<double> data(static_cast<size_t>(c) * clip_len * plane);
    const double* src = video.data();
    for (int ch = 0; ch < c; ++ch)
        for (int i = 0; i < clip_len; ++i) {
            const int f = clip.source_frames[static_cast<size_t>(i)];
            std::copy_n(src + (static_cast<int64_t>(ch) * tv + f) * plane, plane,
                        data.data() + (static_cast<int64_t>(ch) * clip_len + i) * plane);
        }
    clip.video = Tensor::from({c, clip_len, h, w}, std::move(data));

    clip.labels.height = labels.height;
    clip.labels.width = labels.width;
    for (int i = 0; i < clip_len; ++i) {
        auto it = labels.masks.find(clip.source_frames[static_cast<size_t>(i)]);
        if (it != labels.masks.end()) clip.labels.masks[i] = it->second;
    }
    clip.labels.validate(clip_len);
    return clip;
}

namespace {

// zoom about the image center; bilinear for intensities, nearest for ids
void zoom_frame(const double* src, double* dst, int h, int w, double s) {
    const double cy = 0.5 * (h - 1), cx = 0.5 * (w - 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double sy = std::clamp(cy + (y - cy) / s, 0.0, static_cast<double>(h - 1));
            const double sx = std::clamp(cx + (x - cx) / s, 0.0, static_cast<double>(w - 1));
            const int y0 = static_cast<int>(sy), x0 = static_cast<int>(sx);
            const int y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
            const double fy = sy - y0, fx = sx - x0;
            dst[static_cast<int64_t>(y) * w + x] =
                (1 - fy) * ((1 - fx) * src[static_cast<int64_t>(y0) * w + x0] +
                            fx * src[static_cast<int64_t>(y0) * w + x1]) +
                fy * ((1 - fx) * src[static_cast<int64_t>(y1) * w + x0] +
                      fx * src[static_cast<int64_t>(y1) * w + x1]);
        }
}

void zoom_mask(const uint8_t* src, uint8_t* dst, int h, int w, double s) {
    const double cy = 0.5 * (h - 1), cx = 0.5 * (w - 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double sy = std::clamp(cy + (y - cy) / s, 0.0, static_cast<double>(h - 1));
            const double sx = std::clamp(cx + (x - cx) / s, 0.0, static_cast<double>(w - 1));
            dst[static_cast<int64_t>(y) * w + x] =
                src[static_cast<int64_t>(std::lround(sy)) * w + std::lround(sx)];
        }
}

}  // namespace

void augment_clip(std::vector<double>& video, int t, int h, int w, SparseLabels& labels,
                  const AugmentConfig& cfg, RngStream& rng) {
    const int64_t plane = static_cast<int64_t>(h) * w;
    const bool do_flip = cfg.flip && rng.uniform() < 0.5;
    const double zoom = cfg.scale ? rng.uniform(0.9, 1.1) : 1.0;
    const double gamma = cfg.contrast ? rng.uniform(0.8, 1.25) : 1.0;

    if (do_flip) {
        for (int f = 0; f < t; ++f) {
            double* frame = video.data() + f * plane;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w / 2; ++x)
                    std::swap(frame[static_cast<int64_t>(y) * w + x],
                              frame[static_cast<int64_t>(y) * w + (w - 1 - x)]);
        }
        for (auto& [f, m] : labels.masks) {
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w / 2; ++x)
                    std::swap(m[static_cast<size_t>(y) * w + x],
                              m[static_cast<size_t>(y) * w + (w - 1 - x)]);
        }
    }
    if (cfg.scale && zoom != 1.0) {
        std::vector<double> tmp(static_cast<size_t>(plane));
        for (int f = 0; f < t; ++f) {
            double* frame = video.data() + f * plane;
            zoom_frame(frame, tmp.data(), h, w, zoom);
            std::copy(tmp.begin(), tmp.end(), frame);
        }
        std::vector<uint8_t> mtmp(static_cast<size_t>(plane));
        for (auto& [f, m] : labels.masks) {
            zoom_mask(m.data(), mtmp.data(), h, w, zoom);
            m = mtmp;
        }
    }
    if (cfg.contrast && gamma != 1.0) {
        for (double& v : video) v = std::pow(std::max(v, 0.0), gamma);
    }
}

}  // namespace medivista
