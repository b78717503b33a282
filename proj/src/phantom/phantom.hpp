#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "core/tensor.hpp"
#include "train/data.hpp"

namespace medivista {

// Beating two-structure chamber phantom: an inner ellipse ("endo", the blood
// pool) whose semi-axes follow s(t) = 1 - (e/2)(1 - cos 2*pi*t/T), wrapped in
// a constant-thickness bright ring ("epi"), optionally with a counter-phase
// blob ("la"). Intensities carry multiplicative log-normal speckle plus
// additive sensor noise and are min-max normalized per video.
struct PhantomParams {
    int frames = 8;  // even, >= 4; ED at 0, ES at T/2
    int height = 64, width = 64;
    double eject = 0.4;         // mean ejection parameter e in (0,1)
    double eject_jitter = 0.1;  // per-record uniform spread around eject
    double spacing_mm = 1.0;
    double speckle_sigma = 0.3;
    double sensor_noise = 0.02;
    int structures = 2;  // 2: endo+epi, 3: adds "la"
    double endo_a_frac = 0.30;  // vertical semi-axis as a fraction of height
    double endo_b_frac = 0.17;  // horizontal semi-axis as a fraction of width
    double wall_frac = 0.09;    // ring thickness as a fraction of height

    void validate() const;
};

struct PhantomRecord {
    Tensor video;                // [1,T,H,W] in [0,1]
    std::vector<uint8_t> masks;  // dense class ids [T,H,W]
    SparseLabels labels;         // ED and ES frames only
    int ed_idx = 0, es_idx = 0;
    std::vector<std::string> structures;            // class names, id = index + 1
    std::vector<std::vector<double>> true_area;     // [structure][T] analytic pixel areas
    double edv_ml = 0.0, esv_ml = 0.0;              // generating-ellipsoid volumes
    double true_ef_pct = 0.0;
    double eject = 0.0;  // realized per-record e
    double spacing_mm = 1.0;
};

PhantomRecord generate_phantom(const PhantomParams& params, uint64_t seed);

struct SplitRatios {
    double train = 0.64, val = 0.16, test = 0.20;
};

// Writes manifest.json + videos/*.mvst (f64) + masks/*.mvst (u8) and returns
// the manifest. Split tags come from a seeded shuffle with floor(ratio * n)
// train/val counts and the remainder tagged test.
nlohmann::json write_dataset(const std::vector<PhantomRecord>& records,
                             const std::filesystem::path& dir, SplitRatios ratios = {},
                             uint64_t seed = 0);

}  // namespace medivista
