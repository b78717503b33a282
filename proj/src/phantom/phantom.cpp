#include "phantom/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "core/mvst.hpp"

namespace medivista {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Ellipse {
    double cy, cx, a, b;  // a vertical semi-axis, b horizontal

    bool contains(int y, int x) const {
        const double dy = (y - cy) / a, dx = (x - cx) / b;
        return dy * dy + dx * dx <= 1.0;
    }
    double area() const { return kPi * a * b; }
};

}  // namespace

void PhantomParams::validate() const {
    if (frames < 4 || frames % 2 != 0) {
        throw std::invalid_argument("phantom: frames must be even and >= 4, got " +
                                    std::to_string(frames));
    }
    if (height < 16 || width < 16 || height % 2 != 0 || width % 2 != 0) {
        throw std::invalid_argument("phantom: size must be even and >= 16, got " +
                                    std::to_string(height) + "x" + std::to_string(width));
    }
    if (!(eject > 0.0) || !(eject < 1.0)) {
        throw std::invalid_argument("phantom: ejection parameter must be in (0,1), got " +
                                    std::to_string(eject));
    }
    if (eject_jitter < 0.0 || eject - eject_jitter <= 0.0 || eject + eject_jitter >= 1.0) {
        throw std::invalid_argument("phantom: eject_jitter keeps e outside (0,1)");
    }
    if (structures != 2 && structures != 3) {
        throw std::invalid_argument("phantom: structures must be 2 or 3");
    }
    if (spacing_mm <= 0.0) throw std::invalid_argument("phantom: spacing must be > 0");
}

PhantomRecord generate_phantom(const PhantomParams& params, uint64_t seed) {
    params.validate();
    const int t = params.frames, h = params.height, w = params.width;
    const int64_t plane = static_cast<int64_t>(h) * w;

    RngStream geom = RngStream::keyed({seed, 0x67656f6dULL});
    RngStream noise = RngStream::keyed({seed, 0x6e6f6973ULL});

    PhantomRecord rec;
    rec.spacing_mm = params.spacing_mm;
    rec.eject = params.eject + params.eject_jitter * geom.uniform(-1.0, 1.0);
    rec.ed_idx = 0;
    rec.es_idx = t / 2;
    rec.structures = {"endo", "epi"};
    if (params.structures == 3) rec.structures.push_back("la");

    const double a0 = params.endo_a_frac * h * (1.0 + 0.1 * geom.uniform(-1.0, 1.0));
    const double b0 = params.endo_b_frac * w * (1.0 + 0.1 * geom.uniform(-1.0, 1.0));
    const double wall = params.wall_frac * h * (1.0 + 0.15 * geom.uniform(-1.0, 1.0));
    const double cy = 0.5 * h + 0.03 * h * geom.uniform(-1.0, 1.0);
    const double cx = 0.44 * w + 0.03 * w * geom.uniform(-1.0, 1.0);

    // counter-phase blob standing in for the atrium
    const double la_r = 0.09 * std::min(h, w) * (1.0 + 0.1 * geom.uniform(-1.0, 1.0));
    const double la_cy = cy + 0.18 * h;
    const double la_cx = cx + b0 + wall + la_r + 0.04 * w;
    const double la_eject = 0.5 * rec.eject;

    auto scale_at = [&](int f) {
        return 1.0 - 0.5 * rec.eject * (1.0 - std::cos(2.0 * kPi * f / t));
    };
    auto la_scale_at = [&](int f) {
        return 1.0 - 0.5 * la_eject * (1.0 - std::cos(2.0 * kPi * f / t + kPi));
    };

    rec.masks.assign(static_cast<size_t>(t) * plane, 0);
    rec.true_area.assign(rec.structures.size(), std::vector<double>(static_cast<size_t>(t), 0.0));
    std::vector<double> video(static_cast<size_t>(t) * plane, 0.0);

    for (int f = 0; f < t; ++f) {
        const double s = scale_at(f);
        const Ellipse endo{cy, cx, a0 * s, b0 * s};
        const Ellipse outer{cy, cx, a0 * s + wall, b0 * s + wall};
        const Ellipse la{la_cy, la_cx, la_r * la_scale_at(f), la_r * la_scale_at(f)};

        rec.true_area[0][static_cast<size_t>(f)] = endo.area();
        rec.true_area[1][static_cast<size_t>(f)] = outer.area() - endo.area();
        if (params.structures == 3) rec.true_area[2][static_cast<size_t>(f)] = la.area();

        uint8_t* mask = rec.masks.data() + f * plane;
        double* frame = video.data() + f * plane;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double tissue = 0.50;  // surrounding field
                uint8_t cls = 0;
                if (endo.contains(y, x)) {
                    cls = 1;
                    tissue = 0.18;  // blood pool, dark
                } else if (outer.contains(y, x)) {
                    cls = 2;
                    tissue = 0.85;  // myocardium, bright
                } else if (params.structures == 3 && la.contains(y, x)) {
                    cls = 3;
                    tissue = 0.22;
                }
                mask[static_cast<int64_t>(y) * w + x] = cls;
                const double speckle = std::exp(params.speckle_sigma * noise.normal() -
                                                0.5 * params.speckle_sigma * params.speckle_sigma);
                frame[static_cast<int64_t>(y) * w + x] =
                    tissue * speckle + params.sensor_noise * noise.normal();
            }
    }

    // min-max normalization over the whole video
    const auto [mn_it, mx_it] = std::minmax_element(video.begin(), video.end());
    const double mn = *mn_it, range = *mx_it - *mn_it;
    for (double& v : video) v = (v - mn) / range;
    rec.video = Tensor::from({1, t, h, w}, std::move(video));

    rec.labels.height = h;
    rec.labels.width = w;
    for (int f : {rec.ed_idx, rec.es_idx}) {
        rec.labels.masks[f] = std::vector<uint8_t>(rec.masks.begin() + f * plane,
                                                   rec.masks.begin() + (f + 1) * plane);
    }

    // generating prolate ellipsoid: V = 4/3 pi a b^2 (two identical views)
    auto volume_ml = [&](int f) {
        const double s = scale_at(f);
        const double mm3 = 4.0 / 3.0 * kPi * (a0 * s) * (b0 * s) * (b0 * s) *
                           params.spacing_mm * params.spacing_mm * params.spacing_mm;
        return mm3 / 1000.0;
    };
    rec.edv_ml = volume_ml(rec.ed_idx);
    rec.esv_ml = volume_ml(rec.es_idx);
    rec.true_ef_pct = (rec.edv_ml - rec.esv_ml) / rec.edv_ml * 100.0;
    return rec;
}

nlohmann::json write_dataset(const std::vector<PhantomRecord>& records,
                             const std::filesystem::path& dir, SplitRatios ratios,
                             uint64_t seed) {
    if (records.empty()) throw std::invalid_argument("write_dataset: no records");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir / "videos", ec);
    fs::create_directories(dir / "masks", ec);
    if (!fs::is_directory(dir / "videos") || !fs::is_directory(dir / "masks")) {
        throw std::runtime_error("write_dataset: cannot create directories under " + dir.string());
    }

    const size_t n = records.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    RngStream rng = RngStream::keyed({seed, 0x73706c6974ULL});
    for (size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<size_t>(rng.uniform_int(static_cast<int>(i)))]);
    }
    const size_t n_train = static_cast<size_t>(std::floor(ratios.train * static_cast<double>(n)));
    const size_t n_val = static_cast<size_t>(std::floor(ratios.val * static_cast<double>(n)));
    std::vector<std::string> split(n);
    for (size_t rank = 0; rank < n; ++rank) {
        split[order[rank]] = rank < n_train ? "train" : (rank < n_train + n_val ? "val" : "test");
    }

    const PhantomRecord& first = records.front();
    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["spacing_mm"] = first.spacing_mm;
    manifest["frames"] = first.video.dim(1);
    manifest["height"] = first.video.dim(2);
    manifest["width"] = first.video.dim(3);
    nlohmann::json classes = nlohmann::json::array();
    classes.push_back("background");
    for (const std::string& s : first.structures) classes.push_back(s);
    manifest["classes"] = classes;

    nlohmann::json recs = nlohmann::json::array();
    char buf[32];
    for (size_t i = 0; i < n; ++i) {
        const PhantomRecord& r = records[i];
        std::snprintf(buf, sizeof(buf), "phantom_%04zu", i);
        const std::string id = buf;
        const std::string vfile = "videos/" + id + ".mvst";
        const std::string mfile = "masks/" + id + ".mvst";
        write_mvst_f64(dir / vfile, r.video.shape(), r.video.values());
        write_mvst_u8(dir / mfile, {r.video.dim(1), r.video.dim(2), r.video.dim(3)}, r.masks);
        nlohmann::json areas = nlohmann::json::object();
        for (size_t s = 0; s < r.structures.size(); ++s) areas[r.structures[s]] = r.true_area[s];
        recs.push_back({{"id", id},
                        {"video", vfile},
                        {"mask", mfile},
                        {"ed", r.ed_idx},
                        {"es", r.es_idx},
                        {"split", split[i]},
                        {"eject", r.eject},
                        {"edv_ml", r.edv_ml},
                        {"esv_ml", r.esv_ml},
                        {"ef_pct", r.true_ef_pct},
                        {"areas", areas}});
    }
    manifest["records"] = recs;

    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("write_dataset: cannot write manifest in " + dir.string());
    out << manifest.dump(2) << "\n";
    return manifest;
}

}  // namespace medivista
