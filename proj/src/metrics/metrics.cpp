#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace medivista {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_same_size(size_t a, size_t b, const char* who) {
    if (a != b) {
        throw std::invalid_argument(std::string(who) + ": size mismatch, " + std::to_string(a) +
                                    " vs " + std::to_string(b));
    }
}

double directed_mean_min(const std::vector<BoundaryPoint>& from,
                         const std::vector<BoundaryPoint>& to) {
    double total = 0.0;
    for (const BoundaryPoint& p : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const BoundaryPoint& q : to) {
            const double dy = p.y - q.y, dx = p.x - q.x;
            best = std::min(best, dy * dy + dx * dx);
        }
        total += std::sqrt(best);
    }
    return total / static_cast<double>(from.size());
}

double directed_max_min(const std::vector<BoundaryPoint>& from,
                        const std::vector<BoundaryPoint>& to) {
    double worst = 0.0;
    for (const BoundaryPoint& p : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const BoundaryPoint& q : to) {
            const double dy = p.y - q.y, dx = p.x - q.x;
            best = std::min(best, dy * dy + dx * dx);
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

void require_boundaries(const std::vector<BoundaryPoint>& a, const std::vector<BoundaryPoint>& b,
                        const char* who) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument(std::string(who) + ": no boundary");
    }
}

}  // namespace

std::vector<BoundaryPoint> mask_boundary(const std::vector<uint8_t>& mask, int h, int w,
                                         uint8_t cls) {
    require_same_size(mask.size(), static_cast<size_t>(h) * w, "mask_boundary");
    std::vector<BoundaryPoint> out;
    auto inside = [&](int y, int x) {
        return y >= 0 && y < h && x >= 0 && x < w && mask[static_cast<size_t>(y) * w + x] == cls;
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (mask[static_cast<size_t>(y) * w + x] != cls) continue;
            if (!inside(y - 1, x) || !inside(y + 1, x) || !inside(y, x - 1) || !inside(y, x + 1)) {
                out.push_back({y, x});
            }
        }
    return out;
}

double dice(const std::vector<uint8_t>& pred, const std::vector<uint8_t>& gt, uint8_t cls) {
    require_same_size(pred.size(), gt.size(), "dice");
    int64_t np = 0, ng = 0, inter = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] == cls, g = gt[i] == cls;
        np += p;
        ng += g;
        inter += p && g;
    }
    if (np + ng == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(np + ng);
}

double hausdorff(const std::vector<BoundaryPoint>& pred, const std::vector<BoundaryPoint>& gt,
                 double spacing_mm) {
    require_boundaries(pred, gt, "hausdorff");
    return spacing_mm * std::max(directed_max_min(pred, gt), directed_max_min(gt, pred));
}

double assd(const std::vector<BoundaryPoint>& pred, const std::vector<BoundaryPoint>& gt,
            double spacing_mm) {
    require_boundaries(pred, gt, "assd");
    return spacing_mm * 0.5 * (directed_mean_min(pred, gt) + directed_mean_min(gt, pred));
}

double temporal_consistency_curve(const std::vector<double>& areas, int resample_points) {
    const int t = static_cast<int>(areas.size());
    if (t < 3) {
        throw std::invalid_argument("temporal_consistency: need at least 3 frames, got " +
                                    std::to_string(t));
    }
    if (resample_points < 3) throw std::invalid_argument("temporal_consistency: resample < 3");

    // time axis normalized to [0,1], curve linearly resampled
    std::vector<double> s(static_cast<size_t>(resample_points));
    for (int i = 0; i < resample_points; ++i) {
        const double pos = static_cast<double>(i) / (resample_points - 1) * (t - 1);
        const int lo = static_cast<int>(pos);
        const int hi = std::min(lo + 1, t - 1);
        const double f = pos - lo;
        s[static_cast<size_t>(i)] = (1.0 - f) * areas[static_cast<size_t>(lo)] +
                                    f * areas[static_cast<size_t>(hi)];
    }
    const double mx = *std::max_element(s.begin(), s.end());
    if (!(mx > 0.0)) {
        throw std::invalid_argument("temporal_consistency: class absent in all frames");
    }
    for (double& v : s) v /= mx;

    double total = 0.0;
    for (int i = 1; i + 1 < resample_points; ++i) {
        total += std::abs(s[static_cast<size_t>(i + 1)] + s[static_cast<size_t>(i - 1)] -
                          2.0 * s[static_cast<size_t>(i)]);
    }
    return total / static_cast<double>(resample_points - 2);
}

double temporal_consistency(const MaskSequence& seq, uint8_t cls) {
    require_same_size(seq.masks.size(),
                      static_cast<size_t>(seq.frames) * seq.height * seq.width,
                      "temporal_consistency");
    const int64_t plane = static_cast<int64_t>(seq.height) * seq.width;
    std::vector<double> areas(static_cast<size_t>(seq.frames), 0.0);
    for (int f = 0; f < seq.frames; ++f) {
        int64_t count = 0;
        const uint8_t* m = seq.masks.data() + f * plane;
        for (int64_t i = 0; i < plane; ++i) count += m[i] == cls;
        areas[static_cast<size_t>(f)] = static_cast<double>(count);
    }
    return temporal_consistency_curve(areas);
}

double simpson_biplane(const std::vector<double>& diam_a2ch_mm,
                       const std::vector<double>& diam_a4ch_mm, double long_axis_mm, int n) {
    if (n < 1) throw std::invalid_argument("simpson_biplane: need n >= 1 disks");
    if (static_cast<int>(diam_a2ch_mm.size()) != n || static_cast<int>(diam_a4ch_mm.size()) != n) {
        throw std::invalid_argument("simpson_biplane: diameter lists must both have n=" +
                                    std::to_string(n) + " entries, got " +
                                    std::to_string(diam_a2ch_mm.size()) + " and " +
                                    std::to_string(diam_a4ch_mm.size()));
    }
    const double slab = long_axis_mm / static_cast<double>(n);
    double mm3 = 0.0;
    for (int i = 0; i < n; ++i) {
        mm3 += kPi / 4.0 * diam_a2ch_mm[static_cast<size_t>(i)] *
               diam_a4ch_mm[static_cast<size_t>(i)] * slab;
    }
    return mm3 / 1000.0;  // mm^3 -> ml
}

double ejection_fraction(const VolumePair& v) {
    if (!(v.edv_ml > 0.0)) {
        throw std::invalid_argument("ejection_fraction: EDV must be > 0, got " +
                                    std::to_string(v.edv_ml));
    }
    return (v.edv_ml - v.esv_ml) / v.edv_ml * 100.0;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    require_same_size(x.size(), y.size(), "pearson");
    const size_t n = x.size();
    if (n < 2) throw std::invalid_argument("pearson: need at least 2 samples");
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        throw std::invalid_argument("pearson: undefined correlation for constant input");
    }
    return sxy / std::sqrt(sxx * syy);
}

DiskDiameters disk_diameters(const std::vector<uint8_t>& mask, int h, int w, uint8_t cls, int n,
                             double spacing_mm) {
    require_same_size(mask.size(), static_cast<size_t>(h) * w, "disk_diameters");
    if (n < 1) throw std::invalid_argument("disk_diameters: need n >= 1");
    int y_min = h, y_max = -1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mask[static_cast<size_t>(y) * w + x] == cls) {
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
    if (y_max < 0) throw std::invalid_argument("disk_diameters: class absent from mask");

    const int extent = y_max - y_min + 1;
    DiskDiameters out;
    out.long_axis_mm = extent * spacing_mm;
    out.diam_mm.assign(static_cast<size_t>(n), 0.0);
    std::vector<int> rows_in_band(static_cast<size_t>(n), 0);
    std::vector<int64_t> width_sum(static_cast<size_t>(n), 0);
    for (int y = y_min; y <= y_max; ++y) {
        int band = static_cast<int>((static_cast<int64_t>(y - y_min) * n) / extent);
        band = std::min(band, n - 1);
        int64_t row_width = 0;
        for (int x = 0; x < w; ++x) row_width += mask[static_cast<size_t>(y) * w + x] == cls;
        width_sum[static_cast<size_t>(band)] += row_width;
        rows_in_band[static_cast<size_t>(band)] += 1;
    }
    for (int i = 0; i < n; ++i) {
        if (rows_in_band[static_cast<size_t>(i)] > 0) {
            out.diam_mm[static_cast<size_t>(i)] = spacing_mm *
                                                  static_cast<double>(width_sum[static_cast<size_t>(i)]) /
                                                  rows_in_band[static_cast<size_t>(i)];
        }
    }
    return out;
}

double volume_from_mask_ml(const std::vector<uint8_t>& mask, int h, int w, uint8_t cls,
                           double spacing_mm, int disks) {
    DiskDiameters d = disk_diameters(mask, h, w, cls, disks, spacing_mm);
    return simpson_biplane(d.diam_mm, d.diam_mm, d.long_axis_mm, disks);
}

}  // namespace medivista
