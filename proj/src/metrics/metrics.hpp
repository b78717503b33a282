#pragma once

#include <cstdint>
#include <vector>

namespace medivista {

struct BoundaryPoint {
    int y = 0, x = 0;
};

// 4-connectivity inner boundary: foreground pixels of `cls` with at least one
// 4-neighbor outside the class (image borders count as background).
std::vector<BoundaryPoint> mask_boundary(const std::vector<uint8_t>& mask, int h, int w,
                                         uint8_t cls);

// 2|P and G| / (|P| + |G|); both empty is defined as 1.0.
double dice(const std::vector<uint8_t>& pred, const std::vector<uint8_t>& gt, uint8_t cls);

// Directed max-min distances, both ways, scaled by the pixel spacing (mm).
double hausdorff(const std::vector<BoundaryPoint>& pred, const std::vector<BoundaryPoint>& gt,
                 double spacing_mm);

// Average symmetric surface distance in mm.
double assd(const std::vector<BoundaryPoint>& pred, const std::vector<BoundaryPoint>& gt,
            double spacing_mm);

struct MaskSequence {
    std::vector<uint8_t> masks;  // [T,H,W] class ids
    int frames = 0, height = 0, width = 0;
    double spacing_mm = 1.0;
};

// Temporal consistency L of the per-frame area curve of one class: the curve
// is linearly resampled to 32 points over a [0,1] time axis, areas divided by
// their maximum, and L is the mean absolute second difference
// |s[t+1] + s[t-1] - 2 s[t]| over interior points.
double temporal_consistency(const MaskSequence& seq, uint8_t cls);
// Same pipeline on a precomputed area curve (resample count exposed).
double temporal_consistency_curve(const std::vector<double>& areas, int resample_points = 32);

// Method of disks: V = pi/4 * sum a_i b_i (L/n), converted from mm^3 to ml.
double simpson_biplane(const std::vector<double>& diam_a2ch_mm,
                       const std::vector<double>& diam_a4ch_mm, double long_axis_mm, int n);

struct VolumePair {
    double edv_ml = 0.0;
    double esv_ml = 0.0;
};

// (EDV - ESV) / EDV * 100
double ejection_fraction(const VolumePair& v);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Disk diameters along the vertical long axis of one class in a [H,W] mask,
// for the Simpson volume pipeline; errors when the class is absent.
struct DiskDiameters {
    std::vector<double> diam_mm;
    double long_axis_mm = 0.0;
};
DiskDiameters disk_diameters(const std::vector<uint8_t>& mask, int h, int w, uint8_t cls, int n,
                             double spacing_mm);
double volume_from_mask_ml(const std::vector<uint8_t>& mask, int h, int w, uint8_t cls,
                           double spacing_mm, int disks = 20);

}  // namespace medivista
