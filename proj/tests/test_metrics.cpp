#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/rng.hpp"
#include "metrics/metrics.hpp"

using namespace medivista;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<BoundaryPoint> random_points(uint64_t seed, int count, int extent) {
    RngStream rng = RngStream::keyed({seed, 0x707473ULL});
    std::vector<BoundaryPoint> pts;
    pts.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) pts.push_back({rng.uniform_int(extent), rng.uniform_int(extent)});
    return pts;
}

// all-pairs reference for both distance metrics
double oracle_hausdorff(const std::vector<BoundaryPoint>& a, const std::vector<BoundaryPoint>& b) {
    auto directed = [](const std::vector<BoundaryPoint>& from, const std::vector<BoundaryPoint>& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double best = 1e300;
            for (const auto& q : to)
                best = std::min(best, std::hypot(p.y - q.y, p.x - q.x));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

double oracle_assd(const std::vector<BoundaryPoint>& a, const std::vector<BoundaryPoint>& b) {
    auto directed = [](const std::vector<BoundaryPoint>& from, const std::vector<BoundaryPoint>& to) {
        double sum = 0.0;
        for (const auto& p : from) {
            double best = 1e300;
            for (const auto& q : to)
                best = std::min(best, std::hypot(p.y - q.y, p.x - q.x));
            sum += best;
        }
        return sum / static_cast<double>(from.size());
    };
    return 0.5 * (directed(a, b) + directed(b, a));
}

// literal pipeline: resample to 32 points over [0,1], divide by max, mean
// absolute second difference over interior points
double oracle_temporal_consistency(const std::vector<double>& areas) {
    const int t = static_cast<int>(areas.size());
    const int r = 32;
    std::vector<double> s(r);
    for (int i = 0; i < r; ++i) {
        const double u = static_cast<double>(i) / (r - 1);
        const double pos = u * (t - 1);
        const int lo = static_cast<int>(std::floor(pos));
        const int hi = std::min(lo + 1, t - 1);
        s[static_cast<size_t>(i)] = areas[static_cast<size_t>(lo)] +
                                    (pos - lo) * (areas[static_cast<size_t>(hi)] -
                                                  areas[static_cast<size_t>(lo)]);
    }
    double mx = 0.0;
    for (double v : s) mx = std::max(mx, v);
    for (double& v : s) v /= mx;
    double acc = 0.0;
    for (int i = 1; i < r - 1; ++i)
        acc += std::abs(s[static_cast<size_t>(i + 1)] + s[static_cast<size_t>(i - 1)] -
                        2.0 * s[static_cast<size_t>(i)]);
    return acc / (r - 2);
}

}  // namespace

TEST_CASE("dice basics") {
    std::vector<uint8_t> a = {1, 1, 1, 1, 0, 0};
    std::vector<uint8_t> b = {1, 1, 0, 0, 1, 1};
    CHECK(dice(a, a, 1) == 1.0);
    std::vector<uint8_t> disjoint = {0, 0, 0, 0, 1, 1};
    CHECK(dice(a, disjoint, 1) == doctest::Approx(0.0));
    CHECK(dice(a, b, 1) == doctest::Approx(0.5));  // |P|=4, |G|=4, overlap 2
    std::vector<uint8_t> empty(6, 0);
    CHECK(dice(empty, empty, 1) == 1.0);
    CHECK(dice(a, empty, 1) == 0.0);
    CHECK_THROWS_AS(dice(a, std::vector<uint8_t>{1, 0}, 1), std::invalid_argument);
}

TEST_CASE("dice is symmetric and permutation invariant") {
    RngStream rng = RngStream::keyed({3, 1});
    std::vector<uint8_t> a(64), b(64);
    for (auto& v : a) v = static_cast<uint8_t>(rng.uniform_int(2));
    for (auto& v : b) v = static_cast<uint8_t>(rng.uniform_int(2));
    CHECK(dice(a, b, 1) == dice(b, a, 1));
    std::vector<size_t> perm(64);
    for (size_t i = 0; i < 64; ++i) perm[i] = i;
    for (size_t i = 64; i > 1; --i) std::swap(perm[i - 1], perm[static_cast<size_t>(rng.uniform_int(static_cast<int>(i)))]);
    std::vector<uint8_t> ap(64), bp(64);
    for (size_t i = 0; i < 64; ++i) {
        ap[i] = a[perm[i]];
        bp[i] = b[perm[i]];
    }
    CHECK(dice(ap, bp, 1) == dice(a, b, 1));
}

TEST_CASE("hausdorff: 3-4-5 triangle, identity, empties") {
    CHECK(hausdorff({{0, 0}}, {{3, 4}}, 1.0) == doctest::Approx(5.0));
    CHECK(hausdorff({{2, 2}, {5, 1}}, {{2, 2}, {5, 1}}, 1.0) == 0.0);
    CHECK(assd({{0, 0}}, {{0, 2}}, 1.0) == doctest::Approx(2.0));
    CHECK(assd({{1, 1}}, {{1, 1}}, 1.0) == 0.0);
    CHECK_THROWS_AS(hausdorff({}, {{1, 1}}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(assd({{1, 1}}, {}, 1.0), std::invalid_argument);
}

TEST_CASE("distance metrics match the all-pairs oracle exactly") {
    for (uint64_t seed = 1; seed <= 50; ++seed) {
        auto a = random_points(seed, 10, 40);
        auto b = random_points(seed + 1000, 10, 40);
        CHECK(hausdorff(a, b, 1.0) == oracle_hausdorff(a, b));
        CHECK(assd(a, b, 1.0) == doctest::Approx(oracle_assd(a, b)).epsilon(1e-14));
        CHECK(hausdorff(a, b, 1.0) >= assd(a, b, 1.0));
        CHECK(hausdorff(a, b, 0.7) == doctest::Approx(0.7 * oracle_hausdorff(a, b)));
    }
}

TEST_CASE("boundary extraction uses 4-connectivity with borders as background") {
    // 3x3 solid block inside 5x5: all but the center pixel are boundary
    std::vector<uint8_t> mask(25, 0);
    for (int y = 1; y <= 3; ++y)
        for (int x = 1; x <= 3; ++x) mask[static_cast<size_t>(y) * 5 + x] = 1;
    auto b = mask_boundary(mask, 5, 5, 1);
    CHECK(b.size() == 8);
    // full-image mask: edge pixels form the boundary
    std::vector<uint8_t> full(25, 1);
    CHECK(mask_boundary(full, 5, 5, 1).size() == 16);
}

TEST_CASE("temporal consistency: constant and linear curves give zero") {
    CHECK(temporal_consistency_curve({5, 5, 5, 5, 5}) == doctest::Approx(0.0));
    CHECK(temporal_consistency_curve({1, 2, 3, 4, 5}) < 1e-12);
}

TEST_CASE("temporal consistency matches the literal pipeline oracle") {
    std::vector<std::vector<double>> curves = {
        {0, 1, 0, 1, 0, 1, 0, 1},
        {10, 40, 90, 160, 90, 40, 10, 5},
        {3, 7, 2, 9, 4, 4, 8, 1, 6, 2},
    };
    for (const auto& c : curves) {
        CHECK(temporal_consistency_curve(c) ==
              doctest::Approx(oracle_temporal_consistency(c)).epsilon(1e-12));
    }
    RngStream rng = RngStream::keyed({9, 2});
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> c(static_cast<size_t>(4 + rng.uniform_int(30)));
        for (double& v : c) v = rng.uniform(0.0, 100.0);
        CHECK(temporal_consistency_curve(c) ==
              doctest::Approx(oracle_temporal_consistency(c)).epsilon(1e-12));
    }
}

TEST_CASE("temporal consistency is invariant under uniform area scaling") {
    std::vector<double> c = {10, 40, 90, 160, 90, 40, 10, 5};
    std::vector<double> scaled = c;
    for (double& v : scaled) v *= 37.5;
    CHECK(temporal_consistency_curve(c) == doctest::Approx(temporal_consistency_curve(scaled)));
}

TEST_CASE("temporal consistency error paths") {
    CHECK_THROWS_AS(temporal_consistency_curve({1, 2}), std::invalid_argument);
    MaskSequence seq;
    seq.frames = 4;
    seq.height = 2;
    seq.width = 2;
    seq.masks.assign(16, 0);  // class 1 absent everywhere
    CHECK_THROWS_AS(temporal_consistency(seq, 1), std::invalid_argument);
}

TEST_CASE("temporal consistency over a mask sequence counts pixels per frame") {
    MaskSequence seq;
    seq.frames = 4;
    seq.height = 2;
    seq.width = 2;
    seq.masks = {1, 0, 0, 0,  1, 1, 0, 0,  1, 1, 1, 0,  1, 1, 1, 1};
    CHECK(temporal_consistency(seq, 1) ==
          doctest::Approx(oracle_temporal_consistency({1, 2, 3, 4})).epsilon(1e-12));
}

TEST_CASE("simpson biplane: cylinder, zeros, and errors") {
    std::vector<double> d2(20, 2.0);
    const double v_ml = simpson_biplane(d2, d2, 10.0, 20);
    CHECK(v_ml * 1000.0 == doctest::Approx(10.0 * kPi).epsilon(1e-12));  // 10*pi mm^3
    std::vector<double> zeros(20, 0.0);
    CHECK(simpson_biplane(zeros, zeros, 10.0, 20) == 0.0);
    CHECK_THROWS_AS(simpson_biplane(d2, std::vector<double>(7, 1.0), 10.0, 20),
                    std::invalid_argument);
}

TEST_CASE("simpson biplane approximates the spheroid within 2 percent") {
    // hemiellipsoid-style sampling of an ellipse of semi-axes a (long) and b
    const double a = 30.0, b = 12.0;
    const int n = 20;
    std::vector<double> diam(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double yc = -a + (i + 0.5) * (2.0 * a / n);
        diam[static_cast<size_t>(i)] = 2.0 * b * std::sqrt(std::max(0.0, 1.0 - yc * yc / (a * a)));
    }
    const double v_ml = simpson_biplane(diam, diam, 2.0 * a, n);
    const double analytic_ml = 4.0 / 3.0 * kPi * a * b * b / 1000.0;
    CHECK(std::abs(v_ml - analytic_ml) / analytic_ml < 0.02);
}

TEST_CASE("simpson biplane is monotone in the diameters") {
    RngStream rng = RngStream::keyed({12, 3});
    std::vector<double> d(static_cast<size_t>(20));
    for (double& v : d) v = rng.uniform(1.0, 5.0);
    std::vector<double> bigger = d;
    for (double& v : bigger) v += 0.5;
    CHECK(simpson_biplane(bigger, bigger, 12.0, 20) >= simpson_biplane(d, d, 12.0, 20));
}

TEST_CASE("ejection fraction formula and error path") {
    CHECK(ejection_fraction({120.0, 50.0}) == doctest::Approx(58.33333333).epsilon(1e-8));
    CHECK(ejection_fraction({80.0, 80.0}) == 0.0);
    CHECK_THROWS_AS(ejection_fraction({0.0, 10.0}), std::invalid_argument);
}

TEST_CASE("pearson endpoints and oracle") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y2x, ynegx;
    for (double v : x) {
        y2x.push_back(2 * v);
        ynegx.push_back(-v);
    }
    CHECK(pearson(x, y2x) == doctest::Approx(1.0));
    CHECK(pearson(x, ynegx) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(pearson(x, std::vector<double>(5, 3.0)), std::invalid_argument);

    RngStream rng = RngStream::keyed({15, 4});
    std::vector<double> a(20), b(20);
    for (size_t i = 0; i < 20; ++i) {
        a[i] = rng.uniform(-3, 3);
        b[i] = rng.uniform(-3, 3);
    }
    // definition-formula reference
    double ma = 0, mb = 0;
    for (size_t i = 0; i < 20; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= 20;
    mb /= 20;
    double saa = 0, sbb = 0, sab = 0;
    for (size_t i = 0; i < 20; ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    CHECK(pearson(a, b) == doctest::Approx(sab / std::sqrt(saa * sbb)).epsilon(1e-12));
}

TEST_CASE("disk diameters recover an ellipse volume from its mask") {
    const int h = 64, w = 64;
    const double a = 20.0, b = 11.0, cy = 32.0, cx = 32.0;
    std::vector<uint8_t> mask(static_cast<size_t>(h) * w, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dy = (y - cy) / a, dx = (x - cx) / b;
            if (dy * dy + dx * dx <= 1.0) mask[static_cast<size_t>(y) * w + x] = 1;
        }
    const double v_ml = volume_from_mask_ml(mask, h, w, 1, 1.0);
    const double analytic_ml = 4.0 / 3.0 * kPi * a * b * b / 1000.0;
    CHECK(std::abs(v_ml - analytic_ml) / analytic_ml < 0.08);
    CHECK_THROWS_AS(volume_from_mask_ml(std::vector<uint8_t>(static_cast<size_t>(h) * w, 0),
                                        h, w, 1, 1.0),
                    std::invalid_argument);
}
