#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "core/mvst.hpp"
#include "metrics/metrics.hpp"
#include "phantom/phantom.hpp"

using namespace medivista;

namespace {

PhantomParams toy_params() {
    PhantomParams p;
    p.frames = 8;
    p.height = 64;
    p.width = 64;
    return p;
}

std::vector<double> mask_area_curve(const PhantomRecord& rec, uint8_t cls) {
    const int t = rec.video.dim(1);
    const int64_t plane = static_cast<int64_t>(rec.video.dim(2)) * rec.video.dim(3);
    std::vector<double> areas(static_cast<size_t>(t), 0.0);
    for (int f = 0; f < t; ++f) {
        int64_t n = 0;
        for (int64_t i = 0; i < plane; ++i) n += rec.masks[static_cast<size_t>(f * plane + i)] == cls;
        areas[static_cast<size_t>(f)] = static_cast<double>(n);
    }
    return areas;
}

}  // namespace

TEST_CASE("same seed is bit-identical; different seeds differ") {
    PhantomRecord a = generate_phantom(toy_params(), 12345);
    PhantomRecord b = generate_phantom(toy_params(), 12345);
    CHECK(a.video.values() == b.video.values());
    CHECK(a.masks == b.masks);
    PhantomRecord c = generate_phantom(toy_params(), 54321);
    CHECK(a.video.values() != c.video.values());
}

TEST_CASE("video is min-max normalized and labels sit at ED/ES") {
    PhantomRecord rec = generate_phantom(toy_params(), 7);
    double mn = 1e300, mx = -1e300;
    for (int64_t i = 0; i < rec.video.numel(); ++i) {
        mn = std::min(mn, rec.video[i]);
        mx = std::max(mx, rec.video[i]);
    }
    CHECK(mn == doctest::Approx(0.0));
    CHECK(mx == doctest::Approx(1.0));
    CHECK(rec.ed_idx == 0);
    CHECK(rec.es_idx == 4);
    CHECK(rec.labels.masks.size() == 2);
    CHECK(rec.labels.masks.count(rec.ed_idx) == 1);
    CHECK(rec.labels.masks.count(rec.es_idx) == 1);
}

TEST_CASE("area curve peaks at ED and bottoms at ES") {
    for (uint64_t seed : {1ull, 2ull, 3ull, 9ull}) {
        PhantomRecord rec = generate_phantom(toy_params(), seed);
        std::vector<double> areas = mask_area_curve(rec, 1);
        const auto mx = std::max_element(areas.begin(), areas.end()) - areas.begin();
        const auto mn = std::min_element(areas.begin(), areas.end()) - areas.begin();
        CHECK(mx == rec.ed_idx);
        CHECK(mn == rec.es_idx);
        // unimodal per half cycle: non-increasing to ES, non-decreasing after
        for (int f = 1; f <= rec.es_idx; ++f) CHECK(areas[f] <= areas[f - 1] + 1e-9);
        for (int f = rec.es_idx + 1; f < rec.video.dim(1); ++f) CHECK(areas[f] >= areas[f - 1] - 1e-9);
    }
}

TEST_CASE("endo stays darker than the epi ring by the contrast margin") {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        PhantomRecord rec = generate_phantom(toy_params(), seed);
        const int64_t plane = 64 * 64;
        double endo_sum = 0, epi_sum = 0;
        int64_t endo_n = 0, epi_n = 0;
        for (int f = 0; f < 8; ++f)
            for (int64_t i = 0; i < plane; ++i) {
                const double v = rec.video[f * plane + i];
                const uint8_t c = rec.masks[static_cast<size_t>(f * plane + i)];
                if (c == 1) {
                    endo_sum += v;
                    ++endo_n;
                } else if (c == 2) {
                    epi_sum += v;
                    ++epi_n;
                }
            }
        CHECK(epi_sum / epi_n - endo_sum / endo_n >= 0.15);
    }
}

TEST_CASE("static phantom (e -> 0) has zero temporal consistency L") {
    PhantomParams p = toy_params();
    p.eject = 1e-6;
    p.eject_jitter = 0.0;
    PhantomRecord rec = generate_phantom(p, 3);
    std::vector<double> areas = mask_area_curve(rec, 1);
    CHECK(temporal_consistency_curve(areas) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("simpson volume of the true masks matches the closed-form ellipsoid within 2%") {
    PhantomParams p = toy_params();
    p.eject_jitter = 0.0;  // e = 0.4 exactly
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        PhantomRecord rec = generate_phantom(p, seed);
        const int64_t plane = 64 * 64;
        std::vector<uint8_t> ed(rec.masks.begin() + rec.ed_idx * plane,
                                rec.masks.begin() + (rec.ed_idx + 1) * plane);
        std::vector<uint8_t> es(rec.masks.begin() + rec.es_idx * plane,
                                rec.masks.begin() + (rec.es_idx + 1) * plane);
        const double edv = volume_from_mask_ml(ed, 64, 64, 1, rec.spacing_mm);
        const double esv = volume_from_mask_ml(es, 64, 64, 1, rec.spacing_mm);
        const double ef = ejection_fraction({edv, esv});
        CHECK(std::abs(ef - rec.true_ef_pct) / rec.true_ef_pct < 0.02);
        // analytic EF for uniform axis scaling: 1 - (1-e)^3
        CHECK(rec.true_ef_pct ==
              doctest::Approx(100.0 * (1.0 - std::pow(1.0 - rec.eject, 3.0))).epsilon(1e-9));
    }
}

TEST_CASE("parameter validation") {
    PhantomParams p = toy_params();
    p.frames = 3;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = toy_params();
    p.height = 63;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = toy_params();
    p.eject = 1.2;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = toy_params();
    p.eject = 0.05;
    p.eject_jitter = 0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("three-structure phantom carries an la blob") {
    PhantomParams p = toy_params();
    p.structures = 3;
    PhantomRecord rec = generate_phantom(p, 21);
    CHECK(rec.structures.size() == 3);
    int64_t la = 0;
    for (uint8_t c : rec.masks) la += c == 3;
    CHECK(la > 0);
}

TEST_CASE("write_dataset lays out files, splits and round-trips bit-exactly") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "mv_phantom_ds";
    fs::remove_all(dir);

    std::vector<PhantomRecord> records;
    PhantomParams p = toy_params();
    p.height = 32;
    p.width = 32;
    for (uint64_t i = 0; i < 3; ++i) records.push_back(generate_phantom(p, 100 + i));
    nlohmann::json manifest = write_dataset(records, dir, {}, 5);
    CHECK(manifest.at("records").size() == 3);
    CHECK(fs::exists(dir / "manifest.json"));
    int vids = 0, masks = 0;
    for (const auto& e : fs::directory_iterator(dir / "videos")) vids += e.is_regular_file();
    for (const auto& e : fs::directory_iterator(dir / "masks")) masks += e.is_regular_file();
    CHECK(vids == 3);
    CHECK(masks == 3);

    Dataset ds = Dataset::load(dir);
    CHECK(ds.records.size() == 3);
    Tensor v0 = ds.load_video(0);
    CHECK(v0.values() == records[0].video.values());
    CHECK(ds.load_mask(0) == records[0].masks);
    fs::remove_all(dir);
}

TEST_CASE("split ratios give 64/16/20 on 100 records") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "mv_phantom_split";
    fs::remove_all(dir);
    PhantomParams p = toy_params();
    p.height = 16;
    p.width = 16;
    p.endo_a_frac = 0.25;
    p.endo_b_frac = 0.2;
    p.wall_frac = 0.1;
    std::vector<PhantomRecord> records;
    for (uint64_t i = 0; i < 100; ++i) records.push_back(generate_phantom(p, i));
    nlohmann::json manifest = write_dataset(records, dir, {0.64, 0.16, 0.20}, 11);
    int n_train = 0, n_val = 0, n_test = 0;
    for (const auto& r : manifest.at("records")) {
        const std::string s = r.at("split").get<std::string>();
        n_train += s == "train";
        n_val += s == "val";
        n_test += s == "test";
    }
    CHECK(n_train == 64);
    CHECK(n_val == 16);
    CHECK(n_test == 20);
    fs::remove_all(dir);
}

TEST_CASE("empty record list is rejected") {
    CHECK_THROWS_AS(write_dataset({}, std::filesystem::temp_directory_path() / "x", {}, 0),
                    std::invalid_argument);
}
