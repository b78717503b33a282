#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/ops.hpp"
#include "core/rng.hpp"
#include "wavelet/haar.hpp"

using namespace medivista;

namespace {

Tensor random_frame(uint64_t seed, int c, int h, int w) {
    RngStream rng = RngStream::keyed({seed, 0x77});
    std::vector<double> v(static_cast<size_t>(c) * h * w);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return Tensor::from({c, h, w}, std::move(v));
}

double energy(const Tensor& t) {
    double e = 0.0;
    for (int64_t i = 0; i < t.numel(); ++i) e += t[i] * t[i];
    return e;
}

}  // namespace

TEST_CASE("constant frame concentrates in ll") {
    Tensor frame = Tensor::full({1, 2, 2}, 1.0);
    WaveletSubbands sb = haar_dwt2(frame);
    CHECK(sb.ll[0] == doctest::Approx(2.0));
    CHECK(sb.lh[0] == doctest::Approx(0.0));
    CHECK(sb.hl[0] == doctest::Approx(0.0));
    CHECK(sb.hh[0] == doctest::Approx(0.0));
}

TEST_CASE("pure horizontal detail lands in lh") {
    Tensor frame = Tensor::from({1, 2, 2}, {1, -1, 1, -1});
    WaveletSubbands sb = haar_dwt2(frame);
    CHECK(sb.lh[0] == doctest::Approx(2.0));
    CHECK(sb.ll[0] == doctest::Approx(0.0));
    CHECK(sb.hl[0] == doctest::Approx(0.0));
    CHECK(sb.hh[0] == doctest::Approx(0.0));
}

TEST_CASE("energy preservation on random frames") {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        Tensor frame = random_frame(seed, 2, 8, 8);
        WaveletSubbands sb = haar_dwt2(frame);
        const double total = energy(sb.ll) + energy(sb.lh) + energy(sb.hl) + energy(sb.hh);
        CHECK(std::abs(total - energy(frame)) < 1e-10);
    }
}

TEST_CASE("perfect reconstruction within 1e-12") {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        Tensor frame = random_frame(seed, 1, 16, 16);
        Tensor back = haar_idwt2(haar_dwt2(frame));
        for (int64_t i = 0; i < frame.numel(); ++i) {
            CHECK(std::abs(back[i] - frame[i]) < 1e-12);
        }
    }
}

TEST_CASE("round trip with odd extents (reflect padding)") {
    Tensor frame = random_frame(5, 1, 7, 9);
    WaveletSubbands sb = haar_dwt2(frame);
    CHECK(sb.ll.dim(1) == 4);
    CHECK(sb.ll.dim(2) == 5);
    Tensor back = haar_idwt2(sb);
    CHECK(back.dim(1) == 7);
    CHECK(back.dim(2) == 9);
    for (int64_t i = 0; i < frame.numel(); ++i) CHECK(std::abs(back[i] - frame[i]) < 1e-12);
}

TEST_CASE("linearity of the transform") {
    Tensor x = random_frame(11, 1, 8, 8);
    Tensor y = random_frame(12, 1, 8, 8);
    const double alpha = 0.7, beta = -1.3;
    WaveletSubbands lhs = haar_dwt2(add(scale(x, alpha), scale(y, beta)));
    WaveletSubbands sx = haar_dwt2(x);
    WaveletSubbands sy = haar_dwt2(y);
    Tensor l = subbands_channels(lhs);
    Tensor r = add(scale(subbands_channels(sx), alpha), scale(subbands_channels(sy), beta));
    for (int64_t i = 0; i < l.numel(); ++i) CHECK(std::abs(l[i] - r[i]) < 1e-12);
}

TEST_CASE("inverse of the constant case") {
    WaveletSubbands sb;
    sb.ll = Tensor::from({1, 1, 1}, {2.0});
    sb.lh = Tensor::zeros({1, 1, 1});
    sb.hl = Tensor::zeros({1, 1, 1});
    sb.hh = Tensor::zeros({1, 1, 1});
    sb.orig_h = 2;
    sb.orig_w = 2;
    Tensor frame = haar_idwt2(sb);
    for (int i = 0; i < 4; ++i) CHECK(frame[i] == doctest::Approx(1.0));

    WaveletSubbands zero = sb;
    zero.ll = Tensor::zeros({1, 1, 1});
    Tensor zf = haar_idwt2(zero);
    for (int i = 0; i < 4; ++i) CHECK(zf[i] == 0.0);
}

TEST_CASE("band shape mismatch and empty frame are errors") {
    WaveletSubbands sb;
    sb.ll = Tensor::zeros({1, 2, 2});
    sb.lh = Tensor::zeros({1, 2, 2});
    sb.hl = Tensor::zeros({1, 2, 2});
    sb.hh = Tensor::zeros({1, 3, 2});
    sb.orig_h = 4;
    sb.orig_w = 4;
    CHECK_THROWS_AS(haar_idwt2(sb), std::invalid_argument);
    CHECK_THROWS_AS(haar_dwt2(Tensor()), std::invalid_argument);
    CHECK_THROWS_AS(haar_dwt2(Tensor::zeros({2, 2})), std::invalid_argument);
}
