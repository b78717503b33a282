#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "cli/commands.hpp"
#include "core/gradcheck.hpp"
#include "core/mvst.hpp"
#include "core/ops.hpp"
#include "core/rng.hpp"

using namespace medivista;

namespace {

std::vector<double> rand_vec(RngStream& rng, int64_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(static_cast<size_t>(n));
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

}  // namespace

TEST_CASE("matmul identity and zero cases") {
    Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
    Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
    Tensor prod = matmul(eye, a);
    for (int i = 0; i < 4; ++i) CHECK(prod[i] == a[i]);

    Tensor z = Tensor::zeros({2, 3});
    Tensor zz = matmul(eye, z);
    for (int i = 0; i < 6; ++i) CHECK(zz[i] == 0.0);
}

TEST_CASE("matmul shape error names both shapes") {
    Tensor a = Tensor::zeros({4, 3});
    Tensor b = Tensor::zeros({5, 2});
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("[4x3]"), std::invalid_argument);
    try {
        matmul(a, b);
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("[5x2]") != std::string::npos);
    }
}

TEST_CASE("matmul gradient vs central finite differences") {
    RngStream rng = RngStream::keyed({42, 1});
    auto rep = grad_check([](const std::vector<Tensor>& in) { return matmul(in[0], in[1]); },
                          {{4, 3}, {3, 5}}, {rand_vec(rng, 12), rand_vec(rng, 15)}, 1e-6);
    CHECK(rep.pass);
    CHECK(rep.max_rel_err < 1e-6);
}

TEST_CASE("matmul associativity on random triples") {
    RngStream rng = RngStream::keyed({7, 2});
    for (int trial = 0; trial < 5; ++trial) {
        Tensor a = Tensor::from({3, 4}, rand_vec(rng, 12));
        Tensor b = Tensor::from({4, 2}, rand_vec(rng, 8));
        Tensor c = Tensor::from({2, 5}, rand_vec(rng, 10));
        Tensor left = matmul(matmul(a, b), c);
        Tensor right = matmul(a, matmul(b, c));
        for (int64_t i = 0; i < left.numel(); ++i) {
            CHECK(std::abs(left[i] - right[i]) < 1e-10);
        }
    }
}

TEST_CASE("softmax symmetry, stability, and row sums") {
    Tensor u = softmax(Tensor::from({3}, {0, 0, 0}), 0);
    for (int i = 0; i < 3; ++i) CHECK(u[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));

    Tensor s = softmax(Tensor::from({2}, {1000, 0}), 0);
    CHECK(std::abs(s[0] - 1.0) < 1e-12);
    CHECK(std::abs(s[1]) < 1e-12);

    RngStream rng = RngStream::keyed({3, 3});
    Tensor x = Tensor::from({4, 6}, rand_vec(rng, 24, -3, 3));
    Tensor y = softmax(x, 1);
    for (int r = 0; r < 4; ++r) {
        double row = 0.0;
        for (int c = 0; c < 6; ++c) {
            const double v = y.at(r, c);
            CHECK(v > 0.0);
            CHECK(v < 1.0);
            row += v;
        }
        CHECK(std::abs(row - 1.0) < 1e-12);
    }
}

TEST_CASE("softmax gradient vs finite differences") {
    RngStream rng = RngStream::keyed({11, 4});
    auto rep = grad_check(
        [](const std::vector<Tensor>& in) { return mul(softmax(in[0], 0), in[1]); }, {{6}, {6}},
        {rand_vec(rng, 6, -2, 2), rand_vec(rng, 6)}, 1e-6);
    CHECK(rep.pass);
}

TEST_CASE("grad_check on a linear op reports numerically zero error") {
    auto rep = grad_check([](const std::vector<Tensor>& in) { return scale(in[0], 2.0); }, {{5}},
                          {{0.3, -0.7, 1.1, 0.0, 2.0}}, 1e-5);
    CHECK(rep.pass);
    // analytic and FD both equal 2; only summation rounding remains
    CHECK(rep.max_rel_err < 1e-10);
}

TEST_CASE("grad_check catches a corrupted backward (negative control)") {
    register_all_gradcheck_cases();
    const GradCheckCase* c = GradCheckRegistry::instance().find("corrupted_control");
    REQUIRE(c != nullptr);
    CHECK(c->hidden);
    GradCheckReport rep = c->run(99, 1e-5);
    CHECK_FALSE(rep.pass);
}

TEST_CASE("every registered op passes grad_check at 1e-5 on 10 seeds") {
    register_all_gradcheck_cases();
    for (const GradCheckCase& c : GradCheckRegistry::instance().cases()) {
        if (c.hidden) continue;
        for (uint64_t seed = 1; seed <= 10; ++seed) {
            GradCheckReport rep = c.run(derive_seed(1234, seed), c.tol);
            INFO(c.name, " seed ", seed, " err ", rep.max_rel_err, " worst ", rep.worst);
            CHECK(rep.pass);
        }
    }
}

TEST_CASE("non-finite results are hard errors naming the op") {
    Tensor x = Tensor::from({2}, {1.0, -1.0});
    CHECK_THROWS_WITH_AS(log(x), doctest::Contains("log"), std::runtime_error);
    CHECK_THROWS_AS(exp(Tensor::from({1}, {710.0})), std::runtime_error);
    CHECK_THROWS_AS(div(Tensor::from({1}, {1.0}), Tensor::from({1}, {0.0})), std::runtime_error);
}

TEST_CASE("frozen leaves receive no gradient buffer") {
    Tensor w0 = Tensor::from({2, 2}, {1, 2, 3, 4});  // stays frozen
    Tensor u = Tensor::from({2, 2}, {0.5, 0, 0, 0.5});
    u.set_trainable(true);
    Tensor loss = sum(matmul(w0, u));
    backward(loss);
    CHECK(u.has_grad());
    CHECK_FALSE(w0.has_grad());
}

TEST_CASE("no-grad guard detaches results") {
    Tensor x = Tensor::from({3}, {1, 2, 3});
    x.set_trainable(true);
    NoGradGuard ng;
    Tensor y = scale(x, 2.0);
    CHECK_FALSE(y.requires_grad());
}

TEST_CASE("gradients accumulate when an input is used twice") {
    Tensor x = Tensor::from({2}, {3.0, -1.0});
    x.set_trainable(true);
    Tensor loss = sum(mul(x, x));  // d/dx sum(x^2) = 2x
    backward(loss);
    CHECK(x.grad()[0] == doctest::Approx(6.0));
    CHECK(x.grad()[1] == doctest::Approx(-2.0));
}

TEST_CASE("slice/concat/reshape round trips") {
    RngStream rng = RngStream::keyed({8, 5});
    Tensor x = Tensor::from({2, 3, 4}, rand_vec(rng, 24));
    Tensor a = slice(x, 1, 0, 1);
    Tensor b = slice(x, 1, 1, 2);
    Tensor back = concat({a, b}, 1);
    for (int64_t i = 0; i < x.numel(); ++i) CHECK(back[i] == x[i]);

    Tensor t = transpose(reshape(x, {6, 4}));
    CHECK(t.dim(0) == 4);
    CHECK(t.at(0, 1) == x[4]);
}

TEST_CASE("mvst round trip is bit identical for f64") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "mvst_test";
    fs::create_directories(dir);
    RngStream rng = RngStream::keyed({5, 6});
    std::vector<double> data = rand_vec(rng, 24, -10, 10);
    write_mvst_f64(dir / "a.mvst", {2, 3, 4}, data);
    MvstFile f = read_mvst(dir / "a.mvst");
    CHECK(f.dtype == MvstDtype::f64);
    CHECK(f.shape == Shape{2, 3, 4});
    for (size_t i = 0; i < data.size(); ++i) CHECK(f.f64[i] == data[i]);

    std::vector<uint8_t> ids = {0, 1, 2, 3, 2, 1};
    write_mvst_u8(dir / "m.mvst", {2, 3}, ids);
    MvstFile m = read_mvst(dir / "m.mvst");
    CHECK(m.dtype == MvstDtype::u8);
    CHECK(m.u8 == ids);

    write_mvst_f32(dir / "f.mvst", {4}, {1.5, -2.25, 0.0, 3.0});
    MvstFile g = read_mvst(dir / "f.mvst");
    CHECK(g.dtype == MvstDtype::f32);
    CHECK(g.f64[1] == doctest::Approx(-2.25));

    std::ofstream bad(dir / "bad.mvst", std::ios::binary);
    bad << "NOPE";
    bad.close();
    CHECK_THROWS_AS(read_mvst(dir / "bad.mvst"), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("rng streams are deterministic and splittable") {
    RngStream a = RngStream::keyed({1, 2, 3});
    RngStream b = RngStream::keyed({1, 2, 3});
    for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
    RngStream c = RngStream::keyed({1, 2, 4});
    CHECK(RngStream::keyed({1, 2, 3}).next_u64() != c.next_u64());
}
