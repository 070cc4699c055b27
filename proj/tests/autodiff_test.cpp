#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dygis/autodiff.hpp"
#include "dygis/rng.hpp"
#include "support/test_util.hpp"

using namespace dygis;
using namespace dygis::ad;

namespace {

Param make_param(std::initializer_list<std::initializer_list<double>> rows) {
    return Param(Tensor(rows));
}

}  // namespace

TEST_CASE("matmul values") {
    Tape t;
    Var i2 = t.constant(Tensor::identity(2));
    Var m = t.constant(Tensor{{5.0, -1.0}, {2.0, 3.0}});
    Var out = matmul(i2, m);
    CHECK(out.value()(0, 0) == doctest::Approx(5.0));
    CHECK(out.value()(0, 1) == doctest::Approx(-1.0));
    CHECK(out.value()(1, 0) == doctest::Approx(2.0));
    CHECK(out.value()(1, 1) == doctest::Approx(3.0));

    Var a = t.constant(Tensor{{1.0, 2.0}, {3.0, 4.0}});
    Var b = t.constant(Tensor{{1.0}, {1.0}});
    Var c = matmul(a, b);
    CHECK(c.value()(0, 0) == doctest::Approx(3.0));
    CHECK(c.value()(1, 0) == doctest::Approx(7.0));
}

TEST_CASE("matmul shape error names both shapes") {
    Tape t;
    Var a = t.constant(Tensor(2, 3));
    Var b = t.constant(Tensor(2, 3));
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("(2x3)"), std::invalid_argument);
}

TEST_CASE("matmul gradient matches finite differences") {
    Param a = make_param({{1.0, 0.0}, {0.0, 1.0}});
    Param b = make_param({{2.0, 3.0}, {4.0, 5.0}});
    auto res = test::check_gradients({&a, &b}, [&](Tape& t) {
        return sum(matmul(t.input(a), t.input(b)));
    });
    CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("elementwise values") {
    Tape t;
    Var z = t.constant(Tensor{{0.0}});
    CHECK(sigmoid(z).value()(0, 0) == doctest::Approx(0.5));
    CHECK(tanh(z).value()(0, 0) == doctest::Approx(0.0));

    Var a = t.constant(Tensor{{2.0, 3.0}});
    Var b = t.constant(Tensor{{4.0, 5.0}});
    Var h = hadamard(a, b);
    CHECK(h.value()(0, 0) == doctest::Approx(8.0));
    CHECK(h.value()(0, 1) == doctest::Approx(15.0));

    CHECK_THROWS_AS(add(a, t.constant(Tensor(2, 2))), std::invalid_argument);
    CHECK_THROWS_AS(log(t.constant(Tensor{{-1.0}})), std::domain_error);
}

TEST_CASE("reductions") {
    Tape t;
    CHECK(sum(t.constant(Tensor{{1.0, 2.0}, {3.0, 4.0}})).value()(0, 0) == doctest::Approx(10.0));
    CHECK(log_sum_exp_rows(t.constant(Tensor{{0.0, 0.0}})).value()(0, 0) ==
          doctest::Approx(std::log(2.0)));

    SUBCASE("log_sum_exp is overflow safe") {
        Var big = t.constant(Tensor{{1000.0, 1000.0}});
        CHECK(log_sum_exp_rows(big).value()(0, 0) == doctest::Approx(1000.0 + std::log(2.0)));
        Var huge = t.constant(Tensor{{1e6, -1e6, 0.5e6}});
        double v = log_sum_exp_rows(huge).value()(0, 0);
        CHECK(std::isfinite(v));
        CHECK(v == doctest::Approx(1e6));
    }

    CHECK_THROWS_AS(sum(t.constant(Tensor())), std::invalid_argument);
}

TEST_CASE("concat_cols") {
    Tape t;
    Var c = concat_cols(t.constant(Tensor{{1.0}}), t.constant(Tensor{{2.0}}));
    CHECK(c.value()(0, 0) == doctest::Approx(1.0));
    CHECK(c.value()(0, 1) == doctest::Approx(2.0));

    Var wide = concat_cols(t.constant(Tensor(3, 2)), t.constant(Tensor(3, 5)));
    CHECK(wide.value().rows() == 3);
    CHECK(wide.value().cols() == 7);

    CHECK_THROWS_AS(concat_cols(t.constant(Tensor(3, 2)), t.constant(Tensor(4, 2))),
                    std::invalid_argument);

    SUBCASE("adjoint of a right-hand column flows only to b") {
        Rng rng(7);
        Param a(randn(2, 2, rng));
        Param b(randn(2, 2, rng));
        for (ad::Param* p : {&a, &b}) p->zero_grad();
        Tape tape;
        Var cat = concat_cols(tape.input(a), tape.input(b));
        // pick out column 3 (second column of b)
        Var picked = select_entries(cat, {{0, 3}, {1, 3}});
        tape.backward(sum(picked));
        CHECK(a.grad(0, 0) == 0.0);
        CHECK(a.grad(1, 1) == 0.0);
        CHECK(b.grad(0, 1) == doctest::Approx(1.0));
        CHECK(b.grad(1, 1) == doctest::Approx(1.0));
        CHECK(b.grad(0, 0) == 0.0);
    }
}

TEST_CASE("reparameterize") {
    Rng rng(3);
    Param mu(randn(2, 3, rng));
    Param logvar(randn(2, 3, rng));

    SUBCASE("zero noise returns mu exactly") {
        Tape t;
        Var z = reparameterize(t.input(mu), t.input(logvar), Tensor(2, 3));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 3; ++j) CHECK(z.value()(i, j) == mu.value(i, j));
    }

    SUBCASE("unit variance shifts by eps") {
        Param lv0(Tensor(2, 3));
        Tensor eps = randn(2, 3, rng);
        Tape t;
        Var z = reparameterize(t.input(mu), t.input(lv0), eps);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(z.value()(i, j) == doctest::Approx(mu.value(i, j) + eps(i, j)));
    }

    SUBCASE("gradient w.r.t. logvar matches finite differences") {
        Param m0(Tensor{{0.0}});
        Param lv(Tensor{{0.3}});
        Tensor eps{{1.7}};
        auto res = test::check_gradients({&m0, &lv}, [&](Tape& t) {
            return sum(reparameterize(t.input(m0), t.input(lv), eps));
        });
        CHECK(res.max_rel_err < 1e-5);
    }
}

TEST_CASE("gaussian_kl closed form") {
    SUBCASE("identical distributions give exactly zero") {
        Rng rng(11);
        Param mu(randn(3, 4, rng));
        Param lv(randn(3, 4, rng));
        Tape t;
        Gaussian q{t.input(mu), t.input(lv)};
        Gaussian p{t.input(mu), t.input(lv)};
        CHECK(gaussian_kl(q, p).value()(0, 0) == 0.0);
    }

    SUBCASE("unit shift in one dimension") {
        Tape t;
        Gaussian q{t.constant(Tensor{{1.0}}), t.constant(Tensor{{0.0}})};
        Gaussian p{t.constant(Tensor{{0.0}}), t.constant(Tensor{{0.0}})};
        CHECK(gaussian_kl(q, p).value()(0, 0) == doctest::Approx(0.5));
    }

    SUBCASE("matches a Monte-Carlo estimate") {
        Rng rng(19);
        Tensor qm = randn(4, 3, rng);
        Tensor ql = randn(4, 3, rng);
        Tensor pm = randn(4, 3, rng);
        Tensor pl = randn(4, 3, rng);

        // independent oracle: KL = E_q[log q(z) - log p(z)] by sampling
        std::normal_distribution<double> noise(0.0, 1.0);
        const int samples = 1000000;
        double acc = 0.0;
        for (int s = 0; s < samples; ++s) {
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j < 3; ++j) {
                    const double sq = std::exp(0.5 * ql(i, j));
                    const double z = qm(i, j) + sq * noise(rng);
                    const double dq = (z - qm(i, j)) / sq;
                    const double sp = std::exp(0.5 * pl(i, j));
                    const double dp = (z - pm(i, j)) / sp;
                    acc += -0.5 * dq * dq - 0.5 * ql(i, j) + 0.5 * dp * dp + 0.5 * pl(i, j);
                }
            }
        }
        const double mc = acc / samples;

        Tape t;
        Gaussian q{t.constant(qm), t.constant(ql)};
        Gaussian p{t.constant(pm), t.constant(pl)};
        const double closed = gaussian_kl(q, p).value()(0, 0);
        CHECK(std::fabs(closed - mc) < 1e-2);
    }

    SUBCASE("non-negative on random inputs") {
        Rng rng(23);
        for (int rep = 0; rep < 200; ++rep) {
            Tape t;
            Gaussian q{t.constant(randn(2, 5, rng)), t.constant(randn(2, 5, rng))};
            Gaussian p{t.constant(randn(2, 5, rng)), t.constant(randn(2, 5, rng))};
            CHECK(gaussian_kl(q, p).value()(0, 0) >= -1e-9);
        }
    }

    SUBCASE("gradients flow to all four inputs") {
        Rng rng(29);
        Param qm(randn(2, 3, rng)), ql(randn(2, 3, rng));
        Param pm(randn(2, 3, rng)), pl(randn(2, 3, rng));
        auto res = test::check_gradients({&qm, &ql, &pm, &pl}, [&](Tape& t) {
            return gaussian_kl({t.input(qm), t.input(ql)}, {t.input(pm), t.input(pl)});
        });
        CHECK(res.max_rel_err < 1e-4);
    }
}

TEST_CASE("backward basics") {
    SUBCASE("sum of a 2x2 gives all-ones gradient") {
        Param w(Tensor(2, 2));
        w.zero_grad();
        Tape t;
        t.backward(sum(t.input(w)));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(w.grad(i, j) == doctest::Approx(1.0));
    }

    SUBCASE("sigmoid derivative at zero is one quarter") {
        Param w(Tensor(2, 2));
        w.zero_grad();
        Tape t;
        t.backward(sum(sigmoid(t.input(w))));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(w.grad(i, j) == doctest::Approx(0.25));
    }

    SUBCASE("non-scalar loss rejected") {
        Param w(Tensor(2, 2));
        Tape t;
        Var v = t.input(w);
        CHECK_THROWS_AS(t.backward(v), std::invalid_argument);
    }

    SUBCASE("unreachable parameters keep zero gradient") {
        Param used(Tensor::constant(1, 1, 2.0));
        Param unused(Tensor::constant(1, 1, 3.0));
        used.zero_grad();
        unused.zero_grad();
        Tape t;
        Var loss = sum(t.input(used));
        t.input(unused);  // on the tape but not in the loss
        t.backward(loss);
        CHECK(used.grad(0, 0) == doctest::Approx(1.0));
        CHECK(unused.grad(0, 0) == 0.0);
    }
}

TEST_CASE("structural op gradients match finite differences") {
    Rng rng(41);

    SUBCASE("transpose, rowsum, add_rowvec") {
        Param x(randn(3, 4, rng));
        Param b(randn(1, 3, rng));
        auto res = test::check_gradients({&x, &b}, [&](Tape& t) {
            Var xt = transpose(t.input(x));                 // 4x3
            Var shifted = add_rowvec(xt, t.input(b));       // 4x3
            return sum(hadamard(rowsum(shifted), rowsum(shifted)));
        });
        CHECK(res.max_rel_err < 1e-4);
    }

    SUBCASE("log_sum_exp_rows") {
        Param x(randn(4, 5, rng));
        auto res = test::check_gradients(
            {&x}, [&](Tape& t) { return sum(log_sum_exp_rows(t.input(x))); });
        CHECK(res.max_rel_err < 1e-4);
    }

    SUBCASE("row_l2_normalize") {
        Param x(randn(4, 3, rng));
        Param y(randn(4, 3, rng));
        auto res = test::check_gradients({&x, &y}, [&](Tape& t) {
            Var nx = row_l2_normalize(t.input(x));
            Var ny = row_l2_normalize(t.input(y));
            return sum(matmul(nx, transpose(ny)));
        });
        CHECK(res.max_rel_err < 1e-4);
    }

    SUBCASE("row_l2_normalize keeps zero rows at zero") {
        Param x(Tensor{{0.0, 0.0}, {3.0, 4.0}});
        x.zero_grad();
        Tape t;
        Var nx = row_l2_normalize(t.input(x));
        CHECK(nx.value()(0, 0) == 0.0);
        CHECK(nx.value()(0, 1) == 0.0);
        CHECK(nx.value()(1, 0) == doctest::Approx(0.6));
        CHECK(nx.value()(1, 1) == doctest::Approx(0.8));
        t.backward(sum(nx));
        CHECK(x.grad(0, 0) == 0.0);
        CHECK(x.grad(0, 1) == 0.0);
    }

    SUBCASE("gather_rows and select_entries") {
        Param x(randn(5, 3, rng));
        auto res = test::check_gradients({&x}, [&](Tape& t) {
            Var g = gather_rows(t.input(x), {4, 0, 0, 2});
            Var s = select_entries(g, {{0, 1}, {1, 2}, {2, 0}});
            return sum(hadamard(s, s));
        });
        CHECK(res.max_rel_err < 1e-4);
    }

    SUBCASE("clip passes gradient only inside the band") {
        Param x(Tensor{{0.5, 2.0, -2.0}});
        x.zero_grad();
        Tape t;
        t.backward(sum(clip(t.input(x), -1.0, 1.0)));
        CHECK(x.grad(0, 0) == doctest::Approx(1.0));
        CHECK(x.grad(0, 1) == 0.0);
        CHECK(x.grad(0, 2) == 0.0);
    }
}

TEST_CASE("ops are pure given explicit noise") {
    Rng rng(53);
    Tensor a = randn(3, 3, rng);
    Tensor b = randn(3, 3, rng);
    Tensor eps = randn(3, 3, rng);

    auto run = [&]() {
        Tape t;
        Var z = reparameterize(t.constant(a), t.constant(b), eps);
        Var out = sum(sigmoid(matmul(z, t.constant(b))));
        return out.value()(0, 0);
    };
    const double first = run();
    const double second = run();
    CHECK(first == second);  // bit-identical
}
