#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dygis/optimizer.hpp"
#include "dygis/rng.hpp"

using namespace dygis;

TEST_CASE("zero gradient leaves params unchanged") {
    ad::Param p(Tensor{{1.0, -2.0}, {3.0, 4.0}});
    Adam opt({&p});
    opt.zero_grad();
    opt.step();
    CHECK(p.value(0, 0) == doctest::Approx(1.0));
    CHECK(p.value(1, 1) == doctest::Approx(4.0));
}

TEST_CASE("first step with unit gradient moves by about lr") {
    ad::Param p(Tensor{{0.0}});
    AdamConfig cfg;
    cfg.lr = 0.1;
    Adam opt({&p}, cfg);
    opt.zero_grad();
    p.grad(0, 0) = 1.0;
    opt.step();
    // mhat = 1, vhat = 1 after bias correction, so the update is lr/(1+eps)
    CHECK(p.value(0, 0) == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("identical runs are bit-identical after 10 steps") {
    auto run = [](std::uint64_t seed) {
        Rng rng(seed);
        ad::Param w(glorot_uniform(3, 3, rng));
        Adam opt({&w});
        for (int step = 0; step < 10; ++step) {
            opt.zero_grad();
            // synthetic deterministic gradient: dL/dw = w - target
            for (long long i = 0; i < w.value.size(); ++i)
                w.grad.data()[i] = w.value.data()[i] - 0.5;
            opt.step();
        }
        return w.value;
    };
    Tensor a = run(99);
    Tensor b = run(99);
    for (long long i = 0; i < a.size(); ++i) CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("shape mismatch is rejected") {
    ad::Param p(Tensor(2, 2));
    Adam opt({&p});
    p.grad = Tensor(1, 2);
    CHECK_THROWS_AS(opt.step(), std::invalid_argument);
}

TEST_CASE("descends a quadratic") {
    ad::Param w(Tensor{{5.0}});
    AdamConfig cfg;
    cfg.lr = 0.05;
    Adam opt({&w}, cfg);
    for (int step = 0; step < 500; ++step) {
        opt.zero_grad();
        w.grad(0, 0) = 2.0 * w.value(0, 0);
        opt.step();
    }
    CHECK(std::fabs(w.value(0, 0)) < 0.05);
}
