#include <doctest.h>

#include <cmath>

#include "bboxlab/edm.hpp"

using namespace bboxlab;

TEST_CASE("scaling functions: direct substitution") {
    CHECK(lambda_skip(1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(lambda_in(1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(lambda_out(1.0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(lambda_noise(std::exp(4.0)) == doctest::Approx(1.0).epsilon(1e-15));
    // Limit values at sigma = 0.
    CHECK(lambda_skip(0.0) == 1.0);
    CHECK(lambda_out(0.0) == 0.0);
    CHECK(lambda_in(0.0) == 1.0);
    CHECK_THROWS_AS(lambda_noise(0.0), ValidationError);
    CHECK_THROWS_AS(lambda_skip(-1.0), ValidationError);
}

TEST_CASE("scaling identities over a log-spaced grid") {
    for (int i = 0; i < 1000; ++i) {
        const double t = static_cast<double>(i) / 999.0;
        const double sigma = std::pow(10.0, -3.0 + 6.0 * t);
        CHECK(std::abs(lambda_skip(sigma) - lambda_in(sigma) * lambda_in(sigma)) < 1e-12);
        CHECK(std::abs(lambda_skip(sigma) + lambda_out(sigma) * lambda_out(sigma) - 1.0) <
              1e-12);
        CHECK(lambda_out(sigma) == -sigma * lambda_in(sigma));
    }
}

TEST_CASE("precondition: zero core reduces to the skip term") {
    const PreconditionedDenoiser d(
        [](const Tensor& z, double) { return Tensor(z.size(), 0.0); });
    const Tensor out = d({2.0}, 1.0);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-15));  // lambda_skip(1) * 2

    const Tensor at_zero = d({2.0, -3.0}, 0.0);
    CHECK(at_zero[0] == 2.0);
    CHECK(at_zero[1] == -3.0);
}

TEST_CASE("precondition: identity core matches the algebraic closed form") {
    const PreconditionedDenoiser d([](const Tensor& z, double) { return z; });
    for (const double sigma : {0.1, 0.5, 1.0, 3.0, 12.0}) {
        const Tensor out = d({1.0, -2.0, 0.25}, sigma);
        const double factor = (1.0 - sigma) / (sigma * sigma + 1.0);
        CHECK(out[0] == doctest::Approx(factor).epsilon(1e-12));
        CHECK(out[1] == doctest::Approx(-2.0 * factor).epsilon(1e-12));
        CHECK(out[2] == doctest::Approx(0.25 * factor).epsilon(1e-12));
    }
}

TEST_CASE("precondition: shape mismatch from the core is reported") {
    const PreconditionedDenoiser bad([](const Tensor&, double) { return Tensor(2); });
    CHECK_THROWS_AS(bad({1.0, 2.0, 3.0}, 1.0), ValidationError);
}

TEST_CASE("karras_schedule: endpoints, linear case, validation") {
    const SigmaSchedule s = karras_schedule(50, 0.002, 80.0, 7.0);
    REQUIRE(s.sigmas.size() == 51);
    CHECK(s.sigmas.front() == 80.0);
    CHECK(s.sigmas[49] == 0.002);
    CHECK(s.sigmas.back() == 0.0);
    for (std::size_t i = 0; i + 1 < s.sigmas.size(); ++i) {
        CHECK(s.sigmas[i] > s.sigmas[i + 1]);
    }

    // rho = 1 interpolates sigma linearly.
    const SigmaSchedule lin = karras_schedule(3, 1.0, 9.0, 1.0);
    CHECK(lin.sigmas[1] == doctest::Approx(5.0).epsilon(1e-12));

    CHECK_THROWS_AS(karras_schedule(1, 0.002, 80.0, 7.0), ValidationError);
    CHECK_THROWS_AS(karras_schedule(10, 1.0, 0.5, 7.0), ValidationError);
    CHECK_THROWS_AS(karras_schedule(10, 0.0, 1.0, 7.0), ValidationError);
}

TEST_CASE("add_noise: sigma 0 identity and per-seed determinism") {
    const Tensor x = {1.0, 2.0, 3.0};
    GaussianRng rng0(5);
    CHECK(add_noise(x, 0.0, rng0) == x);

    GaussianRng a(77), b(77);
    const Tensor na = add_noise(x, 2.0, a);
    const Tensor nb = add_noise(x, 2.0, b);
    CHECK(na == nb);
    CHECK(na != x);
}

TEST_CASE("add_noise: empirical standard deviation matches sigma") {
    GaussianRng rng(123);
    const Tensor zeros(1000000, 0.0);
    const Tensor noisy = add_noise(zeros, 2.0, rng);
    double mean = 0.0;
    for (const double v : noisy) mean += v;
    mean /= static_cast<double>(noisy.size());
    double var = 0.0;
    for (const double v : noisy) var += (v - mean) * (v - mean);
    var /= static_cast<double>(noisy.size() - 1);
    CHECK(std::abs(std::sqrt(var) - 2.0) < 0.01);
    CHECK(std::abs(mean) < 0.01);
}

TEST_CASE("euler_sample: posterior-mean denoiser reproduces the target law") {
    const SigmaSchedule schedule = karras_schedule();
    const PreconditionedDenoiser d = gaussian_posterior_denoiser(1.0);
    GaussianRng rng(2025);
    const int n = 10000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = euler_sample(d, schedule, 1, rng)[0];
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double std = std::sqrt((sq - n * mean * mean) / (n - 1));
    CHECK(std::abs(mean) < 0.05);
    CHECK(std > 0.95);
    CHECK(std < 1.05);
}

TEST_CASE("euler_sample: identity denoiser keeps the initial state") {
    const PreconditionedDenoiser identity_d(
        // Core chosen so that d(z, sigma) = z exactly: u = (1-skip)/out * z_in/in.
        [](const Tensor& z_scaled, double noise_emb) {
            const double sigma = std::exp(4.0 * noise_emb);
            const double l_in = 1.0 / std::sqrt(sigma * sigma + 1.0);
            const double l_skip = 1.0 / (sigma * sigma + 1.0);
            const double l_out = -sigma * l_in;
            Tensor u(z_scaled.size());
            for (std::size_t i = 0; i < u.size(); ++i) {
                u[i] = (1.0 - l_skip) * (z_scaled[i] / l_in) / l_out;
            }
            return u;
        });
    const SigmaSchedule schedule = karras_schedule(10, 0.01, 10.0, 7.0);
    GaussianRng rng(4), rng_copy(4);
    const Tensor out = euler_sample(identity_d, schedule, 3, rng);
    Tensor expected(3);
    for (double& v : expected) v = schedule.sigmas[0] * rng_copy.next();
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(out[i] == doctest::Approx(expected[i]).epsilon(1e-9));
    }
}

TEST_CASE("euler_sample: determinism and single-step schedules") {
    const PreconditionedDenoiser d = gaussian_posterior_denoiser(1.0);
    const SigmaSchedule schedule = karras_schedule(2, 0.01, 10.0, 7.0);
    GaussianRng a(9), b(9);
    CHECK(euler_sample(d, schedule, 4, a) == euler_sample(d, schedule, 4, b));
}

TEST_CASE("assemble_conditioning_stack: slot layout") {
    const Tensor b0 = {1.0, 1.0};
    const Tensor z0 = {0.5, 0.5};
    const Tensor bn = {2.0, 2.0};
    const LatentStack s = assemble_conditioning_stack({b0}, z0, bn, 4);
    REQUIRE(s.entries.size() == 4);
    CHECK(s.entries[0] == b0);
    CHECK(s.entries[1] == z0);
    CHECK(s.entries[2] == z0);
    CHECK(s.entries[3] == bn);

    const LatentStack s3 = assemble_conditioning_stack({b0, b0, b0}, z0, bn, 25);
    REQUIRE(s3.entries.size() == 25);
    for (int i = 0; i < 3; ++i) CHECK(s3.entries[static_cast<std::size_t>(i)] == b0);
    for (int i = 3; i < 24; ++i) CHECK(s3.entries[static_cast<std::size_t>(i)] == z0);
    CHECK(s3.entries[24] == bn);

    // m = N-1 leaves no z0 repeats.
    const LatentStack tight = assemble_conditioning_stack({b0, b0, b0}, z0, bn, 4);
    REQUIRE(tight.entries.size() == 4);
    CHECK(tight.entries[2] == b0);
    CHECK(tight.entries[3] == bn);
}

TEST_CASE("assemble_conditioning_stack: fuzzed slot contents and errors") {
    for (int m = 1; m <= 5; ++m) {
        for (int n = m + 1; n <= m + 6; ++n) {
            const Tensor b(3, 7.0), z(3, 1.0), f(3, 9.0);
            const LatentStack s =
                assemble_conditioning_stack(std::vector<Tensor>(static_cast<std::size_t>(m), b),
                                            z, f, n);
            REQUIRE(static_cast<int>(s.entries.size()) == n);
            for (int i = 0; i < n; ++i) {
                const Tensor& expected = i < m ? b : (i == n - 1 ? f : z);
                CHECK(s.entries[static_cast<std::size_t>(i)] == expected);
            }
        }
    }
    CHECK_THROWS_AS(assemble_conditioning_stack({{1.0}}, {1.0, 2.0}, {1.0}, 4),
                    ValidationError);
    CHECK_THROWS_AS(assemble_conditioning_stack({{1.0}, {1.0}}, {1.0}, {1.0}, 2),
                    ValidationError);
    CHECK_THROWS_AS(assemble_conditioning_stack({}, {1.0}, {1.0}, 4), ValidationError);
}
