#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cavity/bath.hpp"
#include "cavity/errors.hpp"

using namespace cavity;

namespace {

// Gauss-Legendre 5-point rule on [a, b], composed over `pieces` panels.
template <class F>
double integrate(F f, double a, double b, int pieces) {
    static const double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
    static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                                0.2369268850561891};
    double sum = 0.0;
    const double h = (b - a) / pieces;
    for (int p = 0; p < pieces; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int i = 0; i < 5; ++i) sum += 0.5 * h * w[i] * f(mid + 0.5 * h * x[i]);
    }
    return sum;
}

}  // namespace

TEST_SUITE("bath") {

TEST_CASE("flat band with one bin puts the mode at the band centre") {
    const auto b = build_bath({spectral::FlatBand{0.3}, 0.5, 1.5, 1}, 1.0, kZeroTemperature);
    REQUIRE(b.size() == 1);
    CHECK(b.modes()[0].frequency == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(b.modes()[0].coupling == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("zero flat band gives zero couplings") {
    const auto b = build_bath({spectral::FlatBand{0.0}, 0.5, 1.5, 7}, 1.0, 1.0);
    for (const auto& m : b.modes()) CHECK(m.coupling == 0.0);
}

TEST_CASE("ohmic discretization: midpoint couplings and total weight") {
    const double eta_s = 0.05, wc = 1.0, lo = 0.01, hi = 8.0 * wc;
    const int M = 64;
    const auto b = build_bath({spectral::Ohmic{eta_s, wc}, lo, hi, M}, 1.0, kZeroTemperature);
    REQUIRE(b.size() == static_cast<std::size_t>(M));
    const double dw = (hi - lo) / M;
    auto J = [&](double w) { return eta_s * w * std::exp(-w / wc); };
    double total = 0.0;
    for (int k = 0; k < M; ++k) {
        const double wk = lo + (k + 0.5) * dw;
        CHECK(b.modes()[k].frequency == doctest::Approx(wk).epsilon(1e-14));
        CHECK(std::abs(b.modes()[k].coupling * b.modes()[k].coupling - J(wk) * dw) < 1e-12);
        total += b.modes()[k].coupling * b.modes()[k].coupling;
    }
    // Midpoint rule error bound: (hi - lo) dw^2 / 24 max|J''|, with |J''| <= 2 eta_s / wc.
    const double exact = integrate(J, lo, hi, 400);
    CHECK(std::abs(total - exact) <= (hi - lo) * dw * dw / 24.0 * 2.0 * eta_s / wc);
}

TEST_CASE("discretized total coupling converges as the mode count doubles") {
    const spectral::Lorentzian L{0.02, 1.0, 0.3};
    double prev = 0.0;
    for (int M : {32, 64, 128}) {
        const auto b = build_bath({L, 0.2, 2.0, M}, 1.0, kZeroTemperature);
        double s = 0.0;
        for (const auto& m : b.modes()) s += m.coupling * m.coupling;
        if (M > 32) CHECK(std::abs(s - prev) / s < 1e-3);
        prev = s;
    }
}

TEST_CASE("table strength function interpolates linearly and vanishes outside") {
    const spectral::Kind t = spectral::Table{{{1.0, 0.0}, {2.0, 1.0}, {3.0, 0.0}}};
    CHECK(strength_function(t, 1.5) == doctest::Approx(0.5));
    CHECK(strength_function(t, 2.5) == doctest::Approx(0.5));
    CHECK(strength_function(t, 0.5) == 0.0);
    CHECK(strength_function(t, 3.5) == 0.0);
}

TEST_CASE("spectral validation errors name the field") {
    auto key_of = [](const SpectralDensitySpec& s) {
        try {
            validate(s);
        } catch (const ValidationError& e) {
            return e.key();
        }
        return std::string();
    };
    CHECK(key_of({spectral::FlatBand{1.0}, 0.0, 1.0, 3}) == "band");
    CHECK(key_of({spectral::FlatBand{1.0}, 0.5, 1.0, 0}) == "mode_count");
    CHECK(key_of({spectral::Table{{{2.0, 1.0}, {1.0, 1.0}}}, 0.5, 3.0, 3}) == "points");
    CHECK(key_of({spectral::Table{{{1.0, -1.0}, {2.0, 1.0}}}, 0.5, 3.0, 3}) == "points");
}

TEST_CASE("validity margin") {
    SUBCASE("no modes") {
        const auto r = validate_bath(BathSpec(1.3, {}));
        CHECK(r.pass);
        CHECK(r.margin == 1.3);
    }
    SUBCASE("inverted oscillator") {
        const auto r = validate_bath(BathSpec(0.5, {{1.0, 1.0}}));
        CHECK_FALSE(r.pass);
        CHECK(r.margin == doctest::Approx(-0.5));
        CHECK_THROWS_AS(require_stable(BathSpec(0.5, {{1.0, 1.0}})), ValidationError);
    }
    SUBCASE("two modes") {
        const auto r = validate_bath(BathSpec(1.0, {{1.0, 0.1}, {2.0, 0.1}}));
        CHECK(r.pass);
        CHECK(r.margin == doctest::Approx(1.0 - 0.015).epsilon(1e-15));
    }
    SUBCASE("monotone under coupling scaling") {
        const BathSpec b(1.0, {{0.5, 0.5}, {1.5, 0.6}});
        REQUIRE(validate_bath(b).pass);
        for (double s = 0.0; s <= 1.0; s += 0.125) CHECK(validate_bath(b.scaled_couplings(s)).pass);
    }
}

TEST_CASE("bath construction rejects invalid input") {
    CHECK_THROWS_AS(BathSpec(0.0, {}), ValidationError);
    CHECK_THROWS_AS(BathSpec(1.0, {{-1.0, 0.1}}), ValidationError);
    CHECK_THROWS_AS(BathSpec(1.0, {{1.0, NAN}}), ValidationError);
    CHECK_THROWS_AS(BathSpec(1.0, {}, 0.0), ValidationError);
    CHECK_THROWS_AS(BathSpec(1.0, {}, -2.0), ValidationError);
}

TEST_CASE("thermal occupations") {
    SUBCASE("zero temperature") {
        for (double n : thermal_occupations(BathSpec(1.0, {{0.7, 0.1}, {1.2, 0.1}}))) CHECK(n == 0.0);
    }
    SUBCASE("beta omega = ln 2 gives one quantum") {
        CHECK(bose_occupation(std::log(2.0), 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("beta omega = 1") {
        // 1/(e - 1)
        CHECK(std::abs(bose_occupation(1.0, 1.0) - 0.58197670686932642439) < 1e-15);
    }
    SUBCASE("coth identity") {
        for (double x : {0.01, 0.3, 1.0, 4.0, 30.0})
            CHECK(std::abs(2.0 * bose_occupation(x, 1.0) + 1.0 - 1.0 / std::tanh(x / 2.0)) < 1e-14 * (1.0 / std::tanh(x / 2.0)));
    }
    SUBCASE("monotone in beta and frequency") {
        double prev = INFINITY;
        for (double beta = 0.1; beta < 20.0; beta *= 1.5) {
            const double n = bose_occupation(beta, 1.0);
            CHECK(n < prev);
            prev = n;
        }
        prev = INFINITY;
        for (double w = 0.1; w < 20.0; w *= 1.5) {
            const double n = bose_occupation(2.0, w);
            CHECK(n < prev);
            prev = n;
        }
    }
    SUBCASE("non-positive beta rejected") { CHECK_THROWS_AS(bose_occupation(0.0, 1.0), ValidationError); }
}

}  // TEST_SUITE
