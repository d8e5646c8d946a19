#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rrqss/keyrate.hpp"

using namespace rrqss;

namespace {
SystemParams table1() { return default_system(); }

double gaussian_bound(double p, double n, double s) {
    const double sn = s / n;
    return p + std::sqrt(2.0 * std::log(2.0) * p * (1.0 - p) * sn);
}
}  // namespace

TEST_CASE("binary entropy reference values") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    // 40-digit arbitrary-precision references.
    CHECK(binary_entropy(0.11) == doctest::Approx(0.499915958164527996).epsilon(1e-14));
    CHECK(binary_entropy(0.02) == doctest::Approx(0.141440542541820645).epsilon(1e-14));
    CHECK_THROWS_AS(binary_entropy(-0.01), std::domain_error);
    CHECK_THROWS_AS(binary_entropy(1.01), std::domain_error);
}

TEST_CASE("binary entropy symmetry") {
    for (double x = 0.01; x < 0.5; x += 0.03)
        CHECK(binary_entropy(x) == doctest::Approx(binary_entropy(1.0 - x)).epsilon(1e-13));
}

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(validate(ProtocolParams{1.0, 128, 10}));
    CHECK_THROWS_AS(validate(ProtocolParams{0.0, 128, 10}), std::invalid_argument);
    CHECK_THROWS_AS(validate(ProtocolParams{1.0, 1, 10}), std::invalid_argument);
    CHECK_THROWS_AS(validate(ProtocolParams{1.0, 128, -1}), std::invalid_argument);
    CHECK_NOTHROW(validate(FiniteSizeParams{1000, 100}));
    CHECK_THROWS_AS(validate(FiniteSizeParams{0, 100}), std::invalid_argument);
    CHECK_THROWS_AS(validate(FiniteSizeParams{1000, 0}), std::invalid_argument);
}

TEST_CASE("gain reference value") {
    CHECK(gain(table1(), ProtocolParams{1.0, 128, 0}, Geometry{300}) ==
          doctest::Approx(0.00174818116630068344).epsilon(1e-14));
}

TEST_CASE("gain rejects saturating dark counts") {
    SystemParams sys = table1();
    sys.p_d = 0.5;
    CHECK_THROWS_AS(gain(sys, ProtocolParams{1.0, 2, 0}, Geometry{10}),
                    std::invalid_argument);
}

TEST_CASE("gain degenerate limits") {
    SystemParams dark_free = table1();
    dark_free.p_d = 0.0;
    CHECK(gain(dark_free, ProtocolParams{0.0, 128, 0}, Geometry{100}) == 0.0);
    // With no light the only clicks are darks.
    const double q0 = gain(table1(), ProtocolParams{0.0, 128, 0}, Geometry{100});
    CHECK(q0 == doctest::Approx(0.5 * 128 * 1e-8).epsilon(1e-12));
}

TEST_CASE("bit error reference value") {
    CHECK(bit_error_rate(table1(), ProtocolParams{1.0, 128, 0}, Geometry{300}) ==
          doctest::Approx(0.0201751113186860908).epsilon(1e-14));
}

TEST_CASE("bit error degenerate limits") {
    // Dark clicks land on a random detector: error 1/2 exactly.
    CHECK(bit_error_rate(table1(), ProtocolParams{0.0, 128, 0}, Geometry{100}) == 0.5);
    SystemParams clean = table1();
    clean.p_d = 0.0;
    clean.e_d = 0.0;
    CHECK(bit_error_rate(clean, ProtocolParams{1.0, 128, 0}, Geometry{100}) == 0.0);
    CHECK_THROWS_AS(bit_error_rate(clean, ProtocolParams{0.0, 128, 0}, Geometry{100}),
                    std::domain_error);
}

TEST_CASE("source tagging reference values") {
    CHECK(source_tag_probability(1.0, 2) ==
          doctest::Approx(0.080301397071394196).epsilon(1e-14));
    CHECK(source_tag_probability(1.0, 0) ==
          doctest::Approx(0.632120558828557678).epsilon(1e-14));
    CHECK(source_tag_probability(0.5, 3) ==
          doctest::Approx(0.00175162255629082365).epsilon(1e-14));
    CHECK(source_tag_probability(12.0, 32) ==
          doctest::Approx(4.45031522168833027e-7).epsilon(1e-13));
    CHECK(source_tag_probability(17.1828, 32) ==
          doctest::Approx(0.000448381249237430802).epsilon(1e-13));
}

TEST_CASE("source tagging properties") {
    CHECK(source_tag_probability(0.0, 5) == 0.0);
    // Threshold zero tags any nonvacuum train.
    for (double mu : {0.1, 1.0, 5.0})
        CHECK(source_tag_probability(mu, 0) ==
              doctest::Approx(-std::expm1(-mu)).epsilon(1e-13));
    double prev = 1.0;
    for (int nu = 0; nu <= 20; ++nu) {
        const double cur = source_tag_probability(2.0, nu);
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK_THROWS_AS(source_tag_probability(-1.0, 0), std::domain_error);
}

TEST_CASE("outside phase error reference and limits") {
    CHECK(phase_error_outside(0.01, 1e-4, 2, 64) ==
          doctest::Approx(0.0511111111111111111).epsilon(1e-14));
    CHECK(binary_entropy(0.0511111111111111111) ==
          doctest::Approx(0.291098258223124414).epsilon(1e-14));
    // No tagging: the bound is purely the threshold fraction.
    CHECK(phase_error_outside(0.01, 0.0, 5, 101) == doctest::Approx(0.05).epsilon(1e-15));
    // Tagged weight at or above the gain certifies nothing.
    CHECK(phase_error_outside(0.01, 0.005, 2, 64) == 1.0);
    CHECK(phase_error_outside(0.01, 0.007, 2, 64) == 1.0);
    CHECK_THROWS_AS(phase_error_outside(0.0, 1e-4, 2, 64), std::domain_error);
}

TEST_CASE("binomial tail reference values") {
    CHECK(binomial_tail(5, 20, 0.25) ==
          doctest::Approx(0.382827345612895442).epsilon(1e-13));
    CHECK(binomial_tail(0, 1, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(binomial_tail(10, 100, 0.05) ==
          doctest::Approx(0.0114724100674847008).epsilon(1e-13));
    CHECK(binomial_tail(50, 1000, 0.04) ==
          doctest::Approx(0.0490640453698725691).epsilon(1e-13));
    CHECK(binomial_tail(3, 10, 0.5) == doctest::Approx(0.828125).epsilon(1e-14));
}

TEST_CASE("binomial tail edge cases") {
    CHECK(binomial_tail(7, 7, 0.4) == 0.0);
    CHECK(binomial_tail(3, 10, 0.0) == 0.0);
    CHECK(binomial_tail(3, 10, 1.0) == 1.0);
    CHECK_THROWS_AS(binomial_tail(-1, 10, 0.5), std::domain_error);
    CHECK_THROWS_AS(binomial_tail(11, 10, 0.5), std::domain_error);
    CHECK_THROWS_AS(binomial_tail(1, 10, 1.5), std::domain_error);
}

TEST_CASE("binomial tail inversion brackets the target") {
    for (std::int64_t n : {1000LL, 10000LL, 1000000LL}) {
        for (double p : {0.005, 0.02, 0.1}) {
            for (int s : {70, 100}) {
                const std::int64_t a = invert_binomial_tail(n, p, s);
                const double eps = std::exp2(-s);
                CHECK(binomial_tail(a, n, p) <= eps);
                if (a > 0) CHECK(binomial_tail(a - 1, n, p) > eps);
            }
        }
    }
}

TEST_CASE("gaussian bound is sound against exact inversion") {
    for (std::int64_t n : {1000LL, 10000LL, 100000LL, 1000000LL}) {
        for (double p : {0.005, 0.02, 0.05, 0.1}) {
            for (int s : {70, 100}) {
                const std::int64_t a = invert_binomial_tail(n, p, s);
                const double exact = static_cast<double>(a) / static_cast<double>(n);
                const double gauss =
                    gaussian_bound(p, static_cast<double>(n), static_cast<double>(s));
                // The gaussian form never overshoots the exact bound by
                // more than the documented 5% slack...
                CHECK(gauss <= 1.05 * exact);
                // ...and inside its trusted regime it does not undershoot
                // it by more than that either.
                if (static_cast<double>(n) * p >= 500.0)
                    CHECK(exact <= 1.05 * gauss);
            }
        }
    }
}

TEST_CASE("finite-size phase entropy reference values") {
    CHECK(finite_size_phase_entropy(0.02, 0.05, 1000000, 100) ==
          doctest::Approx(0.31252542492925774).epsilon(1e-13));
    CHECK(finite_size_phase_entropy(0.05, 0.1, 10000, 100) ==
          doctest::Approx(0.614535242848648071).epsilon(1e-13));
    // Zero error rates leave only the s/N offset.
    CHECK(finite_size_phase_entropy(0.0, 0.0, 10000, 100) ==
          doctest::Approx(0.01).epsilon(1e-15));
    CHECK_THROWS_AS(finite_size_phase_entropy(-0.1, 0.0, 100, 10), std::domain_error);
}

TEST_CASE("outside rate regression at 300 km") {
    const ProtocolParams proto{15.0, 512, 32};
    const RateBreakdown bd = keyrate_outside(table1(), proto, Geometry{300});
    CHECK(bd.Q == doctest::Approx(0.0255838713792550196).epsilon(1e-13));
    CHECK(bd.e_b == doctest::Approx(0.0200455728935617896).epsilon(1e-13));
    CHECK(bd.e_src == doctest::Approx(4.01546359374421416e-5).epsilon(1e-12));
    CHECK(bd.e_p == doctest::Approx(0.0655647927140884593).epsilon(1e-12));
    CHECK(bd.R == doctest::Approx(2.47336103553478928e-5).epsilon(1e-12));
    CHECK_FALSE(bd.clamped());
    CHECK(bd.reported_rate() == bd.R);
}

TEST_CASE("inside rate regression at 300 and 600 km") {
    const ProtocolParams p300{15.0, 512, 32};
    const RateBreakdown bd300 = keyrate_inside(table1(), p300, Geometry{300});
    CHECK(bd300.Q_hat == doctest::Approx(0.5 * bd300.Q).epsilon(1e-15));
    CHECK(bd300.Q_A == bd300.Q_B);
    CHECK(bd300.R == doctest::Approx(8.70505026116562848e-6).epsilon(1e-12));

    const ProtocolParams p600{12.0, 512, 32};
    const RateBreakdown bd600 = keyrate_inside(table1(), p600, Geometry{600});
    CHECK(bd600.Q == doctest::Approx(6.82256926332432759e-5).epsilon(1e-13));
    CHECK(bd600.e_b == doctest::Approx(0.0380084447917917506).epsilon(1e-13));
    CHECK(bd600.e_src == doctest::Approx(4.45031522168833027e-7).epsilon(1e-12));
    CHECK(bd600.R == doctest::Approx(9.38138613895746353e-9).epsilon(1e-11));
}

TEST_CASE("finite-size rate regression") {
    const RateBreakdown f600 = keyrate_inside_finite(
        table1(), ProtocolParams{12.0, 512, 32}, Geometry{600},
        FiniteSizeParams{10000, 100});
    CHECK(f600.R == doctest::Approx(1.47181388923336814e-9).epsilon(1e-11));
    CHECK(f600.gaussian_flagged);  // N*p1 is tiny here

    const RateBreakdown f300 = keyrate_inside_finite(
        table1(), ProtocolParams{15.0, 512, 32}, Geometry{300},
        FiniteSizeParams{1000000, 100});
    CHECK(f300.R == doctest::Approx(8.41691322016450206e-6).epsilon(1e-12));
    CHECK(f300.r1 > 0.0);
    CHECK(f300.r2 > 0.0);
}

TEST_CASE("finite-size never beats the asymptote") {
    const std::vector<double> dists{50, 200, 300, 450, 600};
    const std::vector<std::int64_t> sizes{10000, 1000000, 1000000000};
    for (double d : dists) {
        for (std::int64_t N : sizes) {
            const ProtocolParams proto{12.0, 512, 32};
            const RateBreakdown asym = keyrate_inside(table1(), proto, Geometry{d});
            const RateBreakdown fin = keyrate_inside_finite(
                table1(), proto, Geometry{d}, FiniteSizeParams{N, 100});
            CHECK(fin.R <= asym.R + 1e-15);
        }
    }
}

TEST_CASE("finite-size converges to the asymptote") {
    const ProtocolParams proto{15.0, 512, 32};
    const RateBreakdown asym = keyrate_inside(table1(), proto, Geometry{300});
    const RateBreakdown fin = keyrate_inside_finite(
        table1(), proto, Geometry{300},
        FiniteSizeParams{1000000000000000000LL, 100});
    CHECK(fin.R == doctest::Approx(asym.R).epsilon(1e-6));
}

TEST_CASE("exact tail agrees with the gaussian where both are trusted") {
    FiniteSizeParams gauss{1000000, 100};
    FiniteSizeParams exact{1000000, 100};
    exact.tail = FiniteSizeParams::Tail::exact;
    const ProtocolParams proto{15.0, 512, 32};
    const RateBreakdown bg =
        keyrate_inside_finite(table1(), proto, Geometry{300}, gauss);
    const RateBreakdown be =
        keyrate_inside_finite(table1(), proto, Geometry{300}, exact);
    CHECK_FALSE(bg.gaussian_flagged);
    CHECK(be.R == doctest::Approx(bg.R).epsilon(0.05));
}

TEST_CASE("gain falls and bit error grows with distance") {
    const ProtocolParams proto{15.0, 512, 32};
    double prev_q = 1.0, prev_e = 0.0;
    for (double d = 100; d <= 700; d += 50) {
        const double q = gain(table1(), proto, Geometry{d});
        const double e = bit_error_rate(table1(), proto, Geometry{d});
        CHECK(q < prev_q);
        CHECK(e > prev_e);
        prev_q = q;
        prev_e = e;
    }
}

TEST_CASE("reported rate clamps below zero") {
    // Far past the cutoff the raw rate is negative; the report is zero.
    const RateBreakdown bd =
        keyrate_inside(table1(), ProtocolParams{12.0, 512, 32}, Geometry{700});
    CHECK(bd.R < 0.0);
    CHECK(bd.reported_rate() == 0.0);
    CHECK(bd.clamped());
}
