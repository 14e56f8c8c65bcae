#include <catch2/catch.hpp>

#include <random>

#include "conjkit/conjugacy.hpp"
#include "fixtures.hpp"

using namespace conjkit;

namespace {

ConjugacyPair minkowski_pair() {
    ConjugacyPair p{fixtures::minkowski_f(), fixtures::dyadic()};
    p.validate();
    return p;
}

ConjugacyPair lebesgue_pair(const Rat& prob) {
    ConjugacyPair p{fixtures::dyadic(), fixtures::lebesgue_g(prob)};
    p.validate();
    return p;
}

Word random_word(int n_symbols, int len, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> sym(0, n_symbols - 1);
    Word w(static_cast<std::size_t>(len));
    for (int& s : w) s = sym(rng);
    return w;
}

}  // namespace

TEST_CASE("addresses: boundary and endpoint cases") {
    MapSystem dyadic = fixtures::dyadic();
    auto half = address_of(dyadic, Rat(1, 2), 4);
    CHECK(half.boundary());
    CHECK(half.symbols == std::vector<int>{1, 0, 0, 0});
    CHECK(half.other == std::vector<int>{0, 1, 1, 1});

    auto zero = address_of(dyadic, Rat(0), 5);
    CHECK_FALSE(zero.boundary());
    CHECK(zero.symbols == std::vector<int>{0, 0, 0, 0, 0});

    auto one = address_of(dyadic, Rat(1), 3);
    CHECK(one.symbols == std::vector<int>{1, 1, 1});

    // Minkowski f-system: 1/3 = f_0(1/2) hits a joint at depth 1
    auto third = address_of(fixtures::minkowski_f(), Rat(1, 3), 2);
    CHECK(third.boundary());
    CHECK(third.symbols == std::vector<int>{0, 1});
    CHECK(third.other == std::vector<int>{0, 0});

    // interior point of an exact system
    auto interior = address_of(dyadic, Rat(1, 3), 6);
    CHECK_FALSE(interior.boundary());
    CHECK(interior.symbols == std::vector<int>{0, 1, 0, 1, 0, 1});
}

TEST_CASE("phi at the classical points") {
    auto mk = minkowski_pair();
    auto r = phi_eval(mk, Rat(1, 3), 1e-12);
    REQUIRE(r.exact);
    CHECK(*r.exact == Rat(1, 4));

    auto z = phi_eval(mk, Rat(0), 1e-12);
    REQUIRE(z.exact);
    CHECK(*z.exact == Rat(0));

    auto lp = lebesgue_pair(Rat(3, 10));
    auto h = phi_eval(lp, Rat(1, 2), 1e-12);
    REQUIRE(h.exact);
    CHECK(*h.exact == Rat(3, 10));
}

TEST_CASE("phi inverse") {
    auto mk = minkowski_pair();
    auto r = phi_inverse_eval(mk, Rat(1, 4), 1e-12);
    REQUIRE(r.exact);
    CHECK(*r.exact == Rat(1, 3));

    auto one = phi_inverse_eval(mk, Rat(1), 1e-12);
    REQUIRE(one.exact);
    CHECK(*one.exact == Rat(1));

    auto lp = lebesgue_pair(Rat(3, 10));
    auto h = phi_inverse_eval(lp, Rat(3, 10), 1e-12);
    REQUIRE(h.exact);
    CHECK(*h.exact == Rat(1, 2));
}

TEST_CASE("inverse round trip") {
    auto mk = minkowski_pair();
    std::mt19937_64 rng(71);

    // exact round trip on f-word endpoints
    for (int it = 0; it < 30; ++it) {
        Word w = random_word(2, 1 + static_cast<int>(rng() % 10), rng);
        Rat x = cylinder(mk.f, w).lo;
        auto fwd = phi_eval(mk, x, 1e-13);
        REQUIRE(fwd.exact);
        auto back = phi_inverse_eval(mk, *fwd.exact, 1e-13);
        REQUIRE(back.exact);
        CHECK(*back.exact == x);
    }

    // float round trip: a forward error tau propagates through the inverse
    // like tau^h for the local Holder exponent h of phi^{-1}, so the
    // tolerance here is structural, not additive
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int it = 0; it < 25; ++it) {
        double x = u(rng);
        auto fwd = phi_eval(mk, x, 1e-13);
        auto back = phi_inverse_eval(mk, fwd.value, 1e-11);
        CHECK(std::abs(back.value - x) <= 2e-3);
    }
}

TEST_CASE("mu masses on cylinders") {
    auto lp = lebesgue_pair(Rat(3, 10));
    CHECK(mu_mass(lp, {0}) == Rat(3, 10));
    CHECK(mu_mass(lp, {1, 0}) == Rat(7, 10) * Rat(3, 10));

    ConjugacyPair ex1{fixtures::example1_f_quad(), fixtures::example1_g()};
    ex1.validate();
    CHECK(mu_mass(ex1, {1, 1}) == Rat(2, 3));

    auto full = mu_mass_interval(lp, 0.0, 1.0, 1e-12);
    REQUIRE(full.exact);
    CHECK(*full.exact == Rat(1));
}

TEST_CASE("interval masses agree with exact cylinder masses") {
    auto lp = lebesgue_pair(Rat(3, 10));
    // [0, 1/2] is exactly the 0-cylinder
    auto m = mu_mass_interval(lp, 0.0, 0.5, 1e-12);
    CHECK(m.value == Approx(0.3).margin(1e-9));
    // [1/4, 3/4] = cylinders 01 and 10
    auto mid = mu_mass_interval(lp, 0.25, 0.75, 1e-12);
    CHECK(mid.value == Approx(0.3 * 0.7 + 0.7 * 0.3).margin(1e-9));
    // generic interval: bracket is honest
    auto gen = mu_mass_interval(lp, 0.2, 0.6, 1e-9);
    CHECK(gen.err <= 1e-9);
}

TEST_CASE("mass additivity over children") {
    std::mt19937_64 rng(77);
    ConjugacyPair ex1{fixtures::example1_f_quad(), fixtures::example1_g()};
    for (int it = 0; it < 20; ++it) {
        Word w = random_word(2, 1 + static_cast<int>(rng() % 8), rng);
        Rat total(0);
        for (int j = 0; j < 2; ++j) {
            Word wj = w;
            wj.push_back(j);
            total += mu_mass(ex1, wj);
        }
        CHECK(total == mu_mass(ex1, w));
    }
}

TEST_CASE("conjugacy identity at f-word endpoints") {
    std::mt19937_64 rng(81);
    auto mk = minkowski_pair();
    auto lp = lebesgue_pair(Rat(3, 10));
    for (const auto& pair : {mk, lp}) {
        for (int it = 0; it < 50; ++it) {
            Word w = random_word(pair.N(), 1 + static_cast<int>(rng() % 12), rng);
            auto fc = cylinder(pair.f, w);
            auto gc = cylinder(pair.g, w);
            for (int side = 0; side < 2; ++side) {
                Rat x = side ? fc.hi : fc.lo;
                Rat expect = side ? gc.hi : gc.lo;
                auto r = phi_eval(pair, x, 1e-13);
                REQUIRE(r.exact);
                CHECK(*r.exact == expect);
            }
        }
    }
}

TEST_CASE("boundary representations give identical phi") {
    auto mk = minkowski_pair();
    // x = 1/3 has representations (0,1,0,0,...) and (0,0,1,1,...)
    Word left{0, 1}, right{0, 0};
    for (int k = 0; k < 6; ++k) {
        left.push_back(0);
        right.push_back(1);
    }
    CHECK(cylinder(mk.g, left).lo == cylinder(mk.g, right).hi);
}

TEST_CASE("functional equation residual") {
    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ConjugacyPair ex1{fixtures::example1_f_quad(), fixtures::example1_g()};
    ex1.validate();
    double tol = 1e-10;
    for (const ConjugacyPair& pair : {minkowski_pair(), ex1}) {
        for (int it = 0; it < 100; ++it) {
            double x = u(rng);
            double px = phi_eval(pair, x, tol).value;
            for (int i = 0; i < pair.N(); ++i) {
                double lhs = phi_eval(pair, map_eval(pair.f.at(i), x), tol).value;
                double rhs = map_eval(pair.g.at(i), px);
                CHECK(std::abs(lhs - rhs) <= 2 * tol + 1e-9);
            }
        }
    }
}

TEST_CASE("phi samples are monotone and accurate") {
    auto lp_half = lebesgue_pair(Rat(1, 2));
    auto s = sample_phi(lp_half, 64, 1e-12);
    REQUIRE(s.pts.size() == 65);
    for (std::size_t k = 0; k < s.pts.size(); ++k) {
        CHECK(s.pts[k].phi == Approx(s.pts[k].x).margin(1e-9));  // identity curve
        if (k) CHECK(s.pts[k].phi >= s.pts[k - 1].phi);
    }

    auto mk = minkowski_pair();
    auto ms = sample_phi(mk, 4, 1e-12, /*exact_mode=*/true);
    bool found = false;
    for (std::size_t k = 0; k < ms.pts.size(); ++k) {
        const auto& pt = ms.pts[k];
        REQUIRE(pt.x_exact);
        REQUIRE(pt.phi_exact);
        if (*pt.x_exact == Rat(1, 3)) {
            found = true;
            CHECK(*pt.phi_exact == Rat(1, 4));
        }
        if (k) {  // strictly increasing in both coordinates
            CHECK(*ms.pts[k - 1].x_exact < *pt.x_exact);
            CHECK(*ms.pts[k - 1].phi_exact < *pt.phi_exact);
        }
    }
    CHECK(found);
    CHECK(ms.pts.front().x == 0.0);
    CHECK(ms.pts.back().x == 1.0);

    auto two = sample_phi(lp_half, 2, 1e-12);
    CHECK(two.pts.front().phi == Approx(0.0).margin(1e-12));
    CHECK(two.pts.back().phi == Approx(1.0).margin(1e-12));
}

TEST_CASE("weak regularity grid") {
    // trivial cover: the whole interval has mass 1
    auto mk = minkowski_pair();
    auto whole = mu_mass_interval(mk, 0.0, 1.0, 1e-12);
    CHECK(whole.value == Approx(1.0));

    // f = g = worked LF system
    ConjugacyPair same{fixtures::example1_g(), fixtures::example1_g()};
    same.validate();
    auto rep = regularity_check(same, 16);
    CHECK(rep.all_hold);
    CHECK(rep.checked > 0);
    CHECK(rep.tightest_ratio <= 1.0 + 1e-9);

    ConjugacyPair ex2{fixtures::example2_g(), fixtures::example2_g()};
    ex2.validate();
    auto rep2 = regularity_check(ex2, 16);
    CHECK(rep2.all_hold);
}

TEST_CASE("validation rejects bad pairs") {
    ConjugacyPair bad{fixtures::dyadic(), fixtures::example2_g()};  // N mismatch
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    // g with a float map is rejected
    ConjugacyPair badg{fixtures::dyadic(), fixtures::example1_f_quad()};
    CHECK_THROWS_AS(badg.validate(), std::invalid_argument);
}
