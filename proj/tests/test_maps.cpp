#include <catch2/catch.hpp>

#include <random>

#include "conjkit/maps.hpp"
#include "fixtures.hpp"

using namespace conjkit;

namespace {

Rat random_unit_rat(std::mt19937_64& rng) {
    std::uniform_int_distribution<long> num(0, 1000);
    return Rat(num(rng), 1000);
}

}  // namespace

TEST_CASE("map_eval on the worked coefficients") {
    MapSystem g = fixtures::example1_g();
    CHECK(map_eval_exact(g.at(1), Rat(0)) == Rat(1, 5));
    CHECK(map_eval_exact(IntervalMap{MobiusMap::identity()}, Rat(1)) == Rat(1));
    CHECK(map_eval_exact(g.at(0), Rat(1, 5)) == Rat(1, 29));
    CHECK_THROWS_AS(map_eval_exact(g.at(0), Rat(3, 2)), std::domain_error);
    CHECK_THROWS_AS(map_eval(g.at(0), -0.5), std::domain_error);
}

TEST_CASE("mobius_compose matches the matrix product") {
    MapSystem g = fixtures::example1_g();
    MobiusMap g0 = g.mobius_at(0), g1 = g.mobius_at(1);

    MobiusMap c = mobius_compose(g0, g1);
    CHECK(c.a == Rat(3));
    CHECK(c.b == Rat(1));
    CHECK(c.c == Rat(-9));
    CHECK(c.d == Rat(29));
    for (const Rat& x : {Rat(0), Rat(1, 2), Rat(1)})
        CHECK(c.eval(x) == g0.eval(g1.eval(x)));

    CHECK(mobius_compose(MobiusMap::identity(), g1).eval(Rat(1, 3)) ==
          g1.eval(Rat(1, 3)));

    CHECK(mobius_compose(g1, g1).eval(Rat(0)) == Rat(1, 3));
}

TEST_CASE("mobius_compose is associative after normalization") {
    MapSystem g = fixtures::example2_g();
    MobiusMap a = g.mobius_at(0), b = g.mobius_at(1), c = g.mobius_at(2);
    MobiusMap lhs = mobius_compose(mobius_compose(a, b), c);
    MobiusMap rhs = mobius_compose(a, mobius_compose(b, c));
    CHECK(lhs.a == rhs.a);
    CHECK(lhs.b == rhs.b);
    CHECK(lhs.c == rhs.c);
    CHECK(lhs.d == rhs.d);
}

TEST_CASE("lipschitz constants") {
    MapSystem g = fixtures::example1_g();
    auto l0 = lipschitz_and_modulus(g.at(0));
    auto l1 = lipschitz_and_modulus(g.at(1));
    CHECK(*l0.lip_exact == Rat(6, 25));
    CHECK(l0.lip < 1.0);
    CHECK(*l1.lip_exact == Rat(1));  // weakly contractive but not contractive

    auto lq = lipschitz_and_modulus(IntervalMap{QuadMap{0.5, 0.0, 0.1}});
    CHECK(lq.lip == Approx(0.6));
}

TEST_CASE("modulus bound dominates increments") {
    std::mt19937_64 rng(7);
    for (const MapSystem& sys :
         {fixtures::example1_g(), fixtures::example2_g(), fixtures::minkowski_f()}) {
        for (int i = 0; i < sys.N(); ++i) {
            auto lm = lipschitz_and_modulus(sys.at(i));
            for (int it = 0; it < 1000; ++it) {
                double x = random_unit_rat(rng).to_double();
                double y = random_unit_rat(rng).to_double();
                double lhs = std::abs(map_eval(sys.at(i), x) - map_eval(sys.at(i), y));
                CHECK(lhs <= lm.modulus(std::abs(x - y)) + 1e-13);
            }
        }
    }
}

TEST_CASE("maps are strictly increasing on random rational pairs") {
    std::mt19937_64 rng(11);
    for (const MapSystem& sys :
         {fixtures::example1_g(), fixtures::example2_g(), fixtures::example3_g()}) {
        for (int i = 0; i < sys.N(); ++i) {
            for (int it = 0; it < 200; ++it) {
                Rat x = random_unit_rat(rng), y = random_unit_rat(rng);
                if (x == y) continue;
                if (x > y) std::swap(x, y);
                CHECK(map_eval_exact(sys.at(i), x) < map_eval_exact(sys.at(i), y));
            }
        }
    }
}

TEST_CASE("validate_lf_system on the worked coefficients") {
    auto rep = validate_lf_system({{Rat(1), Rat(0), Rat(-1), Rat(6)},
                                   {Rat(3), Rat(1), Rat(-1), Rat(5)}});
    CHECK(rep.valid);
    CHECK(rep.per_map[0].strictly_contractive);
    CHECK(rep.per_map[1].weak_contractive);
    CHECK_FALSE(rep.per_map[1].strictly_contractive);

    auto dy = validate_lf_system({{Rat(1, 2), Rat(0), Rat(0), Rat(1)},
                                  {Rat(1, 2), Rat(1, 2), Rat(0), Rat(1)}});
    CHECK(dy.valid);
    CHECK(dy.per_map[0].strictly_contractive);
    CHECK(dy.per_map[1].strictly_contractive);

    auto bad = validate_lf_system({{Rat(1), Rat(0), Rat(1), Rat(0)},
                                   {Rat(1, 2), Rat(1, 2), Rat(0), Rat(1)}});
    CHECK_FALSE(bad.valid);
    CHECK_FALSE(bad.per_map[0].well_defined);
    CHECK(bad.first_violation.find("(1)") != std::string::npos);
}

TEST_CASE("validate_compatible_system") {
    auto ex2 = validate_compatible_system(fixtures::example2_g());
    CHECK(ex2.compatible);
    CHECK(ex2.d_system);

    auto dy = validate_compatible_system(fixtures::dyadic());
    CHECK(dy.compatible);

    MapSystem bad{{AffineMap{Rat(1, 2), Rat(0)}, AffineMap{Rat(1, 3), Rat(2, 3)}}};
    auto rep = validate_compatible_system(bad);
    CHECK_FALSE(rep.compatible);
    REQUIRE(rep.failed_joints.size() == 1);
    CHECK(rep.failed_joints[0] == 1);

    auto quad = validate_compatible_system(fixtures::example1_f_quad());
    CHECK(quad.compatible);
    CHECK(quad.d_system);
}

TEST_CASE("cylinder endpoints") {
    MapSystem g = fixtures::example1_g();
    auto c0 = cylinder(g, {0});
    CHECK(c0.lo == Rat(0));
    CHECK(c0.hi == Rat(1, 5));

    auto c11 = cylinder(g, {1, 1});
    CHECK(c11.lo == Rat(1, 3));
    CHECK(c11.hi == Rat(1));

    Word zeros;
    for (int n = 1; n <= 8; ++n) {
        zeros.push_back(0);
        CHECK(cylinder(g, zeros).lo == Rat(0));
    }
    CHECK_THROWS_AS(cylinder(g, {0, 5}), std::out_of_range);
    CHECK_THROWS_AS(cylinder(g, {}), std::invalid_argument);
}

TEST_CASE("cylinder nesting and tiling") {
    std::mt19937_64 rng(3);
    for (const MapSystem& sys : {fixtures::example1_g(), fixtures::example2_g()}) {
        std::uniform_int_distribution<int> sym(0, sys.N() - 1);
        Word w{sym(rng)};
        for (int depth = 1; depth <= 6; ++depth) {
            auto parent = cylinder(sys, w);
            // children tile the parent with matching joints
            Rat prev = parent.lo;
            for (int j = 0; j < sys.N(); ++j) {
                Word wj = w;
                wj.push_back(j);
                auto child = cylinder(sys, wj);
                CHECK(child.lo == prev);
                CHECK(child.hi <= parent.hi);
                prev = child.hi;
            }
            CHECK(prev == parent.hi);
            w.push_back(sym(rng));
        }
    }
}

TEST_CASE("growth bounds for the worked LF system") {
    MapSystem g = fixtures::example1_g();
    auto rep = growth_bounds_check(g, 10);
    CHECK(rep.lower_holds);
    CHECK(rep.upper_holds);
    CHECK(rep.C_upper > 0.0);
    // max width at depth 10 <= C/10
    CHECK(Rat(10) * rep.max_width[9] <= rep.C_upper_exact);
    // depth 1 extremes are the map widths
    Rat w0 = cylinder(g, {0}).width(), w1 = cylinder(g, {1}).width();
    CHECK(rep.min_width[0] == std::min(w0, w1));
    CHECK(rep.max_width[0] == std::max(w0, w1));
}

TEST_CASE("growth bounds on an affine system have exact geometric widths") {
    MapSystem g = fixtures::example3_g();
    auto rep = growth_bounds_check(g, 12);
    for (int n = 1; n <= 12; ++n) {
        CHECK(rep.max_width[static_cast<std::size_t>(n - 1)] ==
              Rat(1, 3).pow(static_cast<unsigned long>(n)));
        CHECK(rep.min_width[static_cast<std::size_t>(n - 1)] ==
              Rat(1, 6).pow(static_cast<unsigned long>(n)));
    }
    CHECK(rep.lower_holds);
    CHECK(rep.upper_holds);
}

TEST_CASE("growth bound widths decay monotonically") {
    auto rep = growth_bounds_check(fixtures::example2_g(), 14);
    for (std::size_t n = 1; n < rep.max_width.size(); ++n)
        CHECK(rep.max_width[n] <= rep.max_width[n - 1]);
    CHECK_THROWS_AS(growth_bounds_check(fixtures::example2_g(), 100),
                    std::out_of_range);
}

TEST_CASE("pareto frontier agrees with exhaustive enumeration at small depth") {
    for (const MapSystem& sys : {fixtures::example1_g(), fixtures::example2_g()}) {
        auto rep = growth_bounds_check(sys, 7);
        for (int depth = 1; depth <= 7; ++depth) {
            Rat mn(2), mx(-1);
            const int n = sys.N();
            std::vector<int> w(static_cast<std::size_t>(depth), 0);
            while (true) {
                auto cyl = cylinder(sys, w);
                Rat width = cyl.width();
                mn = std::min(mn, width);
                mx = std::max(mx, width);
                int k = depth - 1;
                while (k >= 0 && ++w[static_cast<std::size_t>(k)] == n) {
                    w[static_cast<std::size_t>(k)] = 0;
                    --k;
                }
                if (k < 0) break;
            }
            CHECK(rep.min_width[static_cast<std::size_t>(depth - 1)] == mn);
            CHECK(rep.max_width[static_cast<std::size_t>(depth - 1)] == mx);
        }
    }
}

TEST_CASE("growth bounds on a parabolic system decay like C/n") {
    // {x/(x+1), 1/(2-x)}: both maps have a neutral fixed point, so the max
    // width decays only polynomially; the fitted upper law must still hold
    // exactly.
    auto rep = growth_bounds_check(fixtures::minkowski_f(), 16);
    CHECK(rep.lower_holds);
    CHECK(rep.upper_holds);
    // the all-zeros cylinder [0, 1/(n+1)] realizes the C/n scale
    for (int n = 1; n <= 16; ++n)
        CHECK(rep.max_width[static_cast<std::size_t>(n - 1)] >=
              Rat(1, n + 1));
    CHECK(rep.max_width[15] < Rat(1, 8));
}

TEST_CASE("quad map basics") {
    QuadMap q{0.85, 0.0, 0.025};
    CHECK(q.increasing());
    CHECK(q.eval(0.0) == 0.0);
    CHECK(q.eval(1.0) == Approx(0.85));
    CHECK(q.lipschitz() == Approx(0.875));
    double y = q.eval(0.37);
    CHECK(q.inverse_eval(y) == Approx(0.37).margin(1e-12));
}
