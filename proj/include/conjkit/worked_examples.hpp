#pragma once

// The bundled map systems: the three worked LF examples with their
// non-affine contractive f-profiles, plus the classical Lebesgue and
// Minkowski pairs.

#include "conjkit/entropy.hpp"
#include "conjkit/maps.hpp"

namespace conjkit::worked {

// g_0 = x/(6-x), g_1 = (3x+1)/(5-x)
inline MapSystem example1_g() {
    return {{MobiusMap{Rat(1), Rat(0), Rat(-1), Rat(6)},
             MobiusMap{Rat(3), Rat(1), Rat(-1), Rat(5)}}};
}

// g_0 = x/(8-x), g_1 = (5x+1)/7, g_2 = 6/(7-x)
inline MapSystem example2_g() {
    return {{MobiusMap{Rat(1), Rat(0), Rat(-1), Rat(8)},
             MobiusMap{Rat(5), Rat(1), Rat(0), Rat(7)},
             MobiusMap{Rat(0), Rat(6), Rat(-1), Rat(7)}}};
}

// g_0 = x/3, g_1 = (x+2)/6, g_2 = (x+3)/6, g_3 = (x+2)/3
inline MapSystem example3_g() {
    return {{AffineMap{Rat(1, 3), Rat(0)}, AffineMap{Rat(1, 6), Rat(1, 3)},
             AffineMap{Rat(1, 6), Rat(1, 2)}, AffineMap{Rat(1, 3), Rat(2, 3)}}};
}

inline MapSystem dyadic() {
    return {{AffineMap{Rat(1, 2), Rat(0)}, AffineMap{Rat(1, 2), Rat(1, 2)}}};
}

// f_0 = x/(x+1), f_1 = 1/(2-x)
inline MapSystem minkowski_f() {
    return {{MobiusMap{Rat(1), Rat(0), Rat(1), Rat(1)},
             MobiusMap{Rat(0), Rat(1), Rat(-1), Rat(2)}}};
}

inline MapSystem lebesgue_g(const Rat& p) {
    return {{AffineMap{p, Rat(0)}, AffineMap{Rat(1) - p, p}}};
}

// Non-affine contractive profiles realizing the Lipschitz boxes of the
// worked examples.
// Lip = (0.875, 0.2)
inline MapSystem example1_f() {
    return {{QuadMap{0.85, 0.0, 0.025}, QuadMap{0.15, 0.85, 0.05}}};
}
// Lip = (0.48, 0.07, 0.48)
inline MapSystem example2_f() {
    return {{QuadMap{0.465, 0.0, 0.015}, QuadMap{0.065, 0.465, 0.005},
             QuadMap{0.47, 0.53, 0.01}}};
}
// Lip = (0.12, 0.45, 0.45, 0.12)
inline MapSystem example3_f() {
    return {{QuadMap{0.08, 0.0, 0.04}, QuadMap{0.42, 0.08, 0.03},
             QuadMap{0.42, 0.5, 0.03}, QuadMap{0.08, 0.92, 0.04}}};
}

inline RegionSpec example1_region() {
    return RegionSpec::full(2).with_bounds(0, 0.8, 1.0);
}
inline RegionSpec example2_region() {
    return RegionSpec::full(3)
        .with_bounds(0, 7.0 / 16.0, 0.5)
        .with_bounds(2, 7.0 / 16.0, 0.5);
}
inline RegionSpec example3_region() {
    return RegionSpec::full(4).with_bounds(0, 0.0, 0.125).with_bounds(3, 0.0, 0.125);
}

/// Everything the reproduction harness needs about one worked example.
struct ExampleSetup {
    int id;
    MapSystem g, f;
    std::vector<double> r;  // Lipschitz constants of f
    double eps;
    double eps2_rounded;  // the rounded entropy constant
    double delta;
    RegionSpec region;
};

inline ExampleSetup setup(int id) {
    switch (id) {
        case 1:
            return {1, example1_g(), example1_f(), {0.875, 0.2},
                    0.1, 0.83, 0.2, example1_region()};
        case 2:
            return {2, example2_g(), example2_f(), {0.48, 0.07, 0.48},
                    0.05, 0.74, 0.1, example2_region()};
        case 3:
            return {3, example3_g(), example3_f(), {0.12, 0.45, 0.45, 0.12},
                    0.1, 0.38, 0.2, example3_region()};
        default:
            throw std::invalid_argument("worked::setup: id must be 1, 2 or 3");
    }
}

}  // namespace conjkit::worked
