#pragma once

// Map systems used across the test suites; thin aliases of the bundled
// worked-example definitions.

#include "conjkit/worked_examples.hpp"

namespace fixtures {

using conjkit::AffineMap;
using conjkit::MapSystem;
using conjkit::MobiusMap;
using conjkit::QuadMap;
using conjkit::Rat;

inline MapSystem example1_g() { return conjkit::worked::example1_g(); }
inline MapSystem example2_g() { return conjkit::worked::example2_g(); }
inline MapSystem example3_g() { return conjkit::worked::example3_g(); }
inline MapSystem dyadic() { return conjkit::worked::dyadic(); }
inline MapSystem minkowski_f() { return conjkit::worked::minkowski_f(); }
inline MapSystem lebesgue_g(const Rat& p) { return conjkit::worked::lebesgue_g(p); }
inline MapSystem example1_f_quad() { return conjkit::worked::example1_f(); }
inline MapSystem example2_f_quad() { return conjkit::worked::example2_f(); }
inline MapSystem example3_f_quad() { return conjkit::worked::example3_f(); }

}  // namespace fixtures
