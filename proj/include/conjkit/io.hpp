#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "conjkit/conjugacy.hpp"
#include "conjkit/markov.hpp"

namespace conjkit {

/// CSV with the stable header x,phi,err; the precision flag is honored
/// exactly via fixed %. *g formatting.
inline std::string phi_sample_csv(const PhiSample& sample, int precision = 12) {
    std::ostringstream os;
    os << "x,phi,err\n";
    char buf[96];
    for (const auto& pt : sample.pts) {
        std::snprintf(buf, sizeof(buf), "%.*g,%.*g,%.*g\n", precision, pt.x,
                      precision, pt.phi, precision, pt.err);
        os << buf;
    }
    return os.str();
}

/// One row per chain plus an aggregate row.
inline std::string path_stats_csv(const PathStats& stats) {
    std::ostringstream os;
    const int n = static_cast<int>(stats.frequencies.size());
    os << "chain,steps,minus_log_ratio_over_n,birkhoff_mean";
    for (int i = 0; i < n; ++i) os << ",freq_" << i;
    os << "\n";
    char buf[64];
    for (std::size_t c = 0; c < stats.per_chain.size(); ++c) {
        const auto& st = stats.per_chain[c];
        os << c << "," << st.steps;
        std::snprintf(buf, sizeof(buf), ",%.12g", st.minus_log_ratio_over_n());
        os << buf;
        std::snprintf(buf, sizeof(buf), ",%.12g", st.birkhoff_mean());
        os << buf;
        for (int i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf), ",%.12g",
                          static_cast<double>(st.counts[static_cast<std::size_t>(i)]) /
                              static_cast<double>(st.steps));
            os << buf;
        }
        os << "\n";
    }
    os << "aggregate," << stats.total_steps;
    std::snprintf(buf, sizeof(buf), ",%.12g", stats.log_ratio.mean);
    os << buf;
    std::snprintf(buf, sizeof(buf), ",%.12g", stats.birkhoff.mean);
    os << buf;
    for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), ",%.12g",
                      stats.frequencies[static_cast<std::size_t>(i)]);
        os << buf;
    }
    os << "\n";
    return os.str();
}

/**
 * Deterministic SVG polyline of a monotone sample: viewBox 0 0 1000 1000,
 * y axis flipped so the curve runs bottom-left to top-right, coordinates
 * printed with exactly four decimals. Byte-identical for identical input.
 */
inline std::string phi_sample_svg(const PhiSample& sample) {
    for (std::size_t k = 1; k < sample.pts.size(); ++k)
        if (sample.pts[k].phi < sample.pts[k - 1].phi - 1e-12)
            throw std::invalid_argument("phi_sample_svg: sample not monotone");

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\">\n";
    os << "  <rect width=\"1000\" height=\"1000\" fill=\"white\"/>\n";
    os << "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"";
    char buf[48];
    for (std::size_t k = 0; k < sample.pts.size(); ++k) {
        if (k) os << " ";
        std::snprintf(buf, sizeof(buf), "%.4f,%.4f", 1000.0 * sample.pts[k].x,
                      1000.0 * (1.0 - sample.pts[k].phi));
        os << buf;
    }
    os << "\"/>\n</svg>\n";
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out.good()) throw std::runtime_error("write failed: " + path);
}

}  // namespace conjkit
