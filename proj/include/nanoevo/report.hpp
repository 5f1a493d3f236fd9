#pragma once

#include "nanoevo/runner.hpp"
#include "nanoevo/ssa.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace nanoevo::report {

/// Shortest round-trip decimal form, '.' separator regardless of locale.
inline std::string format_number(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string format_number(long long v)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string format_number(int v) { return format_number(static_cast<long long>(v)); }
inline std::string format_number(long v) { return format_number(static_cast<long long>(v)); }

/// Fixed-point form used for SVG coordinates.
inline std::string fixed(double v, int precision = 2)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
    return std::string(buf, r.ptr);
}

// stats.csv / timeseries.csv
inline void write_stats_csv(std::ostream& os, const std::vector<RunStats>& stats)
{
    os << "step,time_s,alive_cc,alive_hc,free,bound,internalized,spent,kills_cc,kills_hc,injected,cleared";
    for (const char* f : kGenomeFields)
        os << ",mean_" << f << ",sd_" << f;
    os << ",best_fitness,median_fitness\n";
    for (const auto& s : stats) {
        os << s.step << ',' << format_number(s.time_s) << ',' << s.alive_cc << ',' << s.alive_hc << ',' << s.free << ','
           << s.bound << ',' << s.internalized << ',' << s.spent << ',' << s.kills_cc << ',' << s.kills_hc << ','
           << s.injected << ',' << s.cleared;
        for (std::size_t i = 0; i < s.genome_mean.size(); ++i)
            os << ',' << format_number(s.genome_mean[i]) << ',' << format_number(s.genome_sd[i]);
        os << ',' << s.best_fitness << ',' << format_number(s.median_fitness) << '\n';
    }
}

// trajectory.csv, one row per (sample, compartment)
inline void write_trajectory_csv(std::ostream& os, const ssa::Trajectory& traj)
{
    os << "time_s,compartment,np_free,receptors_free,complexes,np_internal,cell_alive\n";
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        const auto& st = traj.states[s];
        for (std::size_t i = 0; i < st.np_free.size(); ++i)
            os << format_number(traj.times[s]) << ',' << i << ',' << format_number(st.np_free[i]) << ','
               << format_number(st.receptors_free[i]) << ',' << format_number(st.complexes[i]) << ','
               << format_number(st.np_internal[i]) << ',' << format_number(st.cell_alive[i]) << '\n';
    }
}

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string colour = "#1f77b4";
};

namespace detail {
inline void svg_open(std::ostream& os, int w, int h, const std::string& title)
{
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << w / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
}
} // namespace detail

inline void svg_line_plot(std::ostream& os, const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<Series>& series)
{
    constexpr int W = 640, H = 400, L = 60, R = 140, T = 30, B = 45;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    bool first = true;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                x0 = x1 = s.x[i];
                y0 = y1 = s.y[i];
                first = false;
            }
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (x1 <= x0)
        x1 = x0 + 1;
    if (y1 <= y0)
        y1 = y0 + 1;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    detail::svg_open(os, W, H, title);
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << L << "\" y=\"" << H - B + 14 << "\">" << fixed(x0, 1) << "</text>\n";
    os << "<text x=\"" << W - R << "\" y=\"" << H - B + 14 << "\" text-anchor=\"end\">" << fixed(x1, 1) << "</text>\n";
    os << "<text x=\"" << L - 4 << "\" y=\"" << H - B << "\" text-anchor=\"end\">" << fixed(y0, 1) << "</text>\n";
    os << "<text x=\"" << L - 4 << "\" y=\"" << T + 8 << "\" text-anchor=\"end\">" << fixed(y1, 1) << "</text>\n";
    os << "<text x=\"" << (W - R + L) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    os << "<text x=\"14\" y=\"" << (H - B + T) / 2 << "\" transform=\"rotate(-90 14," << (H - B + T) / 2
       << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
    int legend_y = T + 10;
    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << fixed(px(s.x[i])) << ',' << fixed(py(s.y[i])) << ' ';
        os << "\"/>\n";
        os << "<text x=\"" << W - R + 10 << "\" y=\"" << legend_y << "\" fill=\"" << s.colour << "\">" << s.label
           << "</text>\n";
        legend_y += 16;
    }
    os << "</svg>\n";
}

/// One histogram panel per named sample, each over [lo, hi] with `bins` bins.
struct HistogramPanel {
    std::string label;
    std::vector<double> values;
    double lo = 0.0;
    double hi = 1.0;
};

inline void svg_histograms(std::ostream& os, const std::string& title, const std::vector<HistogramPanel>& panels,
                           int bins = 20)
{
    constexpr int PW = 220, PH = 160, GAP = 20, T = 30;
    const int cols = 3;
    const int rows = static_cast<int>((panels.size() + cols - 1) / cols);
    const int W = cols * (PW + GAP) + GAP;
    const int H = T + rows * (PH + GAP + 20) + GAP;
    detail::svg_open(os, W, H, title);
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const auto& panel = panels[p];
        const int ox = GAP + static_cast<int>(p % cols) * (PW + GAP);
        const int oy = T + 20 + static_cast<int>(p / cols) * (PH + GAP + 20);
        std::vector<int> counts(static_cast<std::size_t>(bins), 0);
        const double width = panel.hi > panel.lo ? panel.hi - panel.lo : 1.0;
        for (const double v : panel.values) {
            auto b = static_cast<int>(std::floor((v - panel.lo) / width * bins));
            counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))]++;
        }
        const int peak = std::max(1, *std::max_element(counts.begin(), counts.end()));
        os << "<text x=\"" << ox << "\" y=\"" << oy - 4 << "\">" << panel.label << " [" << fixed(panel.lo, 1) << ", "
           << fixed(panel.hi, 1) << "]</text>\n";
        os << "<rect x=\"" << ox << "\" y=\"" << oy << "\" width=\"" << PW << "\" height=\"" << PH
           << "\" fill=\"none\" stroke=\"#444\"/>\n";
        const double bw = static_cast<double>(PW) / bins;
        for (int b = 0; b < bins; ++b) {
            const double h = static_cast<double>(counts[static_cast<std::size_t>(b)]) / peak * (PH - 4);
            os << "<rect x=\"" << fixed(ox + b * bw) << "\" y=\"" << fixed(oy + PH - h) << "\" width=\"" << fixed(bw)
               << "\" height=\"" << fixed(h) << "\" fill=\"#4c72b0\"/>\n";
        }
    }
    os << "</svg>\n";
}

/// Rows are samples in time, columns compartments; colour is log10 of the value.
inline void svg_heatmap(std::ostream& os, const std::string& title, const std::vector<double>& times,
                        const std::vector<std::vector<double>>& values)
{
    constexpr int L = 70, T = 30, B = 40, CW = 24, RH = 6;
    const std::size_t ncols = values.empty() ? 0 : values.front().size();
    const int W = L + static_cast<int>(ncols) * CW + 20;
    const int H = T + static_cast<int>(values.size()) * RH + B;
    double vmax = 0.0;
    for (const auto& row : values)
        for (const double v : row)
            vmax = std::max(vmax, v);
    const double lmax = std::log10(std::max(vmax, 1.0) + 1.0);
    detail::svg_open(os, W, H, title);
    for (std::size_t r = 0; r < values.size(); ++r) {
        for (std::size_t c = 0; c < ncols; ++c) {
            const double f = lmax > 0 ? std::log10(values[r][c] + 1.0) / lmax : 0.0;
            const int shade = 255 - static_cast<int>(std::lround(f * 235));
            os << "<rect x=\"" << L + static_cast<int>(c) * CW << "\" y=\"" << T + static_cast<int>(r) * RH
               << "\" width=\"" << CW << "\" height=\"" << RH << "\" fill=\"rgb(" << shade << ',' << shade
               << ",255)\"/>\n";
        }
    }
    if (!times.empty()) {
        os << "<text x=\"" << L - 4 << "\" y=\"" << T + RH << "\" text-anchor=\"end\">" << fixed(times.front() / 3600.0, 1)
           << " h</text>\n";
        os << "<text x=\"" << L - 4 << "\" y=\"" << T + static_cast<int>(values.size()) * RH
           << "\" text-anchor=\"end\">" << fixed(times.back() / 3600.0, 1) << " h</text>\n";
    }
    for (std::size_t c = 0; c < ncols; c += 5)
        os << "<text x=\"" << L + static_cast<int>(c) * CW + CW / 2 << "\" y=\"" << H - B + 14
           << "\" text-anchor=\"middle\">" << c + 1 << "</text>\n";
    os << "<text x=\"" << L + static_cast<int>(ncols) * CW / 2 << "\" y=\"" << H - 8
       << "\" text-anchor=\"middle\">cell depth from vessel</text>\n";
    os << "</svg>\n";
}

} // namespace nanoevo::report
