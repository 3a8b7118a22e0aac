#include "valagg/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace valagg {

namespace {

constexpr double kWidth = 840.0;
constexpr double kHeight = 560.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void grow(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
};

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

std::string render_plot_svg(const std::vector<PlotSeries>& series, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            PlotScale scale) {
    const bool logscale = scale == PlotScale::loglog;
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!logscale || (x > 0.0 && y > 0.0));
    };
    auto tx = [&](double v) { return logscale ? std::log10(v) : v; };

    Range xr, yr;
    std::size_t total_points = 0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.xs.size(); ++i)
            if (usable(s.xs[i], s.ys[i])) {
                xr.grow(tx(s.xs[i]));
                yr.grow(tx(s.ys[i]));
                ++total_points;
            }
    if (total_points == 0) throw std::runtime_error("render_plot_svg: no plottable points");
    if (xr.hi - xr.lo < 1e-12) {
        xr.lo -= 0.5;
        xr.hi += 0.5;
    }
    if (yr.hi - yr.lo < 1e-12) {
        yr.lo -= 0.5;
        yr.hi += 0.5;
    }

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (tx(v) - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto py = [&](double v) { return kTop + plot_h - (tx(v) - yr.lo) / (yr.hi - yr.lo) * plot_h; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
       << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"28\" font-size=\"16\" text-anchor=\"middle\">"
       << title << "</text>\n";

    // frame
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
       << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";

    // ticks
    auto draw_tick = [&](double frac, double value, bool x_axis) {
        if (x_axis) {
            const double x = kLeft + frac * plot_w;
            os << "<line x1=\"" << x << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << x
               << "\" y2=\"" << kTop + plot_h + 6 << "\" stroke=\"black\"/>\n";
            os << "<text x=\"" << x << "\" y=\"" << kTop + plot_h + 22
               << "\" font-size=\"11\" text-anchor=\"middle\">"
               << (logscale ? "1e" + num(value) : num(value)) << "</text>\n";
        } else {
            const double y = kTop + plot_h - frac * plot_h;
            os << "<line x1=\"" << kLeft - 6 << "\" y1=\"" << y << "\" x2=\"" << kLeft
               << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
            os << "<text x=\"" << kLeft - 10 << "\" y=\"" << y + 4
               << "\" font-size=\"11\" text-anchor=\"end\">"
               << (logscale ? "1e" + num(value) : num(value)) << "</text>\n";
        }
    };
    for (int i = 0; i <= 5; ++i) {
        const double f = static_cast<double>(i) / 5.0;
        draw_tick(f, xr.lo + f * (xr.hi - xr.lo), true);
        draw_tick(f, yr.lo + f * (yr.hi - yr.lo), false);
    }

    os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 18
       << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label << "</text>\n";
    os << "<text x=\"22\" y=\"" << kTop + plot_h / 2
       << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 22 "
       << kTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

    // series polylines
    std::size_t color_idx = 0;
    for (const auto& s : series) {
        std::ostringstream pts;
        for (std::size_t i = 0; i < s.xs.size(); ++i)
            if (usable(s.xs[i], s.ys[i])) pts << px(s.xs[i]) << "," << py(s.ys[i]) << " ";
        const std::string color = kColors[color_idx % (sizeof(kColors) / sizeof(kColors[0]))];
        ++color_idx;
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
           << (s.is_envelope ? 1.5 : 2.0) << "\""
           << (s.is_envelope ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts.str()
           << "\"/>\n";
    }

    // legend
    double ly = kTop + 14;
    color_idx = 0;
    for (const auto& s : series) {
        const std::string color = kColors[color_idx % (sizeof(kColors) / sizeof(kColors[0]))];
        ++color_idx;
        os << "<line x1=\"" << kLeft + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + 40
           << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\""
           << (s.is_envelope ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        os << "<text x=\"" << kLeft + 46 << "\" y=\"" << ly << "\" font-size=\"12\">" << s.label
           << "</text>\n";
        ly += 16;
    }

    os << "</svg>\n";
    return os.str();
}

}  // namespace valagg
