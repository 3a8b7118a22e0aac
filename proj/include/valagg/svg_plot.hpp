#pragma once

#include <string>
#include <vector>

namespace valagg {

enum class PlotScale { loglog, linear };

struct PlotSeries {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
    bool is_envelope = false;  // dashed theoretical curve
};

/// Renders a standalone SVG 1.1 document with axes, tick labels, one
/// polyline per series and a legend. Log-scaled axes drop nonpositive
/// points. No plotting dependency: scales and paths are computed here.
std::string render_plot_svg(const std::vector<PlotSeries>& series, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            PlotScale scale);

}  // namespace valagg
