#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace efmrf {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    // Fixed y range; the x range comes from the data.
    double y_min = 0.0;
    double y_max = 1.0;
};

// Standalone SVG line chart with markers, axes, ticks and a legend. Output is
// a pure function of the inputs (fixed-precision coordinates).
void write_line_plot(std::ostream& os, const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace efmrf
