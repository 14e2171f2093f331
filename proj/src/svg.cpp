#include "efmrf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <limits>
#include <ostream>

namespace efmrf {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    if (std::abs(v) >= 1000.0 || (std::abs(v - std::round(v)) < 1e-9 && std::abs(v) >= 1.0)) {
        std::snprintf(buf, sizeof buf, "%.0f", v);
    } else {
        std::snprintf(buf, sizeof buf, "%.3g", v);
    }
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_line_plot(std::ostream& os, const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    double xlo = std::numeric_limits<double>::infinity();
    double xhi = -xlo;
    for (const auto& s : series) {
        for (double x : s.x) {
            if (spec.log_x && !(x > 0.0)) continue;
            const double v = spec.log_x ? std::log10(x) : x;
            xlo = std::min(xlo, v);
            xhi = std::max(xhi, v);
        }
    }
    const bool empty = !(xlo <= xhi);
    if (empty) {
        xlo = 0.0;
        xhi = 1.0;
    } else if (xhi - xlo < 1e-12) {
        xlo -= 0.5;
        xhi += 0.5;
    }
    const double ylo = spec.y_min;
    const double yhi = spec.y_max > spec.y_min ? spec.y_max : spec.y_min + 1.0;

    auto px = [&](double x) { return kLeft + ((spec.log_x ? std::log10(x) : x) - xlo) / (xhi - xlo) * plot_w; };
    auto py = [&](double y) { return kTop + (1.0 - (std::clamp(y, ylo, yhi) - ylo) / (yhi - ylo)) * plot_h; };

    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(kHeight)
       << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(kHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << escape(spec.title) << "</text>\n";

    // axes
    os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop + plot_h) << "\" x2=\"" << fmt(kLeft + plot_w)
       << "\" y2=\"" << fmt(kTop + plot_h) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
       << fmt(kTop + plot_h) << "\" stroke=\"black\"/>\n";

    for (int k = 0; k <= 5; ++k) {
        const double y = ylo + (yhi - ylo) * k / 5.0;
        const double yy = py(y);
        os << "<line x1=\"" << fmt(kLeft - 4) << "\" y1=\"" << fmt(yy) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
           << fmt(yy) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(yy + 4) << "\" text-anchor=\"end\">"
           << tick_label(y) << "</text>\n";
    }
    for (int k = 0; k <= 5; ++k) {
        const double v = xlo + (xhi - xlo) * k / 5.0;
        const double xx = kLeft + (v - xlo) / (xhi - xlo) * plot_w;
        const double label = spec.log_x ? std::pow(10.0, v) : v;
        os << "<line x1=\"" << fmt(xx) << "\" y1=\"" << fmt(kTop + plot_h) << "\" x2=\"" << fmt(xx) << "\" y2=\""
           << fmt(kTop + plot_h + 4) << "\" stroke=\"black\"/>\n";
        if (!empty) {
            os << "<text x=\"" << fmt(xx) << "\" y=\"" << fmt(kTop + plot_h + 18) << "\" text-anchor=\"middle\">"
               << tick_label(label) << "</text>\n";
        }
    }
    os << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\"" << fmt(kHeight - 15) << "\" text-anchor=\"middle\">"
       << escape(spec.x_label) << "</text>\n";
    os << "<text x=\"18\" y=\"" << fmt(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << fmt(kTop + plot_h / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % std::size(kColors)];
        std::string points;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (spec.log_x && !(s.x[i] > 0.0)) continue;
            if (!points.empty()) points += ' ';
            points += fmt(px(s.x[i])) + ',' + fmt(py(s.y[i]));
        }
        if (!points.empty()) {
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
        }
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (spec.log_x && !(s.x[i] > 0.0)) continue;
            os << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i])) << "\" r=\"3\" fill=\"" << color
               << "\"/>\n";
        }
        const double ly = kTop + 10 + 20.0 * static_cast<double>(k);
        const double lx = kLeft + plot_w + 15;
        os << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 20) << "\" y2=\"" << fmt(ly)
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << fmt(lx + 26) << "\" y=\"" << fmt(ly + 4) << "\">" << escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace efmrf
