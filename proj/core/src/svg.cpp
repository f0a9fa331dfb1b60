#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace boga::svgplot {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 160.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 55.0;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr int kPaletteSize = 10;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Extent {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void pad() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double margin = 0.04 * (hi - lo);
        lo -= margin;
        hi += margin;
    }
};

struct Mapper {
    Extent x, y;

    double px(double v) const {
        return kMarginLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kMarginLeft - kMarginRight);
    }
    double py(double v) const {
        return kHeight - kMarginBottom -
               (v - y.lo) / (y.hi - y.lo) * (kHeight - kMarginTop - kMarginBottom);
    }
};

void open_svg(std::ofstream& out, const std::vector<std::string>& comments) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    for (const auto& c : comments) out << "<!-- " << escape(c) << " -->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void draw_axes(std::ofstream& out, const Mapper& m, const std::string& title,
               const std::string& xlabel, const std::string& ylabel) {
    const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
    const double y0 = kHeight - kMarginBottom, y1 = kMarginTop;
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = m.x.lo + (m.x.hi - m.x.lo) * i / 5.0;
        const double fy = m.y.lo + (m.y.hi - m.y.lo) * i / 5.0;
        const double px = m.px(fx);
        const double py = m.py(fy);
        out << "<line x1=\"" << px << "\" y1=\"" << y0 << "\" x2=\"" << px << "\" y2=\""
            << y0 + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px << "\" y=\"" << y0 + 20
            << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(fx) << "</text>\n";
        out << "<line x1=\"" << x0 - 5 << "\" y1=\"" << py << "\" x2=\"" << x0 << "\" y2=\"" << py
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << x0 - 8 << "\" y=\"" << py + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(fy) << "</text>\n";
    }
    out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 15
        << "\" font-size=\"13\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
    out << "<text x=\"18\" y=\"" << (y0 + y1) / 2
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << (y0 + y1) / 2 << ")\">" << escape(ylabel) << "</text>\n";
    out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"22\" font-size=\"15\" "
        << "text-anchor=\"middle\" font-weight=\"bold\">" << escape(title) << "</text>\n";
}

void draw_legend(std::ofstream& out, const std::vector<std::string>& labels) {
    const double lx = kWidth - kMarginRight + 12.0;
    double ly = kMarginTop + 10.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const char* color = kPalette[i % kPaletteSize];
        out << "<rect x=\"" << lx << "\" y=\"" << ly - 9 << "\" width=\"14\" height=\"4\" fill=\""
            << color << "\"/>\n";
        out << "<text x=\"" << lx + 20 << "\" y=\"" << ly - 3 << "\" font-size=\"12\">"
            << escape(labels[i]) << "</text>\n";
        ly += 18.0;
    }
}

} // namespace

void write_line_plot(const std::filesystem::path& path, const LinePlot& plot) {
    std::ofstream out(path, std::ios::trunc);
    Mapper m;
    for (const auto& s : plot.series) {
        for (double v : s.x) m.x.include(v);
        for (double v : s.y) m.y.include(v);
    }
    m.x.pad();
    m.y.pad();
    open_svg(out, plot.comments);
    draw_axes(out, m, plot.title, plot.xlabel, plot.ylabel);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < plot.series.size(); ++i) {
        const auto& s = plot.series[i];
        const char* color = kPalette[i % kPaletteSize];
        labels.push_back(s.label);
        if (s.scatter) {
            for (std::size_t k = 0; k < s.x.size(); ++k)
                out << "<circle cx=\"" << fmt(m.px(s.x[k])) << "\" cy=\"" << fmt(m.py(s.y[k]))
                    << "\" r=\"2\" fill=\"" << color << "\" fill-opacity=\"0.45\"/>\n";
            continue;
        }
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (k > 0) out << " ";
            out << fmt(m.px(s.x[k])) << "," << fmt(m.py(s.y[k]));
        }
        out << "\"/>\n";
    }
    draw_legend(out, labels);
    out << "</svg>\n";
}

void write_histogram_plot(const std::filesystem::path& path, const HistogramPlot& plot) {
    std::ofstream out(path, std::ios::trunc);
    Extent range;
    for (const auto& g : plot.groups)
        for (double v : g.values) range.include(v);
    range.pad();

    const int bins = std::max(1, plot.bins);
    std::vector<std::vector<double>> counts(plot.groups.size(), std::vector<double>(bins, 0.0));
    double max_count = 1.0;
    for (std::size_t g = 0; g < plot.groups.size(); ++g) {
        for (double v : plot.groups[g].values) {
            int b = static_cast<int>((v - range.lo) / (range.hi - range.lo) * bins);
            b = std::clamp(b, 0, bins - 1);
            counts[g][static_cast<std::size_t>(b)] += 1.0;
        }
        for (double c : counts[g]) max_count = std::max(max_count, c);
    }

    Mapper m;
    m.x = range;
    m.y.lo = 0.0;
    m.y.hi = max_count * 1.05;
    open_svg(out, plot.comments);
    draw_axes(out, m, plot.title, plot.xlabel, "count");

    std::vector<std::string> labels;
    for (std::size_t g = 0; g < plot.groups.size(); ++g) {
        labels.push_back(plot.groups[g].label);
        const char* color = kPalette[g % kPaletteSize];
        // Outlined step profile so that overlapping groups stay readable.
        out << "<polyline fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        out << fmt(m.px(range.lo)) << "," << fmt(m.py(0.0));
        for (int b = 0; b < bins; ++b) {
            const double xl = range.lo + (range.hi - range.lo) * b / bins;
            const double xr = range.lo + (range.hi - range.lo) * (b + 1) / bins;
            const double c = counts[g][static_cast<std::size_t>(b)];
            out << " " << fmt(m.px(xl)) << "," << fmt(m.py(c));
            out << " " << fmt(m.px(xr)) << "," << fmt(m.py(c));
        }
        out << " " << fmt(m.px(range.hi)) << "," << fmt(m.py(0.0)) << "\"/>\n";
    }
    draw_legend(out, labels);
    out << "</svg>\n";
}

} // namespace boga::svgplot
