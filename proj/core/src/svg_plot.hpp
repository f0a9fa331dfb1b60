#pragma once

// Minimal standalone SVG plotting used by the report writer. No display
// dependency; output is deterministic for identical input.

#include <filesystem>
#include <string>
#include <vector>

namespace boga::svgplot {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool scatter = false;
};

struct LinePlot {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<Series> series;
    std::vector<std::string> comments; // embedded provenance
};

void write_line_plot(const std::filesystem::path& path, const LinePlot& plot);

struct HistogramGroup {
    std::string label;
    std::vector<double> values;
};

struct HistogramPlot {
    std::string title;
    std::string xlabel;
    std::vector<HistogramGroup> groups;
    std::vector<std::string> comments;
    int bins = 20;
};

void write_histogram_plot(const std::filesystem::path& path, const HistogramPlot& plot);

} // namespace boga::svgplot
