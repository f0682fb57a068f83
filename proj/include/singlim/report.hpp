#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace singlim::report {

/// %.17g; non-finite values print as inf, -inf or nan.
std::string format_number(double x);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    std::size_t rows() const noexcept { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    int width = 720;
    int height = 480;
};

/// Line plot built from SVG polylines. Non-finite points (and nonpositive
/// ones on a log axis) break the line.
std::string svg_line_plot(const std::vector<Series>& series, const PlotOptions& options);

/// Writes the whole file or throws std::runtime_error.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace singlim::report
