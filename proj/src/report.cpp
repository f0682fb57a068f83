#include "singlim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace singlim::report {
namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape_xml(const std::string& s) {
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

std::string short_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

}  // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) {
        throw std::invalid_argument("CsvTable: row width does not match the header");
    }
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) out << ',';
            out << cells[k];
        }
        out << '\n';
    };
    line(header_);
    for (const auto& row : rows_) line(row);
    return out.str();
}

std::string svg_line_plot(const std::vector<Series>& series, const PlotOptions& options) {
    const double left = 80, right = 160, top = 40, bottom = 60;
    const double w = options.width, h = options.height;
    const double pw = w - left - right, ph = h - top - bottom;

    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!options.log_y || y > 0.0);
    };
    auto ty = [&](double y) { return options.log_y ? std::log10(y) : y; };

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
            if (!usable(s.x[k], s.y[k])) continue;
            x0 = std::min(x0, s.x[k]);
            x1 = std::max(x1, s.x[k]);
            y0 = std::min(y0, ty(s.y[k]));
            y1 = std::max(y1, ty(s.y[k]));
        }
    }
    if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << escape_xml(options.title) << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int k = 0; k <= 4; ++k) {
        const double fx = x0 + (x1 - x0) * k / 4.0;
        const double fy = y0 + (y1 - y0) * k / 4.0;
        const double sx = left + pw * k / 4.0;
        const double sy = top + ph * (1.0 - k / 4.0);
        out << "<text x=\"" << sx << "\" y=\"" << top + ph + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << short_number(fx) << "</text>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << sy + 4
            << "\" text-anchor=\"end\" font-size=\"11\">"
            << short_number(options.log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
    }
    out << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 16
        << "\" text-anchor=\"middle\" font-size=\"13\">" << escape_xml(options.x_label)
        << "</text>\n";
    out << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << top + ph / 2 << ")\">" << escape_xml(options.y_label)
        << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& data = series[s];
        const char* colour = kPalette[s % std::size(kPalette)];
        std::ostringstream points;
        auto flush = [&] {
            if (points.tellp() > 0) {
                out << "<polyline fill=\"none\" stroke=\"" << colour
                    << "\" stroke-width=\"1.5\" points=\"" << points.str() << "\"/>\n";
            }
            points.str("");
            points.clear();
        };
        for (std::size_t k = 0; k < std::min(data.x.size(), data.y.size()); ++k) {
            if (!usable(data.x[k], data.y[k])) {
                flush();
                continue;
            }
            if (points.tellp() > 0) points << ' ';
            points << short_number(px(data.x[k])) << ',' << short_number(py(data.y[k]));
        }
        flush();
        const double ly = top + 16.0 + 18.0 * s;
        out << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36
            << "\" y2=\"" << ly << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
            << escape_xml(data.name) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace singlim::report
