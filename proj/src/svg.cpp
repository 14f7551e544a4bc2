#include "auxfm/svg.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>
#include <sstream>

#include "auxfm/error.hpp"

namespace auxfm {

namespace {

constexpr std::array<const char*, 16> kPalette{
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#e7ba52", "#637939", "#ad494a", "#7b4173", "#3182bd",
};

struct Box {
    double x0 = std::numeric_limits<double>::infinity();
    double y0 = std::numeric_limits<double>::infinity();
    double x1 = -std::numeric_limits<double>::infinity();
    double y1 = -std::numeric_limits<double>::infinity();

    void add(double x, double y) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    void add_rows(const Tensor& t) {
        for (std::size_t r = 0; r < t.rows(); ++r) add(t(r, 0), t.cols() > 1 ? t(r, 1) : 0.0);
    }
    // Pads by 10% per side; a degenerate box gets unit extent.
    void pad() {
        if (!(x0 <= x1)) {
            x0 = y0 = -1.0;
            x1 = y1 = 1.0;
        }
        double w = x1 - x0;
        double h = y1 - y0;
        if (w == 0.0) w = 1.0;
        if (h == 0.0) h = 1.0;
        x0 -= 0.1 * w;
        x1 += 0.1 * w;
        y0 -= 0.1 * h;
        y1 += 0.1 * h;
    }
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// SVG's y axis points down, so y is mirrored about the box.
double flip(const Box& b, double y) { return b.y0 + b.y1 - y; }

void open_svg(std::ostringstream& out, const Box& b) {
    const double stroke = 0.004 * std::max(b.width(), b.height());
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"" << num(b.x0) << ' '
        << num(b.y0) << ' ' << num(b.width()) << ' ' << num(b.height()) << "\" preserveAspectRatio=\"xMidYMid meet\">\n"
        << "<rect x=\"" << num(b.x0) << "\" y=\"" << num(b.y0) << "\" width=\"" << num(b.width()) << "\" height=\""
        << num(b.height()) << "\" fill=\"white\"/>\n"
        << "<g stroke-width=\"" << num(stroke) << "\">\n";
}

void check_labels(std::span<const int> labels, std::size_t rows) {
    if (!labels.empty() && labels.size() != rows) {
        throw ShapeError("plot: " + std::to_string(labels.size()) + " labels for " + std::to_string(rows) + " rows");
    }
}

}  // namespace

const char* label_color(int label) {
    if (label < 0) return "#999999";
    return kPalette[static_cast<std::size_t>(label) % kPalette.size()];
}

std::string trajectories_svg(const Trajectory& traj, std::span<const int> labels) {
    if (traj.states.empty()) throw DomainError("cannot plot an empty trajectory");
    const std::size_t batch = traj.states.front().rows();
    check_labels(labels, batch);
    Box box;
    for (const Tensor& s : traj.states) box.add_rows(s);
    box.pad();
    std::ostringstream out;
    open_svg(out, box);
    for (std::size_t i = 0; i < batch; ++i) {
        out << "<polyline fill=\"none\" stroke-opacity=\"0.6\" stroke=\""
            << label_color(labels.empty() ? kNullLabel : labels[i]) << "\" points=\"";
        for (std::size_t s = 0; s < traj.states.size(); ++s) {
            const Tensor& st = traj.states[s];
            if (s > 0) out << ' ';
            out << num(st(i, 0)) << ',' << num(flip(box, st.cols() > 1 ? st(i, 1) : 0.0));
        }
        out << "\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

std::string scatter_svg(const Tensor& points, std::span<const int> labels, const Tensor* centers) {
    check_labels(labels, points.rows());
    Box box;
    box.add_rows(points);
    if (centers != nullptr) box.add_rows(*centers);
    box.pad();
    const double r = 0.006 * std::max(box.width(), box.height());
    std::ostringstream out;
    open_svg(out, box);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        out << "<circle cx=\"" << num(points(i, 0)) << "\" cy=\""
            << num(flip(box, points.cols() > 1 ? points(i, 1) : 0.0)) << "\" r=\"" << num(r) << "\" fill=\""
            << label_color(labels.empty() ? kNullLabel : labels[i]) << "\" fill-opacity=\"0.7\"/>\n";
    }
    if (centers != nullptr) {
        for (std::size_t k = 0; k < centers->rows(); ++k) {
            const double cx = (*centers)(k, 0);
            const double cy = flip(box, centers->cols() > 1 ? (*centers)(k, 1) : 0.0);
            out << "<path stroke=\"black\" d=\"M" << num(cx - 2 * r) << ',' << num(cy) << " H" << num(cx + 2 * r)
                << " M" << num(cx) << ',' << num(cy - 2 * r) << " V" << num(cy + 2 * r) << "\"/>\n";
        }
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

}  // namespace auxfm
