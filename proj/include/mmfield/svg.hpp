#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace mmfield::svg {

/// Minimal SVG writer with a fixed 800x800 viewport. Coordinates are
/// printed with two decimals so output is byte-stable.
class Canvas {
public:
    static constexpr double size = 800.0;

    Canvas() {
        out_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
        out_ += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"white\"/>\n";
    }

    void circle(double x, double y, double r, int gray, const char* stroke = "none") {
        out_ += "<circle cx=\"" + fmt(x) + "\" cy=\"" + fmt(y) + "\" r=\"" + fmt(r) + "\" fill=\"" + grey(gray) +
                "\" stroke=\"" + stroke + "\" stroke-width=\"0.5\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, int gray, double width = 1.0) {
        out_ += "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) + "\" y2=\"" + fmt(y2) +
                "\" stroke=\"" + grey(gray) + "\" stroke-width=\"" + fmt(width) + "\"/>\n";
    }

    void polygon(const std::vector<std::pair<double, double>>& pts, int gray, double opacity = 1.0) {
        std::string p;
        for (const auto& [x, y] : pts) p += fmt(x) + "," + fmt(y) + " ";
        if (!p.empty()) p.pop_back();
        out_ += "<polygon points=\"" + p + "\" fill=\"" + grey(gray) + "\" fill-opacity=\"" + fmt(opacity) + "\" stroke=\"none\"/>\n";
    }

    void rect(double x, double y, double w, double h, int gray) {
        out_ += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
                "\" fill=\"none\" stroke=\"" + grey(gray) + "\" stroke-width=\"1\"/>\n";
    }

    void text(double x, double y, const std::string& s, int px = 14) {
        out_ += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-family=\"sans-serif\" font-size=\"" + std::to_string(px) +
                "\">" + s + "</text>\n";
    }

    std::string str() const { return out_ + "</svg>\n"; }

    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return buf;
    }

    /// 0 = black, 255 = white.
    static std::string grey(int g) {
        g = std::clamp(g, 0, 255);
        char buf[16];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", g, g, g);
        return buf;
    }

private:
    std::string out_;
};

/// Affine map from a data box onto a panel rectangle, preserving aspect.
struct Frame {
    double x0, y0, x1, y1;  ///< data box
    double px, py, pw, ph;  ///< panel box in pixels

    std::pair<double, double> operator()(double x, double y) const {
        const double sx = pw / (x1 - x0), sy = ph / (y1 - y0);
        const double s = std::min(sx, sy);
        const double ox = px + 0.5 * (pw - s * (x1 - x0));
        const double oy = py + 0.5 * (ph - s * (y1 - y0));
        return {ox + s * (x - x0), oy + s * (y1 - y)};
    }

    double scale() const { return std::min(pw / (x1 - x0), ph / (y1 - y0)); }
};

}  // namespace mmfield::svg
