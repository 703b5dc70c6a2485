// Minimal self-contained SVG line/histogram plots. No external assets;
// a plot is a single string written with save_text.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "snls/common.hpp"
#include "snls/io.hpp"
#include "snls/stats.hpp"

namespace snls {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;
    bool dashed = false;
};

class SvgPlot {
  public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

    void set_log_x(bool v) { logx_ = v; }
    void set_log_y(bool v) { logy_ = v; }
    void set_comment(std::string c) { comment_ = std::move(c); }

    void add_line(const std::string& label, const std::vector<double>& x,
                  const std::vector<double>& y, bool dashed = false) {
        if (x.size() != y.size()) throw Error("svg: series size mismatch for " + label);
        series_.push_back({label, x, y, pick_color(series_.size()), dashed});
    }

    // bars on [edges[i], edges[i+1]) with the given heights
    void add_histogram(const std::string& label, const std::vector<double>& edges,
                       const std::vector<double>& heights) {
        if (edges.size() != heights.size() + 1 || heights.empty())
            throw Error("svg: bad histogram shape for " + label);
        bars_ = {label, edges, heights, "#7aa6c2", false};
        has_bars_ = true;
    }

    std::string render() const {
        Range rx, ry;
        accumulate_range(rx, ry);
        if (!std::isfinite(rx.lo) || !std::isfinite(ry.lo)) throw Error("svg: nothing to plot");
        pad(rx, logx_);
        pad(ry, logy_);

        std::string s;
        s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) +
             "\" height=\"" + std::to_string(H) + "\" viewBox=\"0 0 " + std::to_string(W) + " " +
             std::to_string(H) + "\">\n";
        if (!comment_.empty()) s += "<!-- " + comment_ + " -->\n";
        s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
        s += text(W / 2, 24, title_, 16, "middle", true);
        s += text(ML + plot_w() / 2, H - 8, xlabel_, 12, "middle", false);
        s += "<text x=\"16\" y=\"" + num(MT + plot_h() / 2) +
             "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 16 " +
             num(MT + plot_h() / 2) + ")\">" + escape(ylabel_) + "</text>\n";

        for (double t : ticks(rx, logx_)) {
            double px = sx(t, rx);
            s += line(px, MT, px, MT + plot_h(), "#e0e0e0", 1, false);
            s += text(px, MT + plot_h() + 16, tick_label(t), 10, "middle", false);
        }
        for (double t : ticks(ry, logy_)) {
            double py = sy(t, ry);
            s += line(ML, py, ML + plot_w(), py, "#e0e0e0", 1, false);
            s += text(ML - 6, py + 3, tick_label(t), 10, "end", false);
        }
        s += "<rect x=\"" + num(ML) + "\" y=\"" + num(MT) + "\" width=\"" + num(plot_w()) +
             "\" height=\"" + num(plot_h()) + "\" fill=\"none\" stroke=\"#404040\"/>\n";

        if (has_bars_) {
            for (std::size_t i = 0; i < bars_.y.size(); ++i) {
                if (bars_.y[i] <= 0.0 && !logy_) continue;
                double x0 = sx(bars_.x[i], rx), x1 = sx(bars_.x[i + 1], rx);
                double y0 = sy(std::max(bars_.y[i], ry.lo), ry), yb = sy(ry.lo, ry);
                s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" +
                     num(std::max(x1 - x0, 0.5)) + "\" height=\"" + num(yb - y0) +
                     "\" fill=\"" + bars_.color + "\" fill-opacity=\"0.7\"/>\n";
            }
        }
        for (const auto& ser : series_) {
            std::string pts;
            for (std::size_t i = 0; i < ser.x.size(); ++i) {
                if (!finite_in(ser.x[i], rx) || !finite_in(ser.y[i], ry)) continue;
                pts += num(sx(ser.x[i], rx)) + "," + num(sy(ser.y[i], ry)) + " ";
            }
            if (pts.empty()) continue;
            s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + ser.color +
                 "\" stroke-width=\"1.8\"" + (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") +
                 "/>\n";
        }

        double ly = MT + 14;
        for (const auto& ser : series_) {
            s += line(ML + plot_w() - 130, ly - 4, ML + plot_w() - 110, ly - 4, ser.color, 2,
                      ser.dashed);
            s += text(ML + plot_w() - 104, ly, ser.label, 11, "start", false);
            ly += 16;
        }
        if (has_bars_) {
            s += "<rect x=\"" + num(ML + plot_w() - 130) + "\" y=\"" + num(ly - 11) +
                 "\" width=\"20\" height=\"9\" fill=\"" + bars_.color + "\" fill-opacity=\"0.7\"/>\n";
            s += text(ML + plot_w() - 104, ly, bars_.label, 11, "start", false);
        }
        s += "</svg>\n";
        return s;
    }

    void save(const std::string& path) const { save_text(path, render()); }

  private:
    static constexpr double W = 720, H = 480, ML = 64, MR = 20, MT = 44, MB = 48;
    struct Range {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        bool ok() const { return lo < hi; }
    };

    static double plot_w() { return W - ML - MR; }
    static double plot_h() { return H - MT - MB; }

    static bool finite_in(double v, const Range&) { return std::isfinite(v); }

    double tx(double v, const Range& r, bool logscale) const {
        double lo = logscale ? std::log10(r.lo) : r.lo;
        double hi = logscale ? std::log10(r.hi) : r.hi;
        double x = logscale ? std::log10(std::max(v, r.lo)) : v;
        return (x - lo) / (hi - lo);
    }
    double sx(double v, const Range& r) const { return ML + plot_w() * tx(v, r, logx_); }
    double sy(double v, const Range& r) const { return MT + plot_h() * (1.0 - tx(v, r, logy_)); }

    void take(Range& r, double v, bool logscale) const {
        if (!std::isfinite(v)) return;
        if (logscale && v <= 0.0) return;
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
    }

    void accumulate_range(Range& rx, Range& ry) const {
        for (const auto& ser : series_) {
            for (double v : ser.x) take(rx, v, logx_);
            for (double v : ser.y) take(ry, v, logy_);
        }
        if (has_bars_) {
            for (double v : bars_.x) take(rx, v, logx_);
            for (double v : bars_.y) take(ry, v, logy_);
            if (!logy_) take(ry, 0.0, false);
        }
    }

    // multiplicative on log axes: a linear margin could cross zero
    void pad(Range& r, bool logscale) const {
        if (logscale) {
            double f = r.ok() ? std::pow(r.hi / r.lo, 0.03) : 2.0;
            r.lo /= f;
            r.hi *= f;
            return;
        }
        if (!r.ok()) {
            double c = r.lo;
            r.lo = c - 0.5 - 0.1 * std::fabs(c);
            r.hi = c + 0.5 + 0.1 * std::fabs(c);
            return;
        }
        double w = r.hi - r.lo;
        r.lo -= 0.03 * w;
        r.hi += 0.03 * w;
    }

    // 1-2-5 ladder on linear axes, decades on log axes
    std::vector<double> ticks(const Range& r, bool logscale) const {
        std::vector<double> out;
        if (logscale) {
            if (!(r.lo > 0.0) || !std::isfinite(r.hi)) return {r.lo, r.hi};
            int lo = static_cast<int>(std::ceil(std::log10(r.lo) - 1e-9));
            int hi = static_cast<int>(std::floor(std::log10(r.hi) + 1e-9));
            hi = std::min(hi, lo + 40);  // ~40 decades caps any pathological range
            for (int e = lo; e <= hi; ++e) out.push_back(std::pow(10.0, e));
            if (out.size() < 2) {
                out.clear();
                out.push_back(r.lo);
                out.push_back(r.hi);
            }
            return out;
        }
        double w = r.hi - r.lo;
        double raw = w / 6.0;
        if (!(raw > 0.0) || !std::isfinite(raw)) return {r.lo, r.hi};
        double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (mag * m >= raw) {
                step = mag * m;
                break;
            }
        double t0 = std::ceil(r.lo / step) * step;
        for (double t = t0; t <= r.hi + 1e-12 * w; t += step) out.push_back(t);
        return out;
    }

    static std::string num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return buf;
    }
    static std::string tick_label(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return buf;
    }
    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '&') out += "&amp;";
            else if (c == '<') out += "&lt;";
            else if (c == '>') out += "&gt;";
            else out += c;
        }
        return out;
    }
    static std::string text(double x, double y, const std::string& t, int size,
                            const char* anchor, bool bold) {
        return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
               std::to_string(size) + "\" text-anchor=\"" + anchor +
               "\" font-family=\"sans-serif\"" + (bold ? " font-weight=\"bold\"" : "") + ">" +
               escape(t) + "</text>\n";
    }
    static std::string line(double x1, double y1, double x2, double y2, const char* color,
                            int width, bool dashed) {
        return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
               "\" y2=\"" + num(y2) + "\" stroke=\"" + color + "\" stroke-width=\"" +
               std::to_string(width) + "\"" + (dashed ? " stroke-dasharray=\"6 4\"" : "") +
               "/>\n";
    }
    static std::string line(double x1, double y1, double x2, double y2, const std::string& color,
                            int width, bool dashed) {
        return line(x1, y1, x2, y2, color.c_str(), width, dashed);
    }
    static std::string pick_color(std::size_t i) {
        static const char* palette[] = {"#1f5f8b", "#c23b22", "#2e7d32",
                                        "#8e44ad", "#b8860b", "#37474f"};
        return palette[i % 6];
    }

    std::string title_, xlabel_, ylabel_, comment_;
    std::vector<SvgSeries> series_;
    SvgSeries bars_;
    bool has_bars_ = false;
    bool logx_ = false, logy_ = false;
};

}  // namespace snls
