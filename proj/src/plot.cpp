#include "latentmotion/plot.hpp"

#include "latentmotion/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace latentmotion {

namespace fs = std::filesystem;

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
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

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // Pads degenerate or empty ranges so the mapping stays finite.
    void settle() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            const double pad = std::max(1.0, std::abs(lo)) * 0.5;
            lo -= pad;
            hi += pad;
        }
    }
};

/// Maps data coordinates into a rectangular panel (y grows upward).
struct Panel {
    double x0, y0, w, h;
    Range xr, yr;

    double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
    double py(double y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }
};

class Svg {
public:
    Svg(int width, int height) : width_(width), height_(height) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
             << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
             << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size = 12, const char* anchor = "middle") {
        out_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-family=\"sans-serif\" font-size=\""
             << size << "\" text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& color, double width = 1.0) {
        out_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2) << "\" y2=\""
             << fmt(y2) << "\" stroke=\"" << color << "\" stroke-width=\"" << fmt(width) << "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                  double width = 1.5) {
        if (pts.empty()) return;
        out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << fmt(width)
             << "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            out_ << (i ? " " : "") << fmt(pts[i].first) << ',' << fmt(pts[i].second);
        }
        out_ << "\"/>\n";
    }
    void polygon(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                 double opacity) {
        if (pts.size() < 3) return;
        out_ << "<polygon fill=\"" << color << "\" fill-opacity=\"" << fmt(opacity) << "\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            out_ << (i ? " " : "") << fmt(pts[i].first) << ',' << fmt(pts[i].second);
        }
        out_ << "\"/>\n";
    }
    void circle(double x, double y, double r, const std::string& color) {
        out_ << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << fmt(r) << "\" fill=\""
             << color << "\"/>\n";
    }

    void axes(const Panel& p, const std::string& x_label, const std::string& y_label) {
        out_ << "<rect x=\"" << fmt(p.x0) << "\" y=\"" << fmt(p.y0) << "\" width=\"" << fmt(p.w)
             << "\" height=\"" << fmt(p.h) << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double fx = p.xr.lo + (p.xr.hi - p.xr.lo) * i / 4.0;
            const double fy = p.yr.lo + (p.yr.hi - p.yr.lo) * i / 4.0;
            text(p.px(fx), p.y0 + p.h + 14, tick(fx), 10);
            text(p.x0 - 4, p.py(fy) + 3, tick(fy), 10, "end");
        }
        text(p.x0 + p.w / 2, p.y0 + p.h + 30, x_label);
        out_ << "<text x=\"" << fmt(p.x0 - 42) << "\" y=\"" << fmt(p.y0 + p.h / 2)
             << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 "
             << fmt(p.x0 - 42) << ' ' << fmt(p.y0 + p.h / 2) << ")\">" << escape(y_label) << "</text>\n";
    }

    void save(const fs::path& path) {
        out_ << "</svg>\n";
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream f(path);
        if (!f) throw IoError("cannot write " + path.string());
        f << out_.str();
        if (!f) throw IoError("failed writing " + path.string());
    }

    int width() const { return width_; }
    int height() const { return height_; }

private:
    static std::string tick(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", v);
        return buf;
    }

    int width_, height_;
    std::ostringstream out_;
};

std::size_t count_distinct(const std::vector<std::pair<double, double>>& pts) {
    std::set<std::pair<double, double>> s(pts.begin(), pts.end());
    return s.size();
}

}  // namespace

PlotInfo plot_band_curves(const fs::path& path, const std::string& title, const std::string& y_label,
                          const std::vector<BandSeries>& series) {
    Svg svg(720, 420);
    Panel panel{70, 40, 520, 320, {}, {}};
    std::size_t frames = 0;
    for (const auto& s : series) {
        frames = std::max(frames, s.values.size());
        for (const auto& v : s.values) {
            panel.yr.add(v.mean - v.sd);
            panel.yr.add(v.mean + v.sd);
        }
    }
    panel.xr.add(0.0);
    panel.xr.add(frames > 1 ? static_cast<double>(frames - 1) : 1.0);
    panel.xr.settle();
    panel.yr.settle();

    svg.text(svg.width() / 2.0, 22, title, 14);
    svg.axes(panel, "frame", y_label);

    PlotInfo info;
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const std::string color = s.color.empty() ? kPalette[si % 8] : s.color;
        // Bands and lines are split into runs of finite values.
        std::vector<std::pair<double, double>> upper, lower, mid;
        std::size_t drawn = 0;
        auto flush = [&] {
            std::vector<std::pair<double, double>> poly = upper;
            poly.insert(poly.end(), lower.rbegin(), lower.rend());
            svg.polygon(poly, color, 0.2);
            svg.polyline(mid, color);
            drawn += mid.size();
            upper.clear();
            lower.clear();
            mid.clear();
        };
        for (std::size_t t = 0; t < s.values.size(); ++t) {
            const MeanSd& v = s.values[t];
            if (!std::isfinite(v.mean)) {
                flush();
                continue;
            }
            const double sd = std::isfinite(v.sd) ? v.sd : 0.0;
            const double x = panel.px(static_cast<double>(t));
            mid.emplace_back(x, panel.py(v.mean));
            upper.emplace_back(x, panel.py(v.mean + sd));
            lower.emplace_back(x, panel.py(v.mean - sd));
        }
        flush();
        const double ly = 50 + 18.0 * static_cast<double>(si);
        svg.line(600, ly, 620, ly, color, 2.0);
        svg.text(626, ly + 4, s.label, 11, "start");
        info.distinct_points.push_back(drawn);
    }
    svg.save(path);
    info.path = path;
    info.width = svg.width();
    info.height = svg.height();
    info.series = series.size();
    return info;
}

PlotInfo plot_latent_paths(const fs::path& path, const std::vector<MotionMatrix>& paths,
                           const std::vector<std::string>& labels) {
    Eigen::Index dim = 0;
    for (const auto& p : paths) dim = std::max(dim, p.cols());
    if (dim == 0) throw ContractError("latent plot needs at least one non-empty path");
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    if (dim == 1) {
        pairs = {{0, 0}};
    } else if (dim == 2) {
        pairs = {{0, 1}};
    } else {
        pairs = {{0, 1}, {0, 2}, {1, 2}};
    }

    const int panel_w = 280;
    Svg svg(static_cast<int>(pairs.size()) * (panel_w + 80) + 40, 400);
    svg.text(svg.width() / 2.0, 22, "Latent trajectories", 14);

    PlotInfo info;
    info.distinct_points.assign(paths.size(), 0);
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        const auto [a, b] = pairs[pi];
        Panel panel{80.0 + static_cast<double>(pi) * (panel_w + 80), 50, panel_w, panel_w, {}, {}};
        for (const auto& p : paths) {
            for (Eigen::Index t = 0; t < p.rows(); ++t) {
                panel.xr.add(p(t, a));
                panel.yr.add(p(t, b));
            }
        }
        panel.xr.settle();
        panel.yr.settle();
        svg.axes(panel, "z" + std::to_string(a + 1), "z" + std::to_string(b + 1));
        for (std::size_t k = 0; k < paths.size(); ++k) {
            const auto& p = paths[k];
            const std::string color = kPalette[k % 8];
            std::vector<std::pair<double, double>> pts;
            std::vector<std::pair<double, double>> raw;
            for (Eigen::Index t = 0; t < p.rows(); ++t) {
                pts.emplace_back(panel.px(p(t, a)), panel.py(p(t, b)));
                raw.emplace_back(p(t, a), p(t, b));
            }
            if (pts.empty()) continue;
            const std::size_t distinct = count_distinct(raw);
            if (distinct > 1) svg.polyline(pts, color, 1.2);
            svg.circle(pts.front().first, pts.front().second, distinct > 1 ? 2.5 : 3.5, color);
            if (pi == 0) info.distinct_points[k] = distinct;
        }
    }
    for (std::size_t k = 0; k < labels.size() && k < 8; ++k) {
        svg.text(80 + 120.0 * static_cast<double>(k), 390, labels[k], 10, "start");
    }
    svg.save(path);
    info.path = path;
    info.width = svg.width();
    info.height = svg.height();
    info.series = paths.size();
    return info;
}

std::vector<std::pair<std::size_t, std::size_t>> skeleton_edges(const JointSchema& schema) {
    static const std::vector<std::pair<std::string, std::string>> bones = {
        {"head", "l_shoulder"},  {"head", "r_shoulder"},    {"l_shoulder", "r_shoulder"},
        {"l_shoulder", "l_elbow"}, {"l_elbow", "l_wrist"},  {"r_shoulder", "r_elbow"},
        {"r_elbow", "r_wrist"},  {"l_shoulder", "l_hip"},   {"r_shoulder", "r_hip"},
        {"l_hip", "r_hip"},      {"l_hip", "l_knee"},       {"l_knee", "l_heel"},
        {"l_heel", "l_toe"},     {"r_hip", "r_knee"},       {"r_knee", "r_heel"},
        {"r_heel", "r_toe"},
    };
    auto find = [&](const std::string& name) -> std::ptrdiff_t {
        const auto it = std::find(schema.joint_names.begin(), schema.joint_names.end(), name);
        return it == schema.joint_names.end() ? -1 : it - schema.joint_names.begin();
    };
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& [a, b] : bones) {
        const auto ia = find(a);
        const auto ib = find(b);
        if (ia >= 0 && ib >= 0) edges.emplace_back(static_cast<std::size_t>(ia), static_cast<std::size_t>(ib));
    }
    return edges;
}

PlotInfo plot_stick_frames(const fs::path& path, const Prediction& prediction, const JointSchema& schema,
                           const std::vector<Eigen::Index>& frames) {
    const Eigen::Index joints = static_cast<Eigen::Index>(schema.joint_names.size());
    if (prediction.truth.cols() != 3 * joints || prediction.predicted.cols() != 3 * joints) {
        throw ContractError("prediction width does not match the joint schema");
    }
    const int up = schema.vertical_axis;
    const int across = up == 0 ? 1 : 0;
    const auto edges = skeleton_edges(schema);

    Range xr, yr;
    for (const auto* m : {&prediction.truth, &prediction.predicted}) {
        for (Eigen::Index f : frames) {
            if (f < 0 || f >= m->rows()) throw ContractError("stick frame index out of range");
            for (Eigen::Index j = 0; j < joints; ++j) {
                xr.add((*m)(f, 3 * j + across));
                yr.add((*m)(f, 3 * j + up));
            }
        }
    }
    xr.settle();
    yr.settle();
    // Same scale on both axes so limbs keep their proportions.
    const double span = std::max(xr.hi - xr.lo, yr.hi - yr.lo);
    const double cx = 0.5 * (xr.lo + xr.hi);
    const double cy = 0.5 * (yr.lo + yr.hi);

    const int panel = 200;
    Svg svg(std::max<int>(1, static_cast<int>(frames.size())) * (panel + 20) + 20, panel + 90);
    svg.text(svg.width() / 2.0, 22, "Truth (grey) vs prediction (red): " + prediction.trial_id, 13);
    for (std::size_t k = 0; k < frames.size(); ++k) {
        Panel p{20.0 + static_cast<double>(k) * (panel + 20), 40, panel, panel, {}, {}};
        p.xr.lo = cx - 0.55 * span;
        p.xr.hi = cx + 0.55 * span;
        p.yr.lo = cy - 0.55 * span;
        p.yr.hi = cy + 0.55 * span;
        const Eigen::Index f = frames[k];
        for (const auto& [m, color] : {std::pair{&prediction.truth, "#7f7f7f"},
                                       std::pair{&prediction.predicted, "#d62728"}}) {
            for (const auto& [a, b] : edges) {
                const auto ja = static_cast<Eigen::Index>(a);
                const auto jb = static_cast<Eigen::Index>(b);
                svg.line(p.px((*m)(f, 3 * ja + across)), p.py((*m)(f, 3 * ja + up)),
                         p.px((*m)(f, 3 * jb + across)), p.py((*m)(f, 3 * jb + up)), color, 2.0);
            }
            for (Eigen::Index j = 0; j < joints; ++j) {
                svg.circle(p.px((*m)(f, 3 * j + across)), p.py((*m)(f, 3 * j + up)), 2.0, color);
            }
        }
        svg.text(p.x0 + p.w / 2, p.y0 + p.h + 20, "frame " + std::to_string(f), 11);
    }
    svg.save(path);
    PlotInfo info;
    info.path = path;
    info.width = svg.width();
    info.height = svg.height();
    info.series = 2;
    info.distinct_points.assign(2, frames.size() * static_cast<std::size_t>(joints));
    return info;
}

}  // namespace latentmotion
