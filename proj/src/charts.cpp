#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "starcco/harness.hpp"

namespace starcco {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 130.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string fmt(double v, const char* spec = "%.3f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string colour(const std::string& series) {
    static const std::map<std::string, std::string> fixed = {
        {"AVUS", "#1f77b4"}, {"LFUS", "#d62728"}, {"BM1", "#2ca02c"}, {"BM2", "#ff7f0e"}, {"NoRIS", "#7f7f7f"}};
    auto it = fixed.find(series);
    return it != fixed.end() ? it->second : "#9467bd";
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

// Linear data-to-pixel mapping, written into the root element so charts can be read back.
struct Frame {
    double x_min, x_max, y_min, y_max;

    static Frame fit(double x0, double x1, double y0, double y1) {
        auto widen = [](double& lo, double& hi, double pad_frac) {
            if (hi - lo <= 0.0) {
                const double d = std::max(std::abs(lo) * 0.1, 1e-9);
                lo -= d;
                hi += d;
            } else {
                const double d = (hi - lo) * pad_frac;
                lo -= d;
                hi += d;
            }
        };
        widen(x0, x1, 0.05);
        widen(y0, y1, 0.08);
        return {x0, x1, y0, y1};
    }
    double pw() const { return kWidth - kLeft - kRight; }
    double ph() const { return kHeight - kTop - kBottom; }
    double px(double x) const { return kLeft + (x - x_min) / (x_max - x_min) * pw(); }
    double py(double y) const { return kTop + ph() - (y - y_min) / (y_max - y_min) * ph(); }
};

void open_svg(std::ostream& os, const Frame& f, const std::string& title, const std::string& xlabel,
              const std::string& ylabel) {
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" data-x-min=\"" << fmt(f.x_min, "%.17g")
       << "\" data-x-max=\"" << fmt(f.x_max, "%.17g") << "\" data-y-min=\"" << fmt(f.y_min, "%.17g")
       << "\" data-y-max=\"" << fmt(f.y_max, "%.17g") << "\" data-plot-left=\"" << kLeft << "\" data-plot-top=\""
       << kTop << "\" data-plot-width=\"" << f.pw() << "\" data-plot-height=\"" << f.ph() << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
       << escape(title) << "</text>\n";
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << f.pw() << "\" height=\"" << f.ph()
       << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = f.x_min + (f.x_max - f.x_min) * i / 4.0;
        const double yv = f.y_min + (f.y_max - f.y_min) * i / 4.0;
        os << "<line x1=\"" << fmt(f.px(xv)) << "\" y1=\"" << fmt(kTop + f.ph()) << "\" x2=\"" << fmt(f.px(xv))
           << "\" y2=\"" << fmt(kTop + f.ph() + 5) << "\" stroke=\"#333\"/>\n";
        os << "<text x=\"" << fmt(f.px(xv)) << "\" y=\"" << fmt(kTop + f.ph() + 18)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(xv, "%.4g") << "</text>\n";
        os << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(f.py(yv)) << "\" x2=\"" << kLeft << "\" y2=\""
           << fmt(f.py(yv)) << "\" stroke=\"#333\"/>\n";
        os << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(f.py(yv) + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(yv, "%.4g") << "</text>\n";
    }
    os << "<text x=\"" << fmt(kLeft + f.pw() / 2) << "\" y=\"" << fmt(kHeight - 10)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(xlabel) << "</text>\n";
    os << "<text x=\"16\" y=\"" << fmt(kTop + f.ph() / 2) << "\" transform=\"rotate(-90 16 " << fmt(kTop + f.ph() / 2)
       << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(ylabel) << "</text>\n";
}

void legend(std::ostream& os, const std::vector<std::string>& names) {
    double y = kTop + 10;
    for (const auto& n : names) {
        os << "<rect x=\"" << fmt(kWidth - kRight + 12) << "\" y=\"" << fmt(y - 9) << "\" width=\"12\" height=\"12\" fill=\""
           << colour(n) << "\"/>\n";
        os << "<text x=\"" << fmt(kWidth - kRight + 30) << "\" y=\"" << fmt(y + 1)
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(n) << "</text>\n";
        y += 18;
    }
}

struct Band {
    double x, mean, lo, hi;
};

std::string line_chart(const std::map<std::string, std::vector<Band>>& series, const std::string& title,
                       const std::string& xlabel, const std::string& ylabel) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& [name, pts] : series)
        for (const auto& b : pts) {
            x0 = std::min(x0, b.x);
            x1 = std::max(x1, b.x);
            y0 = std::min(y0, b.lo);
            y1 = std::max(y1, b.hi);
        }
    const Frame f = Frame::fit(x0, x1, y0, y1);
    std::ostringstream os;
    open_svg(os, f, title, xlabel, ylabel);
    std::vector<std::string> names;
    for (const auto& [name, pts] : series) {
        names.push_back(name);
        const std::string c = colour(name);
        if (pts.size() > 1) {
            os << "<path class=\"band\" data-series=\"" << escape(name) << "\" fill=\"" << c
               << "\" fill-opacity=\"0.18\" stroke=\"none\" d=\"";
            for (std::size_t i = 0; i < pts.size(); ++i)
                os << (i ? " L " : "M ") << fmt(f.px(pts[i].x)) << ' ' << fmt(f.py(pts[i].hi));
            for (std::size_t i = pts.size(); i-- > 0;) os << " L " << fmt(f.px(pts[i].x)) << ' ' << fmt(f.py(pts[i].lo));
            os << " Z\"/>\n";
            os << "<polyline class=\"mean\" data-series=\"" << escape(name) << "\" fill=\"none\" stroke=\"" << c
               << "\" stroke-width=\"2\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i)
                os << (i ? " " : "") << fmt(f.px(pts[i].x)) << ',' << fmt(f.py(pts[i].mean));
            os << "\"/>\n";
        } else if (pts.size() == 1 && pts[0].hi > pts[0].lo) {
            os << "<line class=\"band\" data-series=\"" << escape(name) << "\" x1=\"" << fmt(f.px(pts[0].x)) << "\" y1=\""
               << fmt(f.py(pts[0].lo)) << "\" x2=\"" << fmt(f.px(pts[0].x)) << "\" y2=\"" << fmt(f.py(pts[0].hi))
               << "\" stroke=\"" << c << "\" stroke-opacity=\"0.4\" stroke-width=\"6\"/>\n";
        }
        for (const auto& b : pts)
            os << "<circle class=\"point\" data-series=\"" << escape(name) << "\" data-x=\"" << fmt(b.x, "%.17g")
               << "\" data-y=\"" << fmt(b.mean, "%.17g") << "\" data-min=\"" << fmt(b.lo, "%.17g") << "\" data-max=\""
               << fmt(b.hi, "%.17g") << "\" cx=\"" << fmt(f.px(b.x)) << "\" cy=\"" << fmt(f.py(b.mean))
               << "\" r=\"4\" fill=\"" << c << "\"/>\n";
    }
    legend(os, names);
    os << "</svg>\n";
    return os.str();
}

bool write_file(const fs::path& path, const std::string& text, std::vector<std::string>* errors) {
    std::ofstream out(path, std::ios::binary);
    if (out) out << text;
    if (!out) {
        if (errors) errors->push_back("cannot write " + path.string());
        return false;
    }
    return true;
}

} // namespace

std::string pareto_svg(const std::vector<ArchiveEntry>& points) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    std::vector<Objective2> pts;
    for (const auto& e : points) {
        x0 = std::min(x0, e.coverage);
        x1 = std::max(x1, e.coverage);
        y0 = std::min(y0, e.capacity);
        y1 = std::max(y1, e.capacity);
        pts.push_back(e.point());
    }
    if (points.empty()) x0 = y0 = 0.0, x1 = y1 = 1.0;
    const Frame f = Frame::fit(x0, x1, y0, y1);
    std::ostringstream os;
    open_svg(os, f, "Pareto archive", "coverage", "capacity (bit/s)");
    const auto front = pareto_front_indices(pts);
    std::vector<bool> on_front(points.size(), false);
    for (auto i : front) on_front[i] = true;

    std::vector<std::size_t> order(front.begin(), front.end());
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return pts[a][0] < pts[b][0]; });
    if (order.size() > 1) {
        os << "<polyline class=\"front\" fill=\"none\" stroke=\"#000\" stroke-dasharray=\"4 3\" points=\"";
        for (std::size_t i = 0; i < order.size(); ++i)
            os << (i ? " " : "") << fmt(f.px(pts[order[i]][0])) << ',' << fmt(f.py(pts[order[i]][1]));
        os << "\"/>\n";
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& e = points[i];
        if (std::find(names.begin(), names.end(), e.strategy) == names.end()) names.push_back(e.strategy);
        os << "<circle class=\"point" << (on_front[i] ? " front" : "") << "\" data-series=\"" << escape(e.strategy)
           << "\" data-x=\"" << fmt(e.coverage, "%.17g") << "\" data-y=\"" << fmt(e.capacity, "%.17g") << "\" cx=\""
           << fmt(f.px(e.coverage)) << "\" cy=\"" << fmt(f.py(e.capacity)) << "\" r=\"" << (on_front[i] ? 5 : 3)
           << "\" fill=\"" << colour(e.strategy) << "\"" << (on_front[i] ? " stroke=\"#000\"" : "") << "/>\n";
    }
    std::sort(names.begin(), names.end());
    legend(os, names);
    os << "</svg>\n";
    return os.str();
}

std::vector<fs::path> emit_charts(const ResultTable& table, const fs::path& table_dir, const fs::path& out_dir,
                                  std::vector<std::string>* errors) {
    if (table.rows.empty()) throw InvalidArgument("cannot chart an empty result table");
    fs::create_directories(out_dir);
    std::vector<fs::path> written;

    // axis -> strategy -> value -> samples
    std::map<std::string, std::map<std::string, std::map<double, std::vector<Objective2>>>> groups;
    for (const auto& r : table.rows)
        if (r.status == "ok") groups[r.axis][r.strategy][r.axis_value].push_back({r.final_coverage, r.final_capacity});

    for (const auto& [axis, by_strategy] : groups) {
        for (int m = 0; m < 2; ++m) {
            std::map<std::string, std::vector<Band>> series;
            for (const auto& [strategy, by_value] : by_strategy)
                for (const auto& [v, samples] : by_value) {
                    double sum = 0.0, lo = INFINITY, hi = -INFINITY;
                    for (const auto& s : samples) {
                        sum += s[m];
                        lo = std::min(lo, s[m]);
                        hi = std::max(hi, s[m]);
                    }
                    series[strategy].push_back({v, sum / static_cast<double>(samples.size()), lo, hi});
                }
            const std::string metric = m == 0 ? "coverage" : "capacity";
            const fs::path path = out_dir / (metric + "_vs_" + axis + ".svg");
            const std::string text = line_chart(series, "Final " + metric + " vs " + axis, axis,
                                                m == 0 ? "coverage" : "capacity (bit/s)");
            if (write_file(path, text, errors)) written.push_back(path);
        }
    }

    std::vector<ArchiveEntry> points;
    for (const auto& r : table.rows) {
        std::ifstream in(table_dir / r.archive_path);
        if (!in) {
            if (errors) errors->push_back("missing archive " + (table_dir / r.archive_path).string());
            continue;
        }
        try {
            const ParetoArchive archive = ParetoArchive::read_csv(in);
            points.insert(points.end(), archive.entries().begin(), archive.entries().end());
        } catch (const std::exception& e) {
            if (errors) errors->push_back("bad archive " + r.archive_path + ": " + e.what());
        }
    }
    const fs::path pareto = out_dir / "pareto.svg";
    if (write_file(pareto, pareto_svg(points), errors)) written.push_back(pareto);

    try {
        written.push_back(emit_curve_chart(table, table_dir, out_dir));
    } catch (const std::exception& e) {
        if (errors) errors->push_back(e.what());
    }
    return written;
}

fs::path emit_curve_chart(const ResultTable& table, const fs::path& table_dir, const fs::path& out_dir,
                          std::size_t window) {
    if (window == 0) throw InvalidArgument("moving-average window must be positive");
    // strategy -> episode -> samples of the moving average
    std::map<std::string, std::map<std::size_t, std::vector<double>>> acc;
    for (const auto& r : table.rows) {
        std::ifstream in(table_dir / r.curve_path);
        if (!in) continue;
        const auto rows = read_curves_csv(in);
        double sum = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            sum += rows[i].scalarized_reward;
            if (i >= window) sum -= rows[i - window].scalarized_reward;
            acc[r.strategy][i].push_back(sum / static_cast<double>(std::min(i + 1, window)));
        }
    }
    std::map<std::string, std::vector<Band>> series;
    for (const auto& [strategy, by_ep] : acc)
        for (const auto& [ep, v] : by_ep) {
            double s = 0.0;
            for (double x : v) s += x;
            series[strategy].push_back(
                {static_cast<double>(ep), s / static_cast<double>(v.size()), *std::min_element(v.begin(), v.end()),
                 *std::max_element(v.begin(), v.end())});
        }
    if (series.empty()) throw InvalidArgument("no learning curves found");
    const fs::path path = out_dir / "learning_curves.svg";
    std::ofstream out(path, std::ios::binary);
    out << line_chart(series, "Scalarized reward (moving average " + std::to_string(window) + ")", "episode",
                      "reward");
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return path;
}

} // namespace starcco
