#include "lrbandit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace lrbandit {

ChartSeries series_from_sweep(const std::vector<SweepRow>& rows, const std::string& label) {
    ChartSeries s;
    s.label = label;
    std::vector<SweepRow> sorted = rows;
    std::sort(sorted.begin(), sorted.end(), [](const SweepRow& a, const SweepRow& b) { return a.omega_r < b.omega_r; });
    for (const auto& r : sorted) {
        s.x.push_back(r.omega_r);
        s.mean.push_back(r.mean);
        s.sd.push_back(r.sd);
    }
    return s;
}

ChartSeries series_from_traces(const std::vector<RegretTrace>& traces, const std::string& label, int max_points) {
    ChartSeries s;
    s.label = label;
    if (traces.empty()) return s;
    int T = traces.front().horizon();
    for (const auto& t : traces) T = std::min(T, t.horizon());
    if (T == 0) return s;
    const int stride = std::max(1, (T + max_points - 1) / std::max(1, max_points));
    const double n = static_cast<double>(traces.size());
    for (int t = stride; ; t += stride) {
        if (t > T) t = T;
        double sum = 0.0;
        for (const auto& tr : traces) sum += tr.cumulative[static_cast<std::size_t>(t - 1)];
        const double m = sum / n;
        double ss = 0.0;
        for (const auto& tr : traces) {
            const double d = tr.cumulative[static_cast<std::size_t>(t - 1)] - m;
            ss += d * d;
        }
        s.x.push_back(t);
        s.mean.push_back(m);
        s.sd.push_back(n > 1 ? std::sqrt(ss / (n - 1)) : 0.0);
        if (t == T) break;
    }
    return s;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '&': o += "&amp;"; break;
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

// round step to 1, 2 or 5 times a power of ten
double nice_step(double span, int target) {
    if (!(span > 0)) return 1.0;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    return (f < 1.5 ? 1 : f < 3.5 ? 2 : f < 7.5 ? 5 : 10) * mag;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::vector<std::pair<double, double>> band_vertices(const ChartSeries& s) {
    std::vector<std::pair<double, double>> v;
    for (std::size_t i = 0; i < s.x.size(); ++i) v.emplace_back(s.x[i], s.mean[i] + s.sd[i]);
    for (std::size_t i = s.x.size(); i-- > 0;) v.emplace_back(s.x[i], s.mean[i] - s.sd[i]);
    return v;
}

std::string render_chart(const ChartSpec& spec) {
    if (spec.series.empty()) throw Error("chart: no series");
    const double W = 720, H = 440, ml = 80, mr = 170, mt = 40, mb = 60;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : spec.series) {
        if (s.x.size() != s.mean.size() || s.x.size() != s.sd.size())
            throw Error("chart: series '" + s.label + "' has ragged columns");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.mean[i] - s.sd[i]);
            y1 = std::max(y1, s.mean[i] + s.sd[i]);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double ystep = nice_step(y1 - y0, 5);
    y0 = std::floor(y0 / ystep) * ystep;
    y1 = std::ceil(y1 / ystep) * ystep;
    const double xstep = nice_step(x1 - x0, 6);

    const double pw = W - ml - mr, ph = H - mt - mb;
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return mt + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
      << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    if (!spec.title.empty())
        o << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
          << escape(spec.title) << "</text>\n";

    // axes and ticks
    o << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(ml + pw) << "\" y2=\""
      << fmt(mt + ph) << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(ml) << "\" y2=\"" << fmt(mt + ph)
      << "\" stroke=\"black\"/>\n";
    for (double y = y0; y <= y1 + ystep * 1e-9; y += ystep) {
        o << "<line x1=\"" << fmt(ml - 5) << "\" y1=\"" << fmt(py(y)) << "\" x2=\"" << fmt(ml) << "\" y2=\""
          << fmt(py(y)) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(py(y) + 4) << "\" text-anchor=\"end\">" << tick_label(y)
          << "</text>\n";
    }
    for (double x = std::ceil(x0 / xstep - 1e-9) * xstep; x <= x1 + xstep * 1e-9; x += xstep) {
        o << "<line x1=\"" << fmt(px(x)) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(px(x)) << "\" y2=\""
          << fmt(mt + ph + 5) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << fmt(px(x)) << "\" y=\"" << fmt(mt + ph + 20) << "\" text-anchor=\"middle\">"
          << tick_label(x) << "</text>\n";
    }
    o << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(H - 14) << "\" text-anchor=\"middle\">"
      << escape(spec.x_label) << "</text>\n";
    o << "<text x=\"20\" y=\"" << fmt(mt + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << fmt(mt + ph / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

    for (std::size_t k = 0; k < spec.series.size(); ++k) {
        const auto& s = spec.series[k];
        const char* col = kColors[k % (sizeof kColors / sizeof *kColors)];
        o << "<polygon class=\"band\" fill=\"" << col << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
        const auto band = band_vertices(s);
        for (std::size_t i = 0; i < band.size(); ++i)
            o << (i ? " " : "") << fmt(px(band[i].first)) << ',' << fmt(py(band[i].second));
        o << "\"/>\n";
        o << "<polyline class=\"mean\" fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            o << (i ? " " : "") << fmt(px(s.x[i])) << ',' << fmt(py(s.mean[i]));
        o << "\"/>\n";
        const double ly = mt + 10 + 22.0 * static_cast<double>(k);
        o << "<rect x=\"" << fmt(ml + pw + 15) << "\" y=\"" << fmt(ly - 6) << "\" width=\"18\" height=\"12\" fill=\""
          << col << "\" fill-opacity=\"0.35\" stroke=\"" << col << "\"/>\n";
        o << "<text x=\"" << fmt(ml + pw + 40) << "\" y=\"" << fmt(ly + 4) << "\">" << escape(s.label)
          << " (mean, \xC2\xB1" << "1 sd)</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void emit_chart(const ChartSpec& spec, const std::filesystem::path& path) {
    const std::string svg = render_chart(spec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << svg;
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace lrbandit
