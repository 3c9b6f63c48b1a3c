#include "unobs/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace unobs::artifacts {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// One panel of the SVG: polyline of (t, y) scaled into the box.
void panel(std::ostringstream& svg, const std::vector<double>& t, const std::vector<double>& y,
           double top, const std::string& label, const std::string& colour) {
    const double left = 70.0, width = 620.0, height = 180.0;
    const double t0 = t.front();
    const double t1 = std::max(t.back(), t0 + 1e-300);
    double ymax = 0.0;
    for (double v : y) {
        if (std::isfinite(v)) ymax = std::max(ymax, v);
    }
    if (ymax <= 0.0) ymax = 1.0;

    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width << "\" height=\""
        << height << "\" fill=\"none\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"" << top - 6 << "\" font-size=\"13\">" << label
        << "</text>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << top + 10
        << "\" font-size=\"10\" text-anchor=\"end\">" << short_num(ymax) << "</text>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << top + height
        << "\" font-size=\"10\" text-anchor=\"end\">0</text>\n";
    svg << "<text x=\"" << left << "\" y=\"" << top + height + 14 << "\" font-size=\"10\">"
        << short_num(t0) << "</text>\n";
    svg << "<text x=\"" << left + width << "\" y=\"" << top + height + 14
        << "\" font-size=\"10\" text-anchor=\"end\">t = " << short_num(t1) << "</text>\n";

    const std::size_t stride = std::max<std::size_t>(1, t.size() / 2000);
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\" points=\"";
    char buf[64];
    for (std::size_t i = 0; i < t.size(); i += stride) {
        if (!std::isfinite(y[i])) continue;
        const double px = left + width * (t[i] - t0) / (t1 - t0);
        const double py = top + height * (1.0 - std::min(y[i], ymax) / ymax);
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px, py);
        svg << buf;
    }
    svg << "\"/>\n";
}

}  // namespace

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const sim::Trajectory& traj, bool spectral) {
    auto out = open_out(path);
    out << "t,x1,x2,u,eps_norm,c_eps_abs";
    if (spectral) out << ",weak_eps";
    out << '\n';
    std::string line;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        line.clear();
        line += fmt(traj.t[i]);
        line += ',';
        line += fmt(traj.x[i].size() > 0 ? traj.x[i](0) : 0.0);
        line += ',';
        line += fmt(traj.x[i].size() > 1 ? traj.x[i](1) : 0.0);
        line += ',';
        line += fmt(traj.u[i]);
        line += ',';
        line += fmt(traj.eps_norm[i]);
        line += ',';
        line += fmt(traj.c_eps_abs[i]);
        if (spectral) {
            line += ',';
            line += fmt(i < traj.weak_eps.size() ? traj.weak_eps[i] : 0.0);
        }
        line += '\n';
        out << line;
    }
    finish(out, path);
}

std::string format_key_values(const KeyValues& kv) {
    std::string s;
    for (const auto& [k, v] : kv) {
        s += k;
        s += '=';
        s += v;
        s += '\n';
    }
    return s;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
    auto out = open_out(path);
    out << format_key_values(kv);
    finish(out, path);
}

void write_svg(const std::filesystem::path& path, const sim::Trajectory& traj,
               const std::string& title) {
    std::vector<double> xnorm(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) xnorm[i] = traj.x[i].norm();

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"500\" "
           "font-family=\"sans-serif\">\n";
    svg << "<rect width=\"720\" height=\"500\" fill=\"white\"/>\n";
    svg << "<text x=\"360\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">" << title
        << "</text>\n";
    if (!traj.t.empty()) {
        panel(svg, traj.t, xnorm, 50.0, "|x(t)|", "#1f77b4");
        panel(svg, traj.t, traj.eps_norm, 280.0, "||eps(t)||", "#d62728");
    }
    svg << "</svg>\n";
    auto out = open_out(path);
    out << svg.str();
    finish(out, path);
}

}  // namespace unobs::artifacts
