#include "mgap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mgap/errors.hpp"

namespace mgap {

std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void CsvTable::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write csv: " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
}

namespace {

struct Range {
    double lo = 0.0, hi = 1.0;
    void fit(const std::vector<double>& v) {
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
};

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<SvgSeries>& series, const std::string& x_label,
                    const std::string& y_label) {
    const int w = 640, h = 420, ml = 60, mr = 20, mt = 40, mb = 46;
    Range rx, ry;
    rx.lo = 1e300;
    rx.hi = -1e300;
    ry.lo = 1e300;
    ry.hi = -1e300;
    for (const auto& s : series) {
        rx.fit(s.x);
        ry.fit(s.y);
    }
    if (rx.lo >= rx.hi) rx.hi = rx.lo + 1.0;
    if (ry.lo >= ry.hi) ry.hi = ry.lo + 1.0;
    double padx = 0.05 * (rx.hi - rx.lo), pady = 0.08 * (ry.hi - ry.lo);
    rx.lo -= padx;
    rx.hi += padx;
    ry.lo -= pady;
    ry.hi += pady;
    auto X = [&](double x) { return ml + (x - rx.lo) / (rx.hi - rx.lo) * (w - ml - mr); };
    auto Y = [&](double y) { return h - mb - (y - ry.lo) / (ry.hi - ry.lo) * (h - mt - mb); };

    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write svg: " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='15'>" << title
        << "</text>\n";
    out << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    for (int i = 0; i <= 4; ++i) {
        double xv = rx.lo + (rx.hi - rx.lo) * i / 4.0;
        double yv = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        out << "<text x='" << X(xv) << "' y='" << h - mb + 16
            << "' text-anchor='middle' font-size='10'>" << csv_num(xv) << "</text>\n";
        out << "<text x='" << ml - 6 << "' y='" << Y(yv) + 4
            << "' text-anchor='end' font-size='10'>" << csv_num(yv) << "</text>\n";
    }
    if (!x_label.empty())
        out << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 8
            << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n";
    if (!y_label.empty())
        out << "<text x='14' y='" << (mt + h - mb) / 2 << "' font-size='12' transform='rotate(-90 "
            << 14 << " " << (mt + h - mb) / 2 << ")' text-anchor='middle'>" << y_label
            << "</text>\n";
    int li = 0;
    for (const auto& s : series) {
        if (!s.points_only && s.x.size() > 1) {
            out << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << X(s.x[i]) << "," << Y(s.y[i]) << " ";
            out << "'/>\n";
        }
        if (s.points_only)
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << "<circle cx='" << X(s.x[i]) << "' cy='" << Y(s.y[i]) << "' r='3' fill='"
                    << s.color << "'/>\n";
        if (!s.label.empty()) {
            double ly = mt + 14 * (li + 1);
            out << "<rect x='" << w - mr - 150 << "' y='" << ly - 9
                << "' width='10' height='10' fill='" << s.color << "'/>\n";
            out << "<text x='" << w - mr - 136 << "' y='" << ly << "' font-size='11'>" << s.label
                << "</text>\n";
            li++;
        }
    }
    out << "</svg>\n";
}

void write_stiffness_csv(const std::string& path, const std::vector<std::string>& row_labels,
                         const std::vector<StiffnessResult>& results) {
    CsvTable t;
    t.header = {"config", "k_nm", "r2", "n_points"};
    for (std::size_t i = 0; i < results.size(); ++i)
        t.rows.push_back({row_labels[i], csv_num(results[i].k), csv_num(results[i].r2),
                          csv_num(static_cast<double>(results[i].eps.size()))});
    t.write(path);
}

void write_stiffness_svg(const std::string& path, const StiffnessResult& r, double fitted_k) {
    SvgSeries pts;
    pts.label = "measured";
    pts.points_only = true;
    pts.x = r.eps;
    pts.y = r.force;
    SvgSeries line;
    line.label = "fit k=" + csv_num(fitted_k);
    line.color = "#d62728";
    double emax = r.eps.empty() ? 1.0 : *std::max_element(r.eps.begin(), r.eps.end());
    line.x = {0.0, emax};
    line.y = {0.0, fitted_k * emax};
    write_svg_plot(path, "mismatch vs interaction force", {pts, line}, "|eps| (m)", "|F| (N)");
}

void write_manip_csv(const std::string& path,
                     const std::vector<std::pair<std::string, Metrics>>& rows) {
    CsvTable t;
    t.header = {"row",   "n",          "success", "success_rate", "strict", "effective",
                "jerk",  "clamps",     "mean_eps_contact", "mean_eps_free", "top_failure"};
    for (const auto& [label, m] : rows) {
        std::string top = "-";
        int best = 0;
        for (const auto& [tag, cnt] : m.failure_tags)
            if (cnt > best) {
                best = cnt;
                top = tag;
            }
        t.rows.push_back({label, csv_num(m.n), csv_num(m.success), csv_num(m.success_rate()),
                          csv_num(m.strict), csv_num(m.effective), csv_num(m.mean_jerk),
                          csv_num(m.clamp_events), csv_num(m.mean_eps_contact),
                          csv_num(m.mean_eps_free), top});
    }
    t.write(path);
}

void write_dynamic_csv(const std::string& path,
                       const std::vector<std::pair<std::string, Metrics>>& rows) {
    CsvTable t;
    t.header = {"row", "n", "grasp", "place", "sort", "sort_accuracy", "success_rate", "jerk",
                "top_failure"};
    for (const auto& [label, m] : rows) {
        std::string top = "-";
        int best = 0;
        for (const auto& [tag, cnt] : m.failure_tags)
            if (cnt > best) {
                best = cnt;
                top = tag;
            }
        t.rows.push_back({label, csv_num(m.n), csv_num(m.grasp), csv_num(m.place),
                          csv_num(m.sort), csv_num(m.sort_accuracy()), csv_num(m.success_rate()),
                          csv_num(m.mean_jerk), top});
    }
    t.write(path);
}

void write_latency_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    CsvTable t;
    t.header = {"strategy", "k", "n", "grasp", "place", "sort", "success_rate", "jerk",
                "starvation"};
    for (const auto& r : rows)
        t.rows.push_back({to_string(r.strategy), csv_num(r.k), csv_num(r.metrics.n),
                          csv_num(r.metrics.grasp), csv_num(r.metrics.place),
                          csv_num(r.metrics.sort), csv_num(r.metrics.success_rate()),
                          csv_num(r.metrics.mean_jerk), csv_num(r.metrics.starvation_events)});
    t.write(path);
}

void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows) {
    CsvTable t;
    t.header = {"t_obs", "n", "success_rate", "sort_accuracy", "strict", "effective"};
    for (const auto& r : rows)
        t.rows.push_back({csv_num(r.t_obs), csv_num(r.metrics.n),
                          csv_num(r.metrics.success_rate()), csv_num(r.metrics.sort_accuracy()),
                          csv_num(r.metrics.strict), csv_num(r.metrics.effective)});
    t.write(path);
}

void write_eps_trace_svg(const std::string& path, const Episode& ep) {
    SvgSeries ex, ez, eg;
    ex.label = "eps_x";
    ex.color = "#1f77b4";
    ez.label = "eps_z";
    ez.color = "#d62728";
    eg.label = "eps_grip";
    eg.color = "#2ca02c";
    for (const auto& s : ep.steps) {
        double tt = s.t * ep.header.dt;
        Vec3 eps = s.master_cmd - s.slave_state;
        ex.x.push_back(tt);
        ex.y.push_back(eps[0]);
        ez.x.push_back(tt);
        ez.y.push_back(eps[1]);
        eg.x.push_back(tt);
        eg.y.push_back(eps[2]);
    }
    write_svg_plot(path, std::string("intent-execution mismatch: ") + ep.header.task,
                   {ex, ez, eg}, "t (s)", "eps (m)");
}

}  // namespace mgap
