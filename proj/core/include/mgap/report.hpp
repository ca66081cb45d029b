#pragma once

#include <string>
#include <vector>

#include "mgap/evaluate.hpp"
#include "mgap/stiffness.hpp"

namespace mgap {

// Fixed-precision CSV cell formatting so identical runs are byte-identical.
std::string csv_num(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    void write(const std::string& path) const;
};

// Minimal SVG line/scatter plots.
struct SvgSeries {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x, y;
    bool points_only = false;
};

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<SvgSeries>& series, const std::string& x_label = "",
                    const std::string& y_label = "");

// Table and plot emitters matching the documented report layout.
void write_stiffness_csv(const std::string& path, const std::vector<std::string>& row_labels,
                         const std::vector<StiffnessResult>& results);
void write_stiffness_svg(const std::string& path, const StiffnessResult& r, double fitted_k);
void write_manip_csv(const std::string& path,
                     const std::vector<std::pair<std::string, Metrics>>& rows);
void write_dynamic_csv(const std::string& path,
                       const std::vector<std::pair<std::string, Metrics>>& rows);
void write_latency_csv(const std::string& path, const std::vector<SweepRow>& rows);
void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows);

// Per-phase mismatch trace plot from one oracle episode.
void write_eps_trace_svg(const std::string& path, const Episode& episode);

}  // namespace mgap
