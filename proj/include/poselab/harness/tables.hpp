#pragma once

// Result tables: datasets as rows, experiment configurations as columns,
// each cell "Xm, Y°" medians, with unweighted per-column averages and an
// optional improvement column computed between two designated columns.
// Missing cells are emitted as "-". Markdown for reading, CSV at full
// precision for recomputation.

#include <algorithm>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "poselab/harness/metrics.hpp"
#include "poselab/util/error.hpp"

namespace poselab::harness {

struct EvalCell {
    double meters = 0.0;
    double degrees = 0.0;
    bool present = false;
};

struct RunSummary {
    std::string dataset;
    std::string column_key;  // ExperimentConfig::column_key()
    double median_position = 0.0;
    double median_orientation = 0.0;
};

struct TableLayoutSpec {
    std::string id;
    std::vector<std::pair<std::string, std::string>> columns;  // title, key
    int improvement_from = -1;
    int improvement_to = -1;
};

inline const std::vector<TableLayoutSpec>& table_layouts() {
    static const std::vector<TableLayoutSpec> layouts = {
        {"table1",
         {{"Centered Crop", "fc+centered_crop"},
          {"Whole Field of View", "fc+whole_fov"}},
         0, 1},
        {"table2",
         {{"Baseline", "fc+centered_crop"},
          {"Baseline-Augmented", "fc+centered_crop+aug"},
          {"Whole view-Augmented", "fc+whole_fov+aug"}},
         0, 2},
        {"table3",
         {{"Baseline", "fc+centered_crop"},
          {"Length 1", "lstm1+centered_crop"},
          {"Length 5", "lstm5+centered_crop"},
          {"Length 10", "lstm10+centered_crop"},
          {"Length 20", "lstm20+centered_crop"}},
         -1, -1},
        {"table4",
         {{"Baseline", "fc+centered_crop"},
          {"Length 1", "lstm1+whole_fov"},
          {"Length 5", "lstm5+whole_fov"},
          {"Length 10", "lstm10+whole_fov"},
          {"Length 20", "lstm20+whole_fov"}},
         -1, -1},
        {"table5",
         {{"Baseline", "fc+centered_crop"},
          {"Whole FOV", "fc+whole_fov"},
          {"Augmented", "fc+centered_crop+aug"},
          {"Combined", "lstm1+whole_fov+aug"}},
         0, 3},
    };
    return layouts;
}

inline const TableLayoutSpec& table_layout(const std::string& id) {
    for (const auto& l : table_layouts())
        if (l.id == id) return l;
    throw DataError("report: unknown table layout '" + id + "'");
}

struct TableData {
    std::string layout_id;
    std::vector<std::string> row_names;
    std::vector<std::string> col_titles;
    std::vector<std::vector<EvalCell>> cells;  // [row][col]
    int improvement_from = -1;
    int improvement_to = -1;
};

inline TableData table_for_layout(const std::string& layout_id,
                                  std::span<const RunSummary> runs) {
    const auto& layout = table_layout(layout_id);
    TableData t;
    t.layout_id = layout_id;
    t.improvement_from = layout.improvement_from;
    t.improvement_to = layout.improvement_to;
    for (const auto& [title, key] : layout.columns) t.col_titles.push_back(title);

    for (const auto& run : runs)
        if (std::find(t.row_names.begin(), t.row_names.end(), run.dataset) ==
            t.row_names.end())
            t.row_names.push_back(run.dataset);

    t.cells.assign(t.row_names.size(),
                   std::vector<EvalCell>(layout.columns.size()));
    for (const auto& run : runs) {
        const auto row =
            static_cast<std::size_t>(std::find(t.row_names.begin(),
                                               t.row_names.end(), run.dataset) -
                                     t.row_names.begin());
        for (std::size_t col = 0; col < layout.columns.size(); ++col)
            if (layout.columns[col].second == run.column_key)
                t.cells[row][col] = {run.median_position,
                                     run.median_orientation, true};
    }
    return t;
}

struct TableOutput {
    std::string markdown;
    std::string csv;
};

namespace detail {

inline std::string cell_text(const EvalCell& c, RoundingMode mode) {
    if (!c.present) return "-, -";
    return format_meters(c.meters, mode) + ", " + format_degrees(c.degrees, mode);
}

inline std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline TableOutput emit_table(const TableData& t,
                              RoundingMode mode = RoundingMode::truncate) {
    const std::size_t n_cols = t.col_titles.size();
    const bool has_improvement = t.improvement_from >= 0 && t.improvement_to >= 0;

    // unweighted means of the per-dataset medians; present only when the
    // column is complete
    std::vector<EvalCell> averages(n_cols);
    for (std::size_t col = 0; col < n_cols; ++col) {
        EvalCell avg;
        avg.present = !t.row_names.empty();
        for (std::size_t row = 0; row < t.row_names.size(); ++row) {
            const auto& c = t.cells[row][col];
            if (!c.present) {
                avg.present = false;
                break;
            }
            avg.meters += c.meters;
            avg.degrees += c.degrees;
        }
        if (avg.present) {
            avg.meters /= static_cast<double>(t.row_names.size());
            avg.degrees /= static_cast<double>(t.row_names.size());
        }
        averages[col] = avg;
    }

    // per-row improvements between the designated columns
    struct Improvement {
        double pos = 0.0, ori = 0.0;
        bool present = false;
    };
    std::vector<Improvement> improvements(t.row_names.size());
    Improvement avg_improvement;
    std::size_t improvement_rows = 0;
    if (has_improvement) {
        for (std::size_t row = 0; row < t.row_names.size(); ++row) {
            const auto& from = t.cells[row][static_cast<std::size_t>(t.improvement_from)];
            const auto& to = t.cells[row][static_cast<std::size_t>(t.improvement_to)];
            if (from.present && to.present && from.meters > 0.0 &&
                from.degrees > 0.0) {
                improvements[row] = {improvement_percent(from.meters, to.meters),
                                     improvement_percent(from.degrees, to.degrees),
                                     true};
                avg_improvement.pos += improvements[row].pos;
                avg_improvement.ori += improvements[row].ori;
                ++improvement_rows;
            }
        }
        if (improvement_rows == t.row_names.size() && improvement_rows > 0) {
            avg_improvement.pos /= static_cast<double>(improvement_rows);
            avg_improvement.ori /= static_cast<double>(improvement_rows);
            avg_improvement.present = true;
        }
    }

    TableOutput out;
    // markdown
    out.markdown = "| Dataset |";
    for (const auto& title : t.col_titles) out.markdown += " " + title + " |";
    if (has_improvement) out.markdown += " Improvement |";
    out.markdown += "\n|---|";
    for (std::size_t c = 0; c < n_cols; ++c) out.markdown += "---|";
    if (has_improvement) out.markdown += "---|";
    out.markdown += "\n";
    for (std::size_t row = 0; row < t.row_names.size(); ++row) {
        out.markdown += "| " + t.row_names[row] + " |";
        for (std::size_t col = 0; col < n_cols; ++col)
            out.markdown += " " + detail::cell_text(t.cells[row][col], mode) + " |";
        if (has_improvement) {
            const auto& imp = improvements[row];
            out.markdown +=
                imp.present ? " " + format_improvement(imp.pos, mode) + ", " +
                                  format_improvement(imp.ori, mode) + " |"
                            : " -, - |";
        }
        out.markdown += "\n";
    }
    out.markdown += "| Average |";
    for (std::size_t col = 0; col < n_cols; ++col)
        out.markdown += " " + detail::cell_text(averages[col], mode) + " |";
    if (has_improvement)
        out.markdown += avg_improvement.present
                            ? " " + format_improvement(avg_improvement.pos, mode) +
                                  ", " + format_improvement(avg_improvement.ori, mode) +
                                  " |"
                            : " -, - |";
    out.markdown += "\n\nDisplay rounding: ";
    out.markdown += mode == RoundingMode::truncate ? "truncate (toward zero)"
                                                   : "round (half away from zero)";
    out.markdown += "\n";

    // csv, full precision
    out.csv = "dataset";
    for (const auto& title : t.col_titles)
        out.csv += "," + title + " [m]," + title + " [deg]";
    if (has_improvement) out.csv += ",improvement pos [%],improvement ori [%]";
    out.csv += "\n";
    auto csv_row = [&](const std::string& name,
                       const std::vector<EvalCell>& cells,
                       const Improvement& imp) {
        out.csv += name;
        for (const auto& c : cells) {
            out.csv += c.present ? "," + detail::csv_number(c.meters) + "," +
                                       detail::csv_number(c.degrees)
                                 : ",,";
        }
        if (has_improvement)
            out.csv += imp.present ? "," + detail::csv_number(imp.pos) + "," +
                                         detail::csv_number(imp.ori)
                                   : ",,";
        out.csv += "\n";
    };
    for (std::size_t row = 0; row < t.row_names.size(); ++row)
        csv_row(t.row_names[row], t.cells[row], improvements[row]);
    csv_row("Average", averages, avg_improvement);
    return out;
}

}  // namespace poselab::harness
