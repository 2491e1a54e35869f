#include "hte/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <vector>

#include "hte/csv.hpp"
#include "hte/error.hpp"

namespace hte {

namespace {

constexpr double kWidth = 640.0, kHeight = 480.0;
constexpr double kMarginLeft = 60.0, kMarginRight = 20.0;
constexpr double kMarginTop = 20.0, kMarginBottom = 50.0;

const char* kPalette[] = {"#e08214", "#4393c3", "#7fbc41", "#c51b7d",
                          "#8073ac", "#b2182b", "#35978f", "#666666"};

std::string num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct Chart {
  std::vector<Series> series;
  std::string x_label, y_label;
  double ref_y = std::nan("");  // horizontal reference line
  bool diagonal = false;        // y = x guide
};

double parse_cell(const std::string& cell) {
  return cell == "-" ? std::nan("") : std::strtod(cell.c_str(), nullptr);
}

std::string render(const Chart& chart) {
  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  bool seen = false;
  for (const auto& s : chart.series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!seen) {
        x_lo = x_hi = x;
        y_lo = y_hi = y;
        seen = true;
      }
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!seen) raise(ErrorCode::UnknownKind, "no plottable rows in input");
  if (std::isfinite(chart.ref_y)) {
    y_lo = std::min(y_lo, chart.ref_y);
    y_hi = std::max(y_hi, chart.ref_y);
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;
  const double x_pad = 0.04 * (x_hi - x_lo), y_pad = 0.06 * (y_hi - y_lo);
  x_lo -= x_pad;
  x_hi += x_pad;
  y_lo -= y_pad;
  y_hi += y_pad;

  auto sx = [&](double x) {
    return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * (kWidth - kMarginLeft - kMarginRight);
  };
  auto sy = [&](double y) {
    return kHeight - kMarginBottom -
           (y - y_lo) / (y_hi - y_lo) * (kHeight - kMarginTop - kMarginBottom);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kHeight - kMarginBottom) +
         "\" x2=\"" + num(kWidth - kMarginRight) + "\" y2=\"" + num(kHeight - kMarginBottom) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kMarginTop) + "\" x2=\"" +
         num(kMarginLeft) + "\" y2=\"" + num(kHeight - kMarginBottom) + "\" stroke=\"black\"/>\n";

  for (int tick = 0; tick <= 4; ++tick) {
    const double fx = x_lo + (x_hi - x_lo) * tick / 4.0;
    const double fy = y_lo + (y_hi - y_lo) * tick / 4.0;
    svg += "<text x=\"" + num(sx(fx)) + "\" y=\"" + num(kHeight - kMarginBottom + 16.0) +
           "\" font-size=\"10\" text-anchor=\"middle\">" + num(fx) + "</text>\n";
    svg += "<text x=\"" + num(kMarginLeft - 6.0) + "\" y=\"" + num(sy(fy) + 3.0) +
           "\" font-size=\"10\" text-anchor=\"end\">" + num(fy) + "</text>\n";
  }
  svg += "<text x=\"" + num((kMarginLeft + kWidth - kMarginRight) / 2.0) + "\" y=\"" +
         num(kHeight - 12.0) + "\" font-size=\"12\" text-anchor=\"middle\">" + chart.x_label +
         "</text>\n";
  svg += "<text x=\"14\" y=\"" + num((kMarginTop + kHeight - kMarginBottom) / 2.0) +
         "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         num((kMarginTop + kHeight - kMarginBottom) / 2.0) + ")\">" + chart.y_label +
         "</text>\n";

  if (std::isfinite(chart.ref_y)) {
    svg += "<line x1=\"" + num(sx(x_lo)) + "\" y1=\"" + num(sy(chart.ref_y)) + "\" x2=\"" +
           num(sx(x_hi)) + "\" y2=\"" + num(sy(chart.ref_y)) +
           "\" stroke=\"#555555\" stroke-dasharray=\"5,4\"/>\n";
  }
  if (chart.diagonal) {
    const double lo = std::max(x_lo, y_lo), hi = std::min(x_hi, y_hi);
    if (hi > lo) {
      svg += "<line x1=\"" + num(sx(lo)) + "\" y1=\"" + num(sy(lo)) + "\" x2=\"" + num(sx(hi)) +
             "\" y2=\"" + num(sy(hi)) + "\" stroke=\"#555555\" stroke-dasharray=\"5,4\"/>\n";
    }
  }

  std::size_t color = 0;
  for (const auto& s : chart.series) {
    const char* stroke = kPalette[color % (sizeof(kPalette) / sizeof(kPalette[0]))];
    ++color;
    std::string path;
    bool pen_down = false;
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) {
        pen_down = false;
        continue;
      }
      path += (pen_down ? "L" : "M") + num(sx(x)) + " " + num(sy(y)) + " ";
      pen_down = true;
    }
    svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + stroke +
           "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + num(kWidth - kMarginRight - 4.0) + "\" y=\"" +
           num(kMarginTop + 14.0 * static_cast<double>(color)) +
           "\" font-size=\"11\" text-anchor=\"end\" fill=\"" + stroke + "\">" + s.label +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::size_t need_column(const CsvTable& table, const std::string& name) {
  const std::size_t idx = table.column_index(name);
  if (idx == CsvTable::npos) {
    raise(ErrorCode::UnknownKind, "input lacks column '" + name + "'");
  }
  return idx;
}

// Group rows into labeled series keyed by the given columns.
std::vector<Series> grouped_series(const CsvTable& table, const std::vector<std::string>& keys,
                                   const std::string& x_col, const std::string& y_col) {
  std::vector<std::size_t> key_idx;
  for (const auto& key : keys) key_idx.push_back(need_column(table, key));
  const std::size_t xi = need_column(table, x_col);
  const std::size_t yi = need_column(table, y_col);

  std::map<std::string, Series> groups;
  std::vector<std::string> order;
  for (const auto& row : table.rows) {
    std::string label;
    for (std::size_t k : key_idx) {
      if (!label.empty()) label += "/";
      label += row[k];
    }
    if (!groups.count(label)) {
      order.push_back(label);
      groups[label].label = label;
    }
    groups[label].points.emplace_back(parse_cell(row[xi]), parse_cell(row[yi]));
  }
  std::vector<Series> out;
  for (const auto& label : order) out.push_back(groups[label]);
  return out;
}

// Triangular-kernel density trace from raw values (plot smoothing only).
Series density_series(const std::string& label, std::vector<double> values) {
  Series s;
  s.label = label;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const double lo = values.front(), hi = values.back();
  const double span = (hi > lo) ? hi - lo : 1.0;
  const double bandwidth = span / 25.0;
  constexpr int kPoints = 120;
  for (int g = 0; g < kPoints; ++g) {
    const double x = lo - 2 * bandwidth +
                     (span + 4 * bandwidth) * static_cast<double>(g) / (kPoints - 1);
    double mass = 0.0;
    for (double v : values) {
      const double u = std::abs(x - v) / bandwidth;
      if (u < 1.0) mass += 1.0 - u;
    }
    s.points.emplace_back(x, mass / (static_cast<double>(values.size()) * bandwidth));
  }
  return s;
}

}  // namespace

void emit_svg_chart(const std::string& kind, const std::filesystem::path& csv_in,
                    const std::filesystem::path& svg_out) {
  const CsvTable table = read_csv(csv_in);
  if (table.rows.empty()) raise(ErrorCode::UnknownKind, "empty input table");

  Chart chart;
  if (kind == "subgroup_ate") {
    chart.series = grouped_series(table, {"split"}, "mean_predicted_ite", "risk_ratio");
    chart.x_label = "mean predicted ITE";
    chart.y_label = "ATE (risk ratio)";
    chart.ref_y = 1.0;
  } else if (kind == "outcome_ite_curves") {
    chart.series = grouped_series(table, {"split", "arm"}, "ite", "probability");
    chart.x_label = "predicted ITE";
    chart.y_label = "outcome probability";
  } else if (kind == "calibration") {
    chart.series = grouped_series(table, {"split", "arm"}, "mean_predicted", "observed_rate");
    chart.x_label = "mean predicted";
    chart.y_label = "observed rate";
    chart.diagonal = true;
  } else if (kind == "roc") {
    chart.series = grouped_series(table, {"split", "arm"}, "fpr", "tpr");
    chart.x_label = "false positive rate";
    chart.y_label = "true positive rate";
    chart.diagonal = true;
  } else if (kind == "ite_density") {
    const std::size_t split_idx = need_column(table, "split");
    const std::size_t ite_idx = need_column(table, "ite");
    std::map<std::string, std::vector<double>> values;
    std::vector<std::string> order;
    for (const auto& row : table.rows) {
      if (!values.count(row[split_idx])) order.push_back(row[split_idx]);
      values[row[split_idx]].push_back(parse_cell(row[ite_idx]));
    }
    for (const auto& label : order) chart.series.push_back(density_series(label, values[label]));
    chart.x_label = "predicted ITE";
    chart.y_label = "density";
    chart.ref_y = 0.0;
  } else if (kind == "benefit_harm_density") {
    const std::size_t split_idx = need_column(table, "split");
    const std::size_t stratum_idx = need_column(table, "stratum");
    const std::size_t rd_idx = need_column(table, "risk_difference");
    std::map<std::string, std::vector<double>> values;
    std::vector<std::string> order;
    for (const auto& row : table.rows) {
      const std::string label = row[split_idx] + "/" + row[stratum_idx];
      if (!values.count(label)) order.push_back(label);
      values[label].push_back(parse_cell(row[rd_idx]));
    }
    for (const auto& label : order) chart.series.push_back(density_series(label, values[label]));
    chart.x_label = "ATE (risk difference)";
    chart.y_label = "density";
    chart.ref_y = 0.0;
  } else {
    raise(ErrorCode::UnknownKind, "unknown chart kind '" + kind + "'");
  }

  write_text_file(svg_out, render(chart));
}

}  // namespace hte
