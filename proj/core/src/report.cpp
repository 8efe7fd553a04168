#include "pourlab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "pourlab/csv.hpp"
#include "pourlab/error.hpp"

namespace pourlab::harness {

using behavior::BehaviorLabel;
using behavior::SkillClass;

std::vector<GridCell> summarize(const std::vector<LabelRow>& labels) {
  std::map<int, std::vector<BehaviorLabel>> by_config;
  std::map<int, std::pair<double, double>> weights;
  for (const auto& r : labels) {
    by_config[r.config_index].push_back(r.label);
    weights.emplace(r.config_index, std::pair(r.w_t, r.w_e));
  }
  std::vector<GridCell> cells;
  for (const auto& [index, list] : by_config) {
    GridCell c;
    c.config_index = index;
    c.w_t = weights[index].first;
    c.w_e = weights[index].second;
    c.summary = behavior::aggregate(list);
    cells.push_back(c);
  }
  return cells;
}

std::string summary_csv(const std::vector<GridCell>& cells) {
  std::ostringstream out;
  std::vector<std::string> header{"config_index", "w_t", "w_e", "majority", "class", "counted"};
  for (BehaviorLabel l : behavior::kAllLabels) header.emplace_back(behavior::to_string(l));
  csv::write_row(out, header);
  for (const auto& c : cells) {
    std::vector<std::string> row{std::to_string(c.config_index), csv::format_double(c.w_t),
                                 csv::format_double(c.w_e),
                                 std::string(behavior::to_string(c.summary.majority)),
                                 std::string(behavior::to_string(behavior::skill_class(c.summary.majority))),
                                 std::to_string(c.summary.counted)};
    for (int count : c.summary.histogram) row.push_back(std::to_string(count));
    csv::write_row(out, row);
  }
  return out.str();
}

namespace {

const char* fill_color(SkillClass cls) {
  switch (cls) {
    case SkillClass::kOriginalTask: return "#3465a4";
    case SkillClass::kNovelSkill: return "#4e9a06";
    case SkillClass::kNoPolicy: return "#cc0000";
    case SkillClass::kExcluded: return "#888a85";
  }
  return "#000000";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string render_svg(const std::vector<GridCell>& cells) {
  if (cells.empty()) throw UsageError("render_svg: no grid cells");
  std::vector<double> xs, ys;
  for (const auto& c : cells) {
    xs.push_back(c.w_e);
    ys.push_back(c.w_t);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end(), std::greater<>());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  constexpr int kCellW = 120, kCellH = 64, kLeft = 90, kTop = 50, kLegendH = 70;
  const int width = kLeft + kCellW * static_cast<int>(xs.size()) + 20;
  const int grid_h = kCellH * static_cast<int>(ys.size());
  const int height = kTop + grid_h + 50 + kLegendH;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
      << "\" font-family=\"sans-serif\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">"
      << "Majority behavior per reward weight pair</text>\n";

  for (const auto& c : cells) {
    const auto col = std::find(xs.begin(), xs.end(), c.w_e) - xs.begin();
    const auto row = std::find(ys.begin(), ys.end(), c.w_t) - ys.begin();
    const int x = kLeft + static_cast<int>(col) * kCellW;
    const int y = kTop + static_cast<int>(row) * kCellH;
    const SkillClass cls = behavior::skill_class(c.summary.majority);
    const int majority_count = c.summary.histogram[static_cast<int>(c.summary.majority)];
    svg << "<g>\n"
        << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCellW << "\" height=\""
        << kCellH << "\" fill=\"" << fill_color(cls) << "\" stroke=\"#ffffff\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << x + kCellW / 2 << "\" y=\"" << y + 28
        << "\" font-size=\"13\" fill=\"#ffffff\" text-anchor=\"middle\">"
        << behavior::to_string(c.summary.majority) << "</text>\n"
        << "<text x=\"" << x + kCellW / 2 << "\" y=\"" << y + 46
        << "\" font-size=\"11\" fill=\"#ffffff\" text-anchor=\"middle\">#" << c.config_index << "  "
        << majority_count << '/' << c.summary.counted << "</text>\n"
        << "</g>\n";
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    svg << "<text x=\"" << kLeft + static_cast<int>(i) * kCellW + kCellW / 2 << "\" y=\""
        << kTop + grid_h + 18 << "\" font-size=\"12\" text-anchor=\"middle\">" << num(xs[i])
        << "</text>\n";
  }
  for (std::size_t i = 0; i < ys.size(); ++i) {
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << kTop + static_cast<int>(i) * kCellH + kCellH / 2 + 4
        << "\" font-size=\"12\" text-anchor=\"end\">" << num(ys[i]) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + kCellW * static_cast<int>(xs.size()) / 2 << "\" y=\""
      << kTop + grid_h + 38 << "\" font-size=\"13\" text-anchor=\"middle\">effort weight w_e</text>\n"
      << "<text x=\"20\" y=\"" << kTop + grid_h / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << kTop + grid_h / 2
      << ")\">time weight w_t</text>\n";

  const std::pair<SkillClass, const char*> legend[] = {
      {SkillClass::kOriginalTask, "original goal achieved"},
      {SkillClass::kNovelSkill, "novel skill, goal missed"},
      {SkillClass::kNoPolicy, "no viable policy"},
      {SkillClass::kExcluded, "all trials excluded"}};
  const int legend_y = kTop + grid_h + 56;
  for (int i = 0; i < 4; ++i) {
    const int lx = kLeft + (i % 2) * 220;
    const int ly = legend_y + (i / 2) * 22;
    svg << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"14\" height=\"14\" fill=\""
        << fill_color(legend[i].first) << "\"/>\n"
        << "<text x=\"" << lx + 20 << "\" y=\"" << ly + 12 << "\" font-size=\"12\">"
        << legend[i].second << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace pourlab::harness
