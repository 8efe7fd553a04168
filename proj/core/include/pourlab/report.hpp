#ifndef POURLAB_REPORT_HPP_
#define POURLAB_REPORT_HPP_

#include <string>
#include <vector>

#include "pourlab/behavior.hpp"
#include "pourlab/harness.hpp"

namespace pourlab::harness {

struct GridCell {
  int config_index = 0;
  double w_t = 0.0;
  double w_e = 0.0;
  behavior::ConfigSummary summary;
};

// One cell per config index, in ascending index order.
std::vector<GridCell> summarize(const std::vector<LabelRow>& labels);

std::string summary_csv(const std::vector<GridCell>& cells);

// Static SVG 1.1: effort weight on x, time weight on y, colored by outcome class.
// Throws UsageError when `cells` is empty.
std::string render_svg(const std::vector<GridCell>& cells);

}  // namespace pourlab::harness

#endif  // POURLAB_REPORT_HPP_
