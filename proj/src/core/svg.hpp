#pragma once

#include <string>

#include "core/report.hpp"

namespace lqrlr {

// Static 800x600 chart mirroring the report: cost-ratio lines with min/max
// envelope bars for scenarios 1 and 4, grayscale success-probability heat
// maps (one panel per design, white = 1, black = 0) for scenarios 2 and 3.
std::string render_svg(const ScenarioReport& report);

}  // namespace lqrlr
