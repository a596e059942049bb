#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stylo/eval.hpp"

namespace stylo {

/// Two overlaid class histograms over shared bins, as a standalone SVG.
std::string histogram_svg(const std::string& feature, std::span<const double> human,
                          std::span<const double> generated, std::size_t bins = 20);

/// One ROC polyline per (label, curve) plus the chance diagonal.
std::string roc_svg(const std::vector<std::pair<std::string, std::vector<RocPoint>>>& curves,
                    const std::string& title = "ROC");

}  // namespace stylo
