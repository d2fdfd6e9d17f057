#pragma once

#include "intact/types.hpp"

#include <utility>

namespace intact {

/// Checks row agreement, emptiness and finiteness of every view.
MultiViewDataset validate_dataset(std::vector<Matrix> views,
                                  std::optional<std::vector<int>> labels = std::nullopt);

/// Zero-mean, unit-deviation columns per view. Constant columns keep scale 1.
std::pair<MultiViewDataset, Standardization> standardize_views(const MultiViewDataset& dataset);

bool all_finite(const Matrix& a);

}  // namespace intact
