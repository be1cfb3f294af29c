#pragma once

#include <string>
#include <vector>

#include "iris/image.hpp"
#include "iris/train.hpp"

namespace iris {

// Directory layout: <root>/images/*.pgm and, optionally, <root>/masks/ with
// identical basenames (nonzero pixels mark iris). The identity of a sample
// is its file stem up to the first underscore.
struct DatasetItem {
  std::string stem;        // basename without extension
  std::string image_path;
  std::string mask_path;   // empty when masks are absent
};

std::vector<DatasetItem> scan_dataset(const std::string& root,
                                      bool require_masks);

std::string identity_of(const std::string& stem);

// Loads image/mask pairs as training samples; dims are cross-checked.
std::vector<TrainSample> load_samples(const std::vector<DatasetItem>& items);

}  // namespace iris
