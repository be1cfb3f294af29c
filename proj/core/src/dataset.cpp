#include "iris/dataset.hpp"

#include <algorithm>
#include <filesystem>

#include "iris/errors.hpp"

namespace fs = std::filesystem;

namespace iris {

std::vector<DatasetItem> scan_dataset(const std::string& root,
                                      bool require_masks) {
  const fs::path images = fs::path(root) / "images";
  const fs::path masks = fs::path(root) / "masks";
  std::error_code ec;
  if (!fs::is_directory(images, ec))
    throw Error(ErrorKind::Io, "missing images directory: " + images.string());

  std::vector<DatasetItem> items;
  for (const auto& entry : fs::directory_iterator(images)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() != ".pgm") continue;
    DatasetItem item;
    item.stem = entry.path().stem().string();
    item.image_path = entry.path().string();
    const fs::path mask = masks / entry.path().filename();
    if (fs::is_regular_file(mask, ec)) {
      item.mask_path = mask.string();
    } else if (require_masks) {
      throw Error(ErrorKind::Io, "missing mask for " + item.stem);
    }
    items.push_back(std::move(item));
  }
  if (items.empty())
    throw Error(ErrorKind::Io, "no .pgm images under " + images.string());
  std::sort(items.begin(), items.end(),
            [](const DatasetItem& a, const DatasetItem& b) {
              return a.stem < b.stem;
            });
  return items;
}

std::string identity_of(const std::string& stem) {
  return stem.substr(0, stem.find('_'));
}

std::vector<TrainSample> load_samples(const std::vector<DatasetItem>& items) {
  std::vector<TrainSample> samples;
  samples.reserve(items.size());
  for (const auto& item : items) {
    if (item.mask_path.empty())
      throw Error(ErrorKind::Io, "sample without mask: " + item.stem);
    TrainSample s;
    const Image img = read_pgm(item.image_path);
    const Image msk = read_pgm(item.mask_path);
    if (img.height != msk.height || img.width != msk.width)
      throw Error(ErrorKind::Dimension,
                  "image/mask dims differ for " + item.stem);
    s.image = image_to_tensor(img);
    s.gt = image_to_mask(msk);
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace iris
