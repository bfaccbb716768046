#include "advr/datasets.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "advr/io.hpp"

namespace advr {

Tensor Dataset::example(std::size_t i) const {
  const auto r = features.row(i);
  return Tensor::vector(std::vector<double>(r.begin(), r.end()));
}

void Dataset::validate() const {
  if (features.rank() != 2 || features.rows() != labels.size()) {
    throw Error(ErrorKind::Argument, "dataset feature rows do not match label count");
  }
  for (std::size_t y : labels) {
    if (y >= class_count) throw Error(ErrorKind::Argument, "label out of range");
  }
  for (double v : features.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::Argument, "feature outside [0,1]");
  }
}

Dataset Dataset::subset(const std::vector<std::size_t> &indices) const {
  Dataset out;
  out.class_count = class_count;
  const std::size_t d = dim();
  std::vector<double> flat;
  flat.reserve(indices.size() * d);
  for (std::size_t i : indices) {
    const auto r = features.row(i);
    flat.insert(flat.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
  }
  if (!indices.empty()) out.features = Tensor({indices.size(), d}, std::move(flat));
  return out;
}

Dataset gen_gaussian_mixture(const GaussianMixtureConfig &cfg) {
  if (cfg.classes < 2) throw Error(ErrorKind::Argument, "mixture needs at least 2 classes");
  if (cfg.dim < 2) throw Error(ErrorKind::Argument, "mixture needs dimension >= 2");
  if (cfg.n_per_class == 0) throw Error(ErrorKind::Argument, "mixture needs n_per_class >= 1");
  if (!(cfg.spread > 0.0)) throw Error(ErrorKind::Argument, "mixture spread must be positive");

  RngStream rng(cfg.seed);
  std::vector<double> means(cfg.classes * cfg.dim);
  for (double &m : means) m = rng.uniform(0.2, 0.8);

  const std::size_t n = cfg.classes * cfg.n_per_class;
  std::vector<double> flat;
  flat.reserve(n * cfg.dim);
  Dataset data;
  data.class_count = cfg.classes;
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    for (std::size_t i = 0; i < cfg.n_per_class; ++i) {
      for (std::size_t j = 0; j < cfg.dim; ++j) {
        const double v = means[c * cfg.dim + j] + cfg.spread * rng.normal();
        flat.push_back(std::clamp(v, 0.0, 1.0));
      }
      data.labels.push_back(c);
    }
  }
  data.features = Tensor({n, cfg.dim}, std::move(flat));
  return data;
}

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

class BigEndianReader {
 public:
  BigEndianReader(const std::string &bytes, std::string name) : bytes_(bytes), name_(std::move(name)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes_[pos_++]);
    return v;
  }

  std::string_view take(std::size_t n) {
    need(n);
    std::string_view out(bytes_.data() + pos_, n);
    pos_ += n;
    return out;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorKind::Truncated, name_ + " is truncated at byte " + std::to_string(pos_));
    }
  }

  const std::string &bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

std::string hex32(std::uint32_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s = "0x";
  for (int shift = 28; shift >= 0; shift -= 4) s += digits[(v >> shift) & 0xF];
  return s;
}

}  // namespace

Dataset load_idx(const std::filesystem::path &images_path, const std::filesystem::path &labels_path) {
  const std::string image_bytes = read_file(images_path);
  const std::string label_bytes = read_file(labels_path);
  BigEndianReader images(image_bytes, images_path.string());
  BigEndianReader labels(label_bytes, labels_path.string());

  const std::uint32_t image_magic = images.u32();
  if (image_magic != kImagesMagic) {
    throw Error(ErrorKind::WrongMagic, images_path.string() + ": expected magic 0x00000803, got " + hex32(image_magic));
  }
  const std::uint32_t label_magic = labels.u32();
  if (label_magic != kLabelsMagic) {
    throw Error(ErrorKind::WrongMagic, labels_path.string() + ": expected magic 0x00000801, got " + hex32(label_magic));
  }

  const std::uint32_t count = images.u32();
  const std::uint32_t rows = images.u32();
  const std::uint32_t cols = images.u32();
  const std::uint32_t label_count = labels.u32();
  if (count != label_count) {
    throw Error(ErrorKind::CountMismatch, "images file has " + std::to_string(count) +
                                              " items, labels file has " + std::to_string(label_count));
  }
  if (count == 0 || rows == 0 || cols == 0) {
    throw Error(ErrorKind::MalformedPayload, "IDX file declares an empty extent");
  }

  const std::size_t d = static_cast<std::size_t>(rows) * cols;
  const std::string_view pixels = images.take(static_cast<std::size_t>(count) * d);
  const std::string_view raw_labels = labels.take(count);

  Dataset data;
  std::vector<double> flat(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    flat[i] = static_cast<double>(static_cast<unsigned char>(pixels[i])) / 255.0;
  }
  data.features = Tensor({count, d}, std::move(flat));
  std::size_t max_label = 0;
  for (char c : raw_labels) {
    const std::size_t y = static_cast<unsigned char>(c);
    data.labels.push_back(y);
    max_label = std::max(max_label, y);
  }
  data.class_count = max_label + 1;
  return data;
}

Split split(const Dataset &data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::Argument, "test fraction must lie strictly between 0 and 1");
  }
  if (data.size() < 2) throw Error(ErrorKind::Argument, "need at least 2 examples to split");
  RngStream rng(seed);
  const std::vector<std::size_t> order = permutation(data.size(), rng);
  const auto n_test = static_cast<std::size_t>(
      std::clamp<double>(std::llround(test_fraction * static_cast<double>(data.size())), 1.0,
                         static_cast<double>(data.size() - 1)));
  std::vector<std::size_t> test_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  return {data.subset(train_idx), data.subset(test_idx)};
}

}  // namespace advr
