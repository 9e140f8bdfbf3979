#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include "specclip/harness.hpp"

namespace specclip {

namespace {

double standard_normal(RngStream& rng) { return gaussian_vector(1, 1.0, rng)[0]; }

// Marsaglia-Tsang; the alpha < 1 case boosts through Gamma(alpha + 1).
double gamma_draw(double alpha, RngStream& rng) {
  if (alpha < 1.0) {
    const double u = rng.next_uniform();
    return gamma_draw(alpha + 1.0, rng) * std::pow(u, 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = standard_normal(rng);
    const double v = std::pow(1.0 + c * x, 3);
    if (v <= 0.0) continue;
    const double u = rng.next_uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

Vec dirichlet_draw(std::size_t k, double alpha, RngStream& rng) {
  Vec pi(k, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    pi[i] = gamma_draw(alpha, rng);
    sum += pi[i];
  }
  for (double& p : pi) p /= sum;
  return pi;
}

std::uint32_t read_be_u32(std::istream& in, const std::string& path, std::size_t offset) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) {
    throw FormatError(path + ": truncated at byte offset " + std::to_string(offset));
  }
  return (static_cast<std::uint32_t>(buf[0]) << 24) | (static_cast<std::uint32_t>(buf[1]) << 16) |
         (static_cast<std::uint32_t>(buf[2]) << 8) | static_cast<std::uint32_t>(buf[3]);
}

void zscore_fit_apply(Batch& train, Batch& test) {
  const std::size_t dim = train.input_dim;
  Vec mean(dim, 0.0), sd(dim, 0.0);
  const double n = static_cast<double>(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double* x = train.example(i);
    for (std::size_t j = 0; j < dim; ++j) mean[j] += x[j];
  }
  for (double& m : mean) m /= n;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double* x = train.example(i);
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = x[j] - mean[j];
      sd[j] += d * d;
    }
  }
  for (double& s : sd) {
    s = std::sqrt(s / n);
    if (s == 0.0) s = 1.0;  // constant feature passes through centered
  }
  auto apply = [&](Batch& b) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      double* x = b.inputs.data() + i * dim;
      for (std::size_t j = 0; j < dim; ++j) x[j] = (x[j] - mean[j]) / sd[j];
    }
  };
  apply(train);
  apply(test);
}

}  // namespace

void DatasetSpec::validate() const {
  if (n_classes < 2) throw ConfigError("dataset: need at least 2 classes");
  if (feature_dim == 0) throw ConfigError("dataset: feature_dim must be positive");
  if (n_train == 0 || n_test == 0) throw ConfigError("dataset: split sizes must be positive");
  if (skew && !(skew->alpha > 0.0)) throw ConfigError("dataset: skew alpha must be positive");
  if (source != DataSource::synthetic_blobs && path.empty()) {
    throw ConfigError("dataset: file-backed source needs a path");
  }
}

DataSplit make_synthetic_blobs(const DatasetSpec& spec, RngStream& rng) {
  spec.validate();
  const std::size_t dim = spec.feature_dim;
  // Mean of class c sits on axis (c mod dim), one ring further out per wrap.
  auto class_mean = [&](std::size_t c, std::size_t j) {
    const std::size_t axis = c % dim;
    const double ring = 1.0 + static_cast<double>(c / dim);
    return j == axis ? spec.separation * ring : 0.0;
  };
  auto fill = [&](std::size_t n) {
    Batch b;
    b.input_dim = dim;
    b.inputs.reserve(n * dim);
    b.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t label = i % spec.n_classes;
      Vec x = gaussian_vector(dim, 1.0, rng);
      for (std::size_t j = 0; j < dim; ++j) x[j] += class_mean(label, j);
      b.push_example(x.data(), label);
    }
    return b;
  };
  DataSplit split;
  split.train = fill(spec.n_train);
  split.test = fill(spec.n_test);
  return split;
}

std::vector<std::size_t> dirichlet_skew(const std::vector<std::size_t>& labels, double alpha,
                                        RngStream& rng) {
  if (!(alpha > 0.0)) throw ConfigError("dirichlet_skew: alpha must be positive");
  if (labels.empty()) throw ConfigError("dirichlet_skew: empty label set");
  const std::size_t n_classes = 1 + *std::max_element(labels.begin(), labels.end());

  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& cls : by_class) {
    if (cls.empty()) throw ConfigError("dirichlet_skew: every class needs at least one example");
  }

  const Vec pi = dirichlet_draw(n_classes, alpha, rng);

  // Largest-remainder rounding of pi * n. The fractional +1 units go to the
  // largest remainders that still have spare examples, so the total stays n
  // whenever the floors fit. A floor exceeding its class pool is a genuine
  // shortfall: it is capped, never redistributed (that would distort pi).
  const std::size_t n = labels.size();
  std::vector<std::size_t> want(n_classes, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t floor_total = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const double target = pi[c] * static_cast<double>(n);
    want[c] = static_cast<std::size_t>(std::floor(target));
    floor_total += want[c];
    remainders.push_back({target - std::floor(target), c});
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::size_t units = n > floor_total ? n - floor_total : 0;
  for (const auto& [frac, c] : remainders) {
    if (units == 0) break;
    if (want[c] < by_class[c].size()) {
      ++want[c];
      --units;
    }
  }

  bool clipped = units > 0;
  std::vector<std::size_t> kept;
  kept.reserve(n);
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::vector<std::size_t>& pool = by_class[c];
    if (want[c] > pool.size()) {
      want[c] = pool.size();
      clipped = true;
    }
    // Partial Fisher-Yates over the class pool.
    for (std::size_t i = 0; i < want[c]; ++i) {
      const std::size_t span = pool.size() - i;
      const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % span);
      std::swap(pool[i], pool[j]);
      kept.push_back(pool[i]);
    }
  }
  if (clipped) {
    std::cerr << "dirichlet_skew: class availability limits the skewed set to " << kept.size()
              << " of " << n << " examples\n";
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

IdxImages load_idx_images(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open");
  const std::uint32_t magic = read_be_u32(in, path, 0);
  if (magic != 0x00000803u) {
    std::ostringstream msg;
    msg << path << ": bad image magic 0x" << std::hex << magic << " at byte offset 0";
    throw FormatError(msg.str());
  }
  IdxImages out;
  out.count = read_be_u32(in, path, 4);
  out.rows = read_be_u32(in, path, 8);
  out.cols = read_be_u32(in, path, 12);
  const std::size_t n_pixels = out.count * out.rows * out.cols;
  std::vector<unsigned char> raw(n_pixels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n_pixels));
  if (static_cast<std::size_t>(in.gcount()) != n_pixels) {
    throw FormatError(path + ": truncated at byte offset " +
                      std::to_string(16 + static_cast<std::size_t>(in.gcount())));
  }
  out.pixels.resize(n_pixels);
  for (std::size_t i = 0; i < n_pixels; ++i) out.pixels[i] = raw[i] / 255.0;
  return out;
}

std::vector<std::size_t> load_idx_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open");
  const std::uint32_t magic = read_be_u32(in, path, 0);
  if (magic != 0x00000801u) {
    std::ostringstream msg;
    msg << path << ": bad label magic 0x" << std::hex << magic << " at byte offset 0";
    throw FormatError(msg.str());
  }
  const std::uint32_t count = read_be_u32(in, path, 4);
  std::vector<unsigned char> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count) {
    throw FormatError(path + ": truncated at byte offset " +
                      std::to_string(8 + static_cast<std::size_t>(in.gcount())));
  }
  return std::vector<std::size_t>(raw.begin(), raw.end());
}

namespace {

Batch idx_to_batch(const IdxImages& images, const std::vector<std::size_t>& labels,
                   std::optional<std::size_t> subset, const std::string& what) {
  if (images.count != labels.size()) {
    throw FormatError(what + ": image/label counts differ (" + std::to_string(images.count) +
                      " vs " + std::to_string(labels.size()) + ")");
  }
  const std::size_t dim = images.rows * images.cols;
  std::size_t n = images.count;
  if (subset && *subset < n) n = *subset;
  Batch b;
  b.input_dim = dim;
  b.inputs.assign(images.pixels.begin(), images.pixels.begin() + n * dim);
  b.labels.assign(labels.begin(), labels.begin() + n);
  return b;
}

}  // namespace

DataSplit load_mnist_idx(const std::string& dir, std::optional<std::size_t> subset_train,
                         std::optional<std::size_t> subset_test) {
  const std::string sep = dir.empty() || dir.back() == '/' ? "" : "/";
  DataSplit split;
  split.train = idx_to_batch(load_idx_images(dir + sep + "train-images-idx3-ubyte"),
                             load_idx_labels(dir + sep + "train-labels-idx1-ubyte"), subset_train,
                             "train split");
  split.test = idx_to_batch(load_idx_images(dir + sep + "t10k-images-idx3-ubyte"),
                            load_idx_labels(dir + sep + "t10k-labels-idx1-ubyte"), subset_test,
                            "test split");
  return split;
}

DataSplit load_csv_tabular(const DatasetSpec& spec) {
  std::ifstream in(spec.path);
  if (!in) throw FormatError(spec.path + ": cannot open");
  std::vector<Vec> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Vec row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FormatError(spec.path + ": line " + std::to_string(line_no) +
                          ": non-numeric cell '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(spec.path + ": line " + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < spec.n_train + spec.n_test) {
    throw FormatError(spec.path + ": needs at least " + std::to_string(spec.n_train + spec.n_test) +
                      " rows, found " + std::to_string(rows.size()));
  }
  const std::size_t dim = rows.front().size() - 1;
  auto take = [&](std::size_t begin, std::size_t count) {
    Batch b;
    b.input_dim = dim;
    for (std::size_t i = begin; i < begin + count; ++i) {
      const double lab = rows[i].back();
      if (lab < 0.0 || lab != std::floor(lab) || lab >= static_cast<double>(spec.n_classes)) {
        throw FormatError(spec.path + ": row " + std::to_string(i + 1) + ": bad label");
      }
      b.push_example(rows[i].data(), static_cast<std::size_t>(lab));
    }
    return b;
  };
  DataSplit split;
  split.train = take(0, spec.n_train);
  split.test = take(spec.n_train, spec.n_test);
  return split;
}

DataSplit load_dataset(const DatasetSpec& spec, std::uint64_t data_seed) {
  spec.validate();
  DataSplit split;
  switch (spec.source) {
    case DataSource::synthetic_blobs: {
      RngStream rng(data_seed, "data");
      split = make_synthetic_blobs(spec, rng);
      break;
    }
    case DataSource::csv_tabular:
      split = load_csv_tabular(spec);
      break;
    case DataSource::mnist_idx:
      split = load_mnist_idx(spec.path, spec.subset, spec.subset);
      break;
  }
  if (spec.skew) {
    RngStream skew_rng(spec.skew->seed, "skew");
    const std::vector<std::size_t> kept =
        dirichlet_skew(split.train.labels, spec.skew->alpha, skew_rng);
    Batch skewed;
    skewed.input_dim = split.train.input_dim;
    for (std::size_t i : kept) skewed.push_example(split.train.example(i), split.train.labels[i]);
    split.train = std::move(skewed);
  }
  if (spec.normalization == Normalization::zscore) zscore_fit_apply(split.train, split.test);
  return split;
}

}  // namespace specclip
