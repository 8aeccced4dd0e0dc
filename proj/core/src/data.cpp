#include "specnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "specnet/errors.hpp"
#include "specnet/format.hpp"
#include "specnet/random.hpp"

namespace specnet {

PointCloud gen_one_moon(Index n, double noise_var, std::uint64_t seed) {
  if (n < 1) throw InputError("n must be positive");
  if (!(noise_var >= 0.0)) throw InputError("noise variance must be nonnegative");
  Rng rng(seed);
  const double sd = std::sqrt(noise_var);
  PointCloud pc;
  pc.points.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double t = rng.uniform(0.0, std::numbers::pi);
    const double e0 = rng.normal();
    const double e1 = rng.normal();
    pc.points(i, 0) = std::cos(t) + sd * e0;
    pc.points(i, 1) = std::sin(t) + sd * e1;
  }
  return pc;
}

PointCloud gen_two_moons(Index n, std::uint64_t seed, double noise_var) {
  if (n < 2 || n % 2 != 0) throw InputError("two moons needs an even n >= 2");
  if (!(noise_var >= 0.0)) throw InputError("noise variance must be nonnegative");
  Rng rng(seed);
  const double sd = std::sqrt(noise_var);
  PointCloud pc;
  pc.points.resize(n, 2);
  pc.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double t = rng.uniform(0.0, std::numbers::pi);
    const double e0 = rng.normal();
    const double e1 = rng.normal();
    if (i < n / 2) {
      pc.points(i, 0) = std::cos(t) - 0.5 + sd * e0;
      pc.points(i, 1) = std::sin(t) - 0.3 + sd * e1;
      pc.labels[i] = 1;
    } else {
      pc.points(i, 0) = -std::cos(t) + 0.5 + sd * e0;
      pc.points(i, 1) = -std::sin(t) + 0.3 + sd * e1;
      pc.labels[i] = 2;
    }
  }
  return pc;
}

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                   const std::string& file) {
  if (offset + 4 > bytes.size()) {
    throw ParseError(file + ": truncated header at offset " + std::to_string(offset));
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

}  // namespace

MnistRaw read_mnist_idx_raw(const std::filesystem::path& images_path,
                            const std::filesystem::path& labels_path) {
  const auto img = read_all(images_path);
  const auto lab = read_all(labels_path);
  const std::string iname = images_path.filename().string();
  const std::string lname = labels_path.filename().string();

  if (be32(img, 0, iname) != 0x00000803u) {
    throw ParseError(iname + ": bad magic at offset 0 (expected 0x00000803)");
  }
  const std::uint32_t count = be32(img, 4, iname);
  MnistRaw raw;
  raw.rows = be32(img, 8, iname);
  raw.cols = be32(img, 12, iname);
  const std::size_t payload = std::size_t{count} * raw.rows * raw.cols;
  if (img.size() < 16 + payload) {
    throw ParseError(iname + ": truncated pixel payload at offset " +
                     std::to_string(img.size()) + " (expected " +
                     std::to_string(16 + payload) + " bytes)");
  }
  if (img.size() > 16 + payload) {
    throw ParseError(iname + ": trailing bytes at offset " + std::to_string(16 + payload));
  }
  raw.pixels.assign(img.begin() + 16, img.end());

  if (be32(lab, 0, lname) != 0x00000801u) {
    throw ParseError(lname + ": bad magic at offset 0 (expected 0x00000801)");
  }
  const std::uint32_t lcount = be32(lab, 4, lname);
  if (lcount != count) {
    throw ParseError(lname + ": label count " + std::to_string(lcount) +
                     " at offset 4 does not match image count " + std::to_string(count));
  }
  if (lab.size() != 8 + std::size_t{count}) {
    throw ParseError(lname + ": payload size mismatch at offset " + std::to_string(lab.size()));
  }
  raw.labels.assign(lab.begin() + 8, lab.end());
  for (std::size_t i = 0; i < raw.labels.size(); ++i) {
    if (raw.labels[i] > 9) {
      throw ParseError(lname + ": label " + std::to_string(raw.labels[i]) + " at offset " +
                       std::to_string(8 + i) + " is outside 0-9");
    }
  }
  return raw;
}

void write_mnist_idx(const MnistRaw& raw, const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path) {
  const std::size_t per = std::size_t{raw.rows} * raw.cols;
  if (per == 0 || raw.pixels.size() != raw.labels.size() * per) {
    throw InputError("pixel buffer does not match label count and image shape");
  }
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw IoError("cannot open IDX output files");
  put_be32(img, 0x00000803u);
  put_be32(img, static_cast<std::uint32_t>(raw.labels.size()));
  put_be32(img, raw.rows);
  put_be32(img, raw.cols);
  img.write(reinterpret_cast<const char*>(raw.pixels.data()),
            static_cast<std::streamsize>(raw.pixels.size()));
  put_be32(lab, 0x00000801u);
  put_be32(lab, static_cast<std::uint32_t>(raw.labels.size()));
  lab.write(reinterpret_cast<const char*>(raw.labels.data()),
            static_cast<std::streamsize>(raw.labels.size()));
  if (!img || !lab) throw IoError("failed writing IDX files");
}

MnistSet load_mnist_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path) {
  const MnistRaw raw = read_mnist_idx_raw(images_path, labels_path);
  MnistSet set;
  set.rows = raw.rows;
  set.cols = raw.cols;
  const Index count = static_cast<Index>(raw.labels.size());
  const Index dim = set.rows * set.cols;
  set.images.resize(count, dim);
  for (Index i = 0; i < count; ++i) {
    for (Index j = 0; j < dim; ++j) {
      set.images(i, j) = raw.pixels[static_cast<std::size_t>(i * dim + j)] / 255.0;
    }
  }
  set.labels.assign(raw.labels.begin(), raw.labels.end());
  return set;
}

MnistSet mnist_subset(const MnistSet& set, Index count, std::uint64_t seed) {
  const Index total = set.images.rows();
  if (count < 1 || count > total) {
    throw InputError("subset size " + std::to_string(count) + " outside [1, " +
                     std::to_string(total) + "]");
  }
  std::vector<Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(order);
  MnistSet out;
  out.rows = set.rows;
  out.cols = set.cols;
  out.images.resize(count, set.images.cols());
  for (Index i = 0; i < count; ++i) {
    out.images.row(i) = set.images.row(order[i]);
    out.labels.push_back(set.labels[order[i]]);
  }
  return out;
}

PointCloud to_point_cloud(const MnistSet& set) {
  PointCloud pc;
  pc.points = set.images;
  pc.labels = set.labels;
  return pc;
}

std::vector<int> kmeans_1d(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) throw InputError("kmeans_1d needs at least two values");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) throw DegenerateError("all values are identical");

  std::vector<double> prefix(n + 1, 0.0), prefix2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + sorted[i];
    prefix2[i + 1] = prefix2[i] + sorted[i] * sorted[i];
  }
  auto sse = [&](std::size_t a, std::size_t b) {  // [a, b)
    const double s = prefix[b] - prefix[a];
    return (prefix2[b] - prefix2[a]) - s * s / static_cast<double>(b - a);
  };
  std::size_t best = 0;
  double best_cost = INFINITY;
  for (std::size_t k = 1; k < n; ++k) {
    if (sorted[k] == sorted[k - 1]) continue;
    const double cost = sse(0, k) + sse(k, n);
    if (cost < best_cost) {
      best_cost = cost;
      best = k;
    }
  }
  const double cut = sorted[best - 1];
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = values[i] <= cut ? 1 : 2;
  return labels;
}

double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size() || pred.empty()) {
    throw InputError("label vectors must be nonempty and of equal length");
  }
  double mismatch = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if ((pred[i] != 1 && pred[i] != 2) || (truth[i] != 1 && truth[i] != 2)) {
      throw InputError("labels must be 1 or 2");
    }
    mismatch += std::abs(pred[i] - truth[i]);
  }
  const double rate = mismatch / static_cast<double>(pred.size());
  return std::max(rate, 1.0 - rate);
}

void write_points_csv(const PointCloud& pc, const std::filesystem::path& path) {
  pc.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (Index j = 0; j < pc.dim(); ++j) out << (j ? ",x" : "x") << j;
  if (!pc.labels.empty()) out << ",label";
  out << '\n';
  for (Index i = 0; i < pc.size(); ++i) {
    for (Index j = 0; j < pc.dim(); ++j) out << (j ? "," : "") << format_double(pc.points(i, j));
    if (!pc.labels.empty()) out << ',' << pc.labels[i];
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

PointCloud read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: missing header");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) header.emplace_back(trim(f));
  }
  const bool labeled = !header.empty() && header.back() == "label";
  const std::size_t dim = header.size() - (labeled ? 1 : 0);
  if (dim < 1) throw ParseError("line 1: no coordinate columns");
  std::vector<double> coords;
  std::vector<int> labels;
  long long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string f;
    std::size_t col = 0;
    while (std::getline(ss, f, ',')) {
      if (col < dim) {
        double v = 0.0;
        if (!parse_double(trim(f), v)) {
          throw ParseError("line " + std::to_string(line_no) + ": bad number '" + f + "'");
        }
        coords.push_back(v);
      } else if (labeled && col == dim) {
        long long v = 0;
        if (!parse_int(trim(f), v)) {
          throw ParseError("line " + std::to_string(line_no) + ": bad label '" + f + "'");
        }
        labels.push_back(static_cast<int>(v));
      }
      ++col;
    }
    if (col != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields");
    }
  }
  PointCloud pc;
  const Index n = static_cast<Index>(coords.size() / dim);
  pc.points.resize(n, static_cast<Index>(dim));
  for (Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) pc.points(i, j) = coords[i * dim + j];
  }
  pc.labels = std::move(labels);
  pc.validate();
  return pc;
}

}  // namespace specnet
