#pragma once

// Disturbance-sample dump/load: a T x (N d) matrix of stacked disturbance
// draws, one sample per row, stored either as native little-endian binary
// (magic header + dimensions + row-major doubles, bit-exact) or as CSV.
// Loading auto-detects the format from the leading bytes, so a replay run
// accepts whichever form an earlier run dumped.

#include <drds/io/text.hpp>
#include <drds/linalg.hpp>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace drds::io {

namespace detail {
inline constexpr char kNoiseMagic[8] = {'D', 'R', 'D', 'S', 'N', 'O', 'I', 'S'};
}

inline void save_samples_binary(const Mat& samples, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write sample file: " + path);
  out.write(detail::kNoiseMagic, sizeof(detail::kNoiseMagic));
  const std::uint64_t rows = static_cast<std::uint64_t>(samples.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(samples.cols());
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  for (Eigen::Index r = 0; r < samples.rows(); ++r)
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
      const double v = samples(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void save_samples_csv(const Mat& samples, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write sample file: " + path);
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
      if (c) out << ',';
      out << fmt17(samples(r, c));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline Mat load_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open sample file: " + path);

  char magic[sizeof(detail::kNoiseMagic)] = {};
  in.read(magic, sizeof(magic));
  if (in.gcount() == sizeof(magic) &&
      std::memcmp(magic, detail::kNoiseMagic, sizeof(magic)) == 0) {
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (!in || rows == 0 || cols == 0 || rows > (1ull << 32) || cols > (1ull << 32))
      throw ParseError(path + ": corrupt sample file header");
    Mat out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::uint64_t r = 0; r < rows; ++r)
      for (std::uint64_t c = 0; c < cols; ++c) {
        double v = 0.0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        if (!in) throw ParseError(path + ": truncated sample file");
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      }
    return out;
  }

  // Not binary: parse the whole file as CSV rows of equal length.
  in.clear();
  in.seekg(0);
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t width = 0;
  while (std::getline(in, line)) {
    line = rstrip(line);
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      row.push_back(parse_double(cell, path + " row " + std::to_string(rows.size() + 1)));
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw ParseError(path + ": ragged CSV row " + std::to_string(rows.size() + 1));
    rows.push_back(std::move(row));
  }
  if (rows.empty() || width == 0) throw ParseError(path + ": empty sample file");
  Mat out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < width; ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return out;
}

}  // namespace drds::io
