// src/feature_io.cpp


// Copyright 2026  The ctcfuse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "ctcfuse/feature_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ctcfuse/binary_io.hpp"
#include "ctcfuse/error.hpp"

namespace ctcfuse::features {

void WriteFmat(std::ostream& os, const Matrix& m) {
  os.write("FMAT", 4);
  io::WriteU32(os, static_cast<std::uint32_t>(m.rows()));
  io::WriteU32(os, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) io::WriteF32(os, static_cast<float>(m(i, j)));
}

void WriteFmat(const std::string& path, const Matrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorKind::kIoError, "cannot write " + path);
  WriteFmat(os, m);
  if (!os) Fail(ErrorKind::kIoError, "write failed: " + path);
}

Matrix ReadFmat(std::istream& is, const std::string& source) {
  char magic[4] = {};
  is.read(magic, 4);
  if (is.gcount() != 4 || std::string(magic, 4) != "FMAT")
    Fail(ErrorKind::kParseError, source + ": not an FMAT file");
  const std::uint32_t rows = io::ReadU32(is, source);
  const std::uint32_t cols = io::ReadU32(is, source);
  Matrix m(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = io::ReadF32(is, source);
  if (is.peek() != std::char_traits<char>::eof())
    Fail(ErrorKind::kParseError, source + ": trailing bytes after matrix data");
  return m;
}

Matrix ReadFmat(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIoError, "cannot open " + path);
  return ReadFmat(is, path);
}

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

bool ParseDouble(const std::string& s, double* out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, *out);
  return ec == std::errc() && p == end;
}

std::vector<std::string> SplitCommas(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(Trim(c));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Matrix ReadFeatureCsv(std::istream& is, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (Trim(line).empty()) continue;
    const auto cells = SplitCommas(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size() && numeric; ++i) numeric = ParseDouble(cells[i], &row[i]);
    if (!numeric) {
      if (rows.empty() && lineno == 1) continue;  // header
      Fail(ErrorKind::kParseError, source + ":" + std::to_string(lineno) + ": non-numeric value");
    }
    if (!rows.empty() && row.size() != rows[0].size())
      Fail(ErrorKind::kParseError, source + ":" + std::to_string(lineno) + ": expected " +
                                       std::to_string(rows[0].size()) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) Fail(ErrorKind::kParseError, source + ": no data rows");
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

Matrix ReadFeatureCsv(const std::string& path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorKind::kIoError, "cannot open " + path);
  return ReadFeatureCsv(is, path);
}

void WriteFeatureCsv(std::ostream& os, const Matrix& m, const std::vector<std::string>& header) {
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
    os << '\n';
  }
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), m(i, j));
      if (j) os << ',';
      os.write(buf, p - buf);
    }
    os << '\n';
  }
}

Matrix ReadFeatureFile(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return ReadFeatureCsv(path);
  return ReadFmat(path);
}

Waveform ReadWav(std::istream& is, const std::string& source) {
  auto tag = [&](const char* what) {
    char b[4];
    is.read(b, 4);
    if (is.gcount() != 4) Fail(ErrorKind::kParseError, source + ": truncated " + what);
    return std::string(b, 4);
  };
  if (tag("RIFF header") != "RIFF") Fail(ErrorKind::kParseError, source + ": not a RIFF file");
  io::ReadU32(is, source);
  if (tag("RIFF header") != "WAVE") Fail(ErrorKind::kParseError, source + ": not a WAVE file");

  Waveform w;
  bool have_fmt = false;
  while (true) {
    const std::string id = tag("chunk header");
    const std::uint32_t size = io::ReadU32(is, source);
    if (id == "fmt ") {
      if (size < 16) Fail(ErrorKind::kParseError, source + ": short fmt chunk");
      const auto format = io::ReadLe<std::uint16_t>(is, source);
      const auto channels = io::ReadLe<std::uint16_t>(is, source);
      w.sample_rate_hz = static_cast<int>(io::ReadU32(is, source));
      io::ReadU32(is, source);                    // byte rate
      io::ReadLe<std::uint16_t>(is, source);      // block align
      const auto bits = io::ReadLe<std::uint16_t>(is, source);
      if (format != 1 || channels != 1 || bits != 16)
        Fail(ErrorKind::kParseError, source + ": only 16-bit PCM mono is supported");
      is.ignore(size - 16 + (size & 1));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) Fail(ErrorKind::kParseError, source + ": data chunk before fmt chunk");
      w.samples.resize(size / 2);
      for (auto& s : w.samples)
        s = static_cast<std::int16_t>(io::ReadLe<std::uint16_t>(is, source)) / 32768.0;
      break;
    } else {
      is.ignore(size + (size & 1));
    }
  }
  return w;
}

Waveform ReadWav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIoError, "cannot open " + path);
  return ReadWav(is, path);
}

void WriteWav(std::ostream& os, const Waveform& w) {
  const auto bytes = static_cast<std::uint32_t>(2 * w.samples.size());
  os.write("RIFF", 4);
  io::WriteU32(os, 36 + bytes);
  os.write("WAVEfmt ", 8);
  io::WriteU32(os, 16);
  io::WriteLe<std::uint16_t>(os, 1);
  io::WriteLe<std::uint16_t>(os, 1);
  io::WriteU32(os, static_cast<std::uint32_t>(w.sample_rate_hz));
  io::WriteU32(os, static_cast<std::uint32_t>(2 * w.sample_rate_hz));
  io::WriteLe<std::uint16_t>(os, 2);
  io::WriteLe<std::uint16_t>(os, 16);
  os.write("data", 4);
  io::WriteU32(os, bytes);
  for (double s : w.samples) {
    const long v = std::lround(std::clamp(s, -1.0, 1.0) * 32768.0);
    io::WriteLe<std::uint16_t>(os, static_cast<std::uint16_t>(static_cast<std::int16_t>(
                                       std::clamp(v, -32768L, 32767L))));
  }
}

void WriteWav(const std::string& path, const Waveform& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorKind::kIoError, "cannot write " + path);
  WriteWav(os, w);
  if (!os) Fail(ErrorKind::kIoError, "write failed: " + path);
}

}  // namespace ctcfuse::features
