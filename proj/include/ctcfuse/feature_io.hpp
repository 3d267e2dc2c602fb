// include/ctcfuse/feature_io.hpp


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

#ifndef CTCFUSE_FEATURE_IO_HPP_
#define CTCFUSE_FEATURE_IO_HPP_

#include <istream>
#include <ostream>
#include <string>

#include "ctcfuse/features.hpp"

namespace ctcfuse::features {

// FMAT: "FMAT", u32 rows, u32 cols, rows*cols float32, all little-endian,
// row-major. Values are stored in single precision.

void WriteFmat(std::ostream& os, const Matrix& m);
void WriteFmat(const std::string& path, const Matrix& m);
/// `source` names the stream in error messages.
Matrix ReadFmat(std::istream& is, const std::string& source);
Matrix ReadFmat(const std::string& path);

/// Comma-separated rows; a non-numeric first row is taken as a header.
Matrix ReadFeatureCsv(std::istream& is, const std::string& source);
Matrix ReadFeatureCsv(const std::string& path);
void WriteFeatureCsv(std::ostream& os, const Matrix& m,
                     const std::vector<std::string>& header = {});

/// Loads either format, chosen by the file extension (.csv or anything else).
Matrix ReadFeatureFile(const std::string& path);

/// 16-bit PCM mono RIFF/WAVE. Samples are scaled to [-1, 1).
Waveform ReadWav(const std::string& path);
Waveform ReadWav(std::istream& is, const std::string& source);
/// Clips to [-1, 1] and rounds to 16 bits.
void WriteWav(const std::string& path, const Waveform& w);
void WriteWav(std::ostream& os, const Waveform& w);

}  // namespace ctcfuse::features

#endif  // CTCFUSE_FEATURE_IO_HPP_
