// include/ctcfuse/log.hpp

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

#ifndef CTCFUSE_LOG_HPP_
#define CTCFUSE_LOG_HPP_

#include <spdlog/spdlog.h>

namespace ctcfuse {

// Reads CTCFUSE_LOG (trace|debug|info|warn|error|off) once; default is warn so
// library calls stay quiet inside tests.
void InitLogging();

}  // namespace ctcfuse

#endif  // CTCFUSE_LOG_HPP_
