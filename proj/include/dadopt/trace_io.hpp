// Copyright 2026 The dadopt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DADOPT_TRACE_IO_HPP
#define DADOPT_TRACE_IO_HPP

#include <filesystem>
#include <functional>
#include <ostream>
#include <string_view>

#include "dadopt/simulator.hpp"

namespace dadopt {

inline constexpr std::string_view kTraceCsvHeader =
    "t,mean_loss,grad_norm_sq,scaled_grad_metric,consensus_err,u_spread,vt_cumulative";

enum class TraceFormat { csv, jsonl };

TraceFormat parse_trace_format(std::string_view name);

/// Doubles are written with 17 significant digits so they round-trip.
void write_trace_csv(std::ostream& out, const Trace& trace);

/// One JSON object per record, including xbar.
void write_trace_jsonl(std::ostream& out, const Trace& trace);

void write_trace(std::ostream& out, const Trace& trace, TraceFormat format);

/// Writes through a sibling temporary file and renames it over `path`, so
/// readers never observe a partial file. Throws std::runtime_error on I/O
/// failure.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

}  // namespace dadopt

#endif  // DADOPT_TRACE_IO_HPP
