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

#include "dadopt/trace_io.hpp"

#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include <unistd.h>

#include "json.hpp"

namespace dadopt {

TraceFormat parse_trace_format(std::string_view name) {
  if (name == "csv") return TraceFormat::csv;
  if (name == "jsonl") return TraceFormat::jsonl;
  throw std::invalid_argument("unknown trace format '" + std::string(name) +
                              "' (expected csv or jsonl)");
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  const auto old_precision = out.precision(17);
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace) {
    out << r.t << ',' << r.mean_loss << ',' << r.grad_norm_sq << ',' << r.scaled_grad_metric << ','
        << r.consensus_err << ',' << r.u_spread << ',' << r.vt_cumulative << '\n';
  }
  out.precision(old_precision);
}

void write_trace_jsonl(std::ostream& out, const Trace& trace) {
  for (const auto& r : trace) {
    nlohmann::json j;
    j["t"] = r.t;
    j["mean_loss"] = r.mean_loss;
    j["grad_norm_sq"] = r.grad_norm_sq;
    j["scaled_grad_metric"] = r.scaled_grad_metric;
    j["consensus_err"] = r.consensus_err;
    j["u_spread"] = r.u_spread;
    j["vt_cumulative"] = r.vt_cumulative;
    j["xbar"] = std::vector<double>(r.xbar.data(), r.xbar.data() + r.xbar.size());
    out << j.dump() << '\n';
  }
}

void write_trace(std::ostream& out, const Trace& trace, TraceFormat format) {
  if (format == TraceFormat::csv) {
    write_trace_csv(out, trace);
  } else {
    write_trace_jsonl(out, trace);
  }
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    writer(out);
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw std::runtime_error("cannot move output into place at '" + path.string() +
                             "': " + ec.message());
  }
}

}  // namespace dadopt
