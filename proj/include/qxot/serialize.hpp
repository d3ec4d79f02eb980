#pragma once

// JSON records of runs and reports. Keys come out sorted and reals keep nine
// significant digits, so equal runs give byte-identical files.

#include <string>

#include <json.hpp>

#include "qxot/leakage.hpp"
#include "qxot/twoparty_qc.hpp"

namespace qxot::io {

using Json = nlohmann::json;

/// v rounded to nine significant digits.
double round_real(double v);

Json to_json(const xot::Message& m);
Json to_json(const xot::XotRun& run);
Json to_json(const linear::P3Run& run);
Json to_json(const adversaries::AttackResult& result);
Json to_json(const leakage::LeakageReport& report);
Json to_json(const qc::RunLog& log);

/// Two-space indent plus a trailing newline.
std::string dump(const Json& j);

/// Writes `text` to path, creating parent directories.
void write_file(const std::string& path, const std::string& text);

}  // namespace qxot::io
