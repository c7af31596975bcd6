#pragma once

#include <string>

#include "treatkit/frame.hpp"

namespace treatkit {

// RFC-4180 CSV ingestion. Header row required. Without a schema, a column is
// numeric iff every non-missing token parses as a number (non-finite numeric
// tokens such as Inf/NaN count as numeric but are masked bad); otherwise it is
// categorical with missing cells as the distinguished MISSING code.
Frame read_csv(const std::string& path, const Schema& schema = Schema{});
Frame read_csv_text(const std::string& text, const Schema& schema = Schema{});

// Emits the frame back to CSV: bad numeric cells and MISSING categorical
// cells as "NA", floats with 17 significant digits so reads are lossless.
void write_csv(const Frame& frame, const std::string& path);
std::string write_csv_text(const Frame& frame);

// Schema file: JSON object mapping column name -> {"kind": ..., "missing_tokens": [...]}.
Schema load_schema(const std::string& path);

// Shared float formatting ("%.17g"), also used by the CLI scoreFrame output.
std::string format_double(double v);

}  // namespace treatkit
