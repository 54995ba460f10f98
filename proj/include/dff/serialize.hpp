#pragma once

// JSON (de)serialization for instances, streams and validation reports.
// Serialization is canonical: fixed key order, ascending ids, so identical
// in-memory values always produce byte-identical text.

#include <string>

#include "dff/types.hpp"

namespace dff {

struct Stream {
  ExampleId init = 0;               // first example; its label is revealed
  std::vector<ExampleId> rounds;    // prediction rounds, in order
};

std::string instance_to_json(const Instance& instance, int indent = 2);
Instance instance_from_json(const std::string& text);

std::string stream_to_json(const Stream& stream, int indent = 2);
Stream stream_from_json(const std::string& text);

std::string validation_report_to_json(const ValidationReport& report,
                                      int indent = 2);

}  // namespace dff
