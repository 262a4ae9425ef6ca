#pragma once

#include <string>

#include "mvq/point_measure.hpp"

namespace mvq {

// Long-format CSV, UTF-8, header `measure_id,weight,x1,...,xd`: one row per
// weighted atom. measure_id is a nonnegative integer; rows of one measure
// need not be contiguous, ascending ids define collection order. Floats are
// written in shortest round-trip decimal form, so save followed by load
// reproduces coordinates and weights bit-exactly. A measure with no atoms
// produces no rows and therefore does not survive a round trip.
MeasureCollection load_measures_csv(const std::string& path);
void save_measures_csv(const MeasureCollection& collection, const std::string& path);

// Sidecar `measure_id,label`, one row per measure id present in the data
// file. Returns the collection with labels attached in id order.
MeasureCollection attach_labels_csv(MeasureCollection collection, const std::string& path);
void save_labels_csv(const MeasureCollection& collection, const std::string& path);

// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(const std::string& text);

// Write-temp-then-rename; the destination never holds a partial file.
void atomic_write_file(const std::string& path, const std::string& contents);

}  // namespace mvq
