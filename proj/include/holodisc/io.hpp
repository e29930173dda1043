#pragma once

// Field files, norm-study CSV and deterministic number formatting.
//
// Field file: one UTF-8 JSON header line
//   {"nr":..,"nt":..,"dim":..,"precision":"f64"}
// followed by little-endian float64 pairs (re, im), node-major then component.

#include "holodisc/grid.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace holodisc {

void write_field(const std::filesystem::path& path, const GridField& f);
/// Builds a fresh grid from the header. Throws Error on malformed input.
GridField read_field(const std::filesystem::path& path);

struct NormStudyRow {
    double p = 2.0;
    int nr = 0;
    double estimate = 0.0;
};

/// Columns p,nr,estimate with a header row.
void write_norm_csv(const std::filesystem::path& path, const std::vector<NormStudyRow>& rows);
std::vector<NormStudyRow> read_norm_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double x);

}  // namespace holodisc
