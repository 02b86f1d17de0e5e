#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "chdbc/grid.hpp"

namespace chdbc {

// CSV layout: a header line `# N=<N> kind=<bulk|boundary>`, then one line per
// row j (outer) holding the N values of that row (inner index i), written with
// 17 significant digits so every double round-trips exactly.

void write_csv(std::ostream& os, const BulkField& f);
void write_csv(std::ostream& os, const BoundaryField& f);

BulkField read_bulk_csv(std::istream& is);
BoundaryField read_boundary_csv(std::istream& is);

/// Snapshot of a State: the bulk CSV (wall rows are the traces).
void save_state(const std::filesystem::path& path, const State& s);
State load_state(const std::filesystem::path& path);

/// 17-significant-digit decimal rendering used by every CSV writer.
std::string format_double(double x);

} // namespace chdbc
