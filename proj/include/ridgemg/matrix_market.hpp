#pragma once

#include <filesystem>
#include <iosfwd>

#include "ridgemg/sparse.hpp"

namespace ridgemg {

/// Reads a Matrix Market file.  Supported: coordinate and array formats,
/// real/integer/pattern fields (pattern entries become 1.0), general and
/// symmetric storage (symmetric entries are expanded).  Complex fields and
/// skew symmetry are rejected with a descriptive error.
FeatureMatrix read_matrix_market(const std::filesystem::path& path);
FeatureMatrix read_matrix_market(std::istream& in, const std::string& origin = "<stream>");

enum class MmField { real, integer, pattern };
enum class MmSymmetry { general, symmetric };

/// Writes coordinate-format Matrix Market.  Symmetric output requires a
/// square matrix with an exactly symmetric pattern and values (the lower
/// triangle is stored); pattern output drops the values.
void write_matrix_market(const std::filesystem::path& path, const FeatureMatrix& m,
                         MmField field = MmField::real,
                         MmSymmetry symmetry = MmSymmetry::general);
void write_matrix_market(std::ostream& out, const FeatureMatrix& m,
                         MmField field = MmField::real,
                         MmSymmetry symmetry = MmSymmetry::general);

}  // namespace ridgemg
