#include "ridgemg/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ridgemg {

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw std::runtime_error(origin + ": " + what);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

FeatureMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open Matrix Market file: " + path.string());
  }
  return read_matrix_market(in, path.string());
}

FeatureMatrix read_matrix_market(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) fail(origin, "empty file");

  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") fail(origin, "malformed header: '" + line + "'");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") fail(origin, "unsupported object type '" + object + "'");
  if (format != "coordinate" && format != "array") {
    fail(origin, "unsupported format '" + format + "'");
  }
  if (field == "complex" || field == "hermitian") {
    fail(origin, "unsupported field type '" + field + "'");
  }
  if (field != "real" && field != "integer" && field != "pattern") {
    fail(origin, "unsupported field type '" + field + "'");
  }
  if (symmetry == "skew-symmetric" || symmetry == "hermitian") {
    fail(origin, "unsupported symmetry '" + symmetry + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    fail(origin, "unsupported symmetry '" + symmetry + "'");
  }
  if (format == "array" && field == "pattern") {
    fail(origin, "pattern field is not defined for array format");
  }
  const bool sym = symmetry == "symmetric";
  const bool pattern = field == "pattern";

  // skip comments and blank lines up to the size line
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  if (line.empty() || line[0] == '%') fail(origin, "missing size line");

  std::istringstream size_line(line);
  long long rows = 0, cols = 0, declared_nnz = 0;
  if (format == "coordinate") {
    if (!(size_line >> rows >> cols >> declared_nnz)) fail(origin, "malformed size line");
  } else {
    if (!(size_line >> rows >> cols)) fail(origin, "malformed size line");
  }
  if (rows <= 0 || cols <= 0) fail(origin, "non-positive dimensions");
  if (sym && rows != cols) fail(origin, "symmetric matrix must be square");

  std::vector<Triplet> entries;

  if (format == "coordinate") {
    if (declared_nnz < 0) fail(origin, "negative entry count");
    entries.reserve(static_cast<std::size_t>(declared_nnz) * (sym ? 2 : 1));
    long long seen = 0;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '%') continue;
      std::istringstream entry(line);
      long long r = 0, c = 0;
      double v = 1.0;
      if (!(entry >> r >> c)) fail(origin, "malformed entry: '" + line + "'");
      if (!pattern && !(entry >> v)) fail(origin, "entry missing value: '" + line + "'");
      if (r < 1 || r > rows || c < 1 || c > cols) {
        fail(origin, "entry index out of range: '" + line + "'");
      }
      if (!std::isfinite(v)) fail(origin, "non-finite value: '" + line + "'");
      ++seen;
      const auto ri = static_cast<std::size_t>(r - 1);
      const auto ci = static_cast<std::size_t>(c - 1);
      entries.push_back({ri, ci, v});
      if (sym && ri != ci) entries.push_back({ci, ri, v});
    }
    if (seen != declared_nnz) {
      fail(origin, "entry count mismatch: header declares " + std::to_string(declared_nnz) +
                       ", file holds " + std::to_string(seen));
    }
  } else {
    // array format: dense column-major values; zeros are simply not stored
    const long long expected = sym ? rows * (rows + 1) / 2 : rows * cols;
    long long idx = 0;
    double v = 0.0;
    long long r = 0, c = 0;  // lower-triangle walk for symmetric arrays
    while (in >> v) {
      if (idx >= expected) fail(origin, "array has more values than the size line declares");
      if (!std::isfinite(v)) fail(origin, "non-finite value in array data");
      long long rr, cc;
      if (!sym) {
        cc = idx / rows;
        rr = idx % rows;
      } else {
        rr = r;
        cc = c;
        if (++r >= rows) {
          ++c;
          r = c;
        }
      }
      if (v != 0.0) {
        entries.push_back({static_cast<std::size_t>(rr), static_cast<std::size_t>(cc), v});
        if (sym && rr != cc) {
          entries.push_back({static_cast<std::size_t>(cc), static_cast<std::size_t>(rr), v});
        }
      }
      ++idx;
    }
    if (idx != expected) {
      fail(origin, "array holds " + std::to_string(idx) + " values, expected " +
                       std::to_string(expected));
    }
  }

  return csr_from_triplets(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                           entries);
}

void write_matrix_market(const std::filesystem::path& path, const FeatureMatrix& m,
                         MmField field, MmSymmetry symmetry) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  write_matrix_market(out, m, field, symmetry);
}

void write_matrix_market(std::ostream& out, const FeatureMatrix& m, MmField field,
                         MmSymmetry symmetry) {
  const bool sym = symmetry == MmSymmetry::symmetric;
  if (sym) {
    if (m.n_samples != m.n_features) {
      throw std::invalid_argument("write_matrix_market: symmetric output requires a square matrix");
    }
    // verify value symmetry before committing to lower-triangle storage
    const CscMatrix cols = to_csc(m);
    for (std::size_t r = 0; r < m.n_samples; ++r) {
      for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k) {
        const std::size_t c = m.column_indices[k];
        const auto col_rows = cols.col_rows(r);
        const auto col_vals = cols.col_values(r);
        const auto it = std::lower_bound(col_rows.begin(), col_rows.end(), c);
        if (it == col_rows.end() || *it != c ||
            col_vals[static_cast<std::size_t>(it - col_rows.begin())] != m.values[k]) {
          throw std::invalid_argument(
              "write_matrix_market: matrix is not symmetric, cannot use symmetric storage");
        }
      }
    }
  }

  const char* field_name = field == MmField::real      ? "real"
                           : field == MmField::integer ? "integer"
                                                       : "pattern";
  out << "%%MatrixMarket matrix coordinate " << field_name << ' '
      << (sym ? "symmetric" : "general") << '\n';

  std::size_t count = 0;
  for (std::size_t r = 0; r < m.n_samples; ++r) {
    for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k) {
      if (!sym || m.column_indices[k] <= r) ++count;
    }
  }
  out << m.n_samples << ' ' << m.n_features << ' ' << count << '\n';
  out.precision(17);
  for (std::size_t r = 0; r < m.n_samples; ++r) {
    for (std::size_t k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k) {
      const std::size_t c = m.column_indices[k];
      if (sym && c > r) continue;
      out << (r + 1) << ' ' << (c + 1);
      if (field == MmField::real) {
        out << ' ' << m.values[k];
      } else if (field == MmField::integer) {
        out << ' ' << static_cast<long long>(m.values[k]);
      }
      out << '\n';
    }
  }
}

}  // namespace ridgemg
