#pragma once

#include <string>
#include <type_traits>
#include <vector>

#include "qelift/errors.hpp"

namespace qelift {

// Streams CSV rows to a file. The first line is a schema tag ("# <schema>"),
// the second the column header; all text is UTF-8 with '.' as the decimal
// separator regardless of locale. Numeric cells must be finite.
class CsvWriter {
public:
  CsvWriter(const std::string& path, const std::string& schema,
            const std::vector<std::string>& columns);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void write_row(const std::vector<std::string>& cells);

  // Shortest decimal form that round-trips the value. Throws NumericalError
  // on NaN or infinity.
  static std::string cell(double v);
  template <typename T, std::enable_if_t<std::is_integral_v<T>, int> = 0>
  static std::string cell(T v) {
    return std::to_string(v);
  }

private:
  std::string path_;
  std::size_t columns_ = 0;
  void* file_ = nullptr;
};

// Grayscale raster with one byte per pixel, row-major from the top-left.
struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> pixels;
};

// Binary PGM (magic P5) with maxval up to 255. Comments and arbitrary
// whitespace in the header are accepted on read.
PgmImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const PgmImage& img);

}  // namespace qelift
