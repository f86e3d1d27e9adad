#include "qelift/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

namespace qelift {

namespace {

std::FILE* as_file(void* p) { return static_cast<std::FILE*>(p); }

}  // namespace

CsvWriter::CsvWriter(const std::string& path, const std::string& schema,
                     const std::vector<std::string>& columns)
    : path_(path), columns_(columns.size()) {
  if (columns.empty()) throw InputError("CSV needs at least one column");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw InputError("cannot open '" + path + "' for writing");
  file_ = f;
  std::fprintf(f, "# %s\n", schema.c_str());
  write_row(columns);
}

CsvWriter::~CsvWriter() {
  if (file_ != nullptr) std::fclose(as_file(file_));
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_)
    throw InputError("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                     std::to_string(columns_));
  std::FILE* f = as_file(file_);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) std::fputc(',', f);
    std::fwrite(cells[i].data(), 1, cells[i].size(), f);
  }
  std::fputc('\n', f);
  if (std::ferror(f) != 0) throw InputError("write failed on '" + path_ + "'");
}

std::string CsvWriter::cell(double v) {
  if (!std::isfinite(v)) throw NumericalError("non-finite value in CSV cell");
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  if (r.ec != std::errc{}) throw NumericalError("failed to format CSV cell");
  return std::string(buf, r.ptr);
}

namespace {

// Reads one whitespace-and-comment separated header token.
int read_pgm_field(std::istream& in, const std::string& path) {
  for (;;) {
    const int c = in.peek();
    if (c == EOF) throw InputError("truncated PGM header in '" + path + "'");
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
      continue;
    }
    if (std::isspace(c) != 0) {
      in.get();
      continue;
    }
    break;
  }
  int value = 0;
  if (!(in >> value)) throw InputError("malformed PGM header in '" + path + "'");
  return value;
}

}  // namespace

PgmImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  char m0 = 0;
  char m1 = 0;
  in.get(m0).get(m1);
  if (m0 != 'P' || m1 != '5') throw InputError("'" + path + "' is not a binary PGM (P5)");

  PgmImage img;
  img.width = read_pgm_field(in, path);
  img.height = read_pgm_field(in, path);
  const int maxval = read_pgm_field(in, path);
  if (img.width < 1 || img.height < 1)
    throw InputError("PGM '" + path + "' has non-positive dimensions");
  if (maxval < 1 || maxval > 255)
    throw InputError("PGM '" + path + "' maxval " + std::to_string(maxval) +
                     " is outside 1..255");
  in.get();  // single whitespace byte before the raster

  img.pixels.resize(std::size_t(img.width) * std::size_t(img.height));
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw InputError("PGM '" + path + "' raster is truncated");
  return img;
}

void write_pgm(const std::string& path, const PgmImage& img) {
  if (img.width < 1 || img.height < 1) throw InputError("PGM image has no pixels");
  if (img.pixels.size() != std::size_t(img.width) * std::size_t(img.height))
    throw InputError("PGM pixel buffer does not match its dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw InputError("write failed on '" + path + "'");
}

}  // namespace qelift
