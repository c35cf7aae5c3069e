#pragma once

// Output files are written to a temporary name in the target directory and
// renamed into place, so each one is either complete or absent.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "twofluid/error.hpp"

namespace twofluid::cli {

namespace fs = std::filesystem;

/// 17 significant digits, so values round-trip exactly.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

inline void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.parent_path() / fmt::format(".{}.tmp-{}", path.filename().string(), ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot open '{}' for writing", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(fmt::format("failed writing '{}'", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(fmt::format("cannot move '{}' into place: {}", path.string(), ec.message()));
  }
}

/// Header row plus rows of pre-formatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    explicit Row(CsvTable& t) : table_(t) {}
    Row& operator<<(double v) { return cell(format_double(v)); }
    Row& operator<<(int v) { return cell(std::to_string(v)); }
    Row& operator<<(std::int64_t v) { return cell(std::to_string(v)); }
    Row& operator<<(std::size_t v) { return cell(std::to_string(v)); }
    Row& operator<<(bool v) { return cell(v ? "1" : "0"); }
    Row& operator<<(const std::string& v) { return cell(v); }
    Row& operator<<(const char* v) { return cell(v); }
    ~Row() { table_.add(std::move(cells_)); }

   private:
    Row& cell(std::string s) {
      cells_.push_back(std::move(s));
      return *this;
    }
    CsvTable& table_;
    std::vector<std::string> cells_;
  };

  Row row() { return Row(*this); }
  std::size_t rows() const { return rows_.size(); }

  std::string str() const {
    if (!bad_row_.empty()) throw Error(bad_row_);
    std::string out = join(header_);
    for (const auto& r : rows_) out += join(r);
    return out;
  }

  void write(const fs::path& path) const { write_file_atomic(path, str()); }

 private:
  // Called from a destructor, so a bad row is remembered and reported by
  // str() rather than thrown here.
  void add(std::vector<std::string> cells) noexcept {
    if (cells.size() != header_.size()) {
      if (bad_row_.empty()) bad_row_ = fmt::format("CSV row {} has {} cells, header has {}", rows_.size() + 1,
                                                   cells.size(), header_.size());
      return;
    }
    rows_.push_back(std::move(cells));
  }
  static std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ',';
      line += cells[i];
    }
    line += '\n';
    return line;
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::string bad_row_;
};

}  // namespace twofluid::cli
