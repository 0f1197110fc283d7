#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <vector>

namespace edgestates {

// 12 significant digits, dot decimal; "nan"/"inf" for non-finite values.
std::string format_number(double value);

// Comma-separated rows with a header line.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);
  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace edgestates
