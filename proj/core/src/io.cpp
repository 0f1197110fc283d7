#include "edgestates/io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "edgestates/error.hpp"

namespace edgestates {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::GridTooShort: return "GridTooShort";
    case ErrorCode::NonMonotone: return "NonMonotone";
    case ErrorCode::BelowBranch: return "BelowBranch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::SelfIntersecting: return "SelfIntersecting";
    case ErrorCode::NotSmooth: return "NotSmooth";
    case ErrorCode::OutsideTube: return "OutsideTube";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::MaskMismatch: return "MaskMismatch";
    case ErrorCode::WindowTooWide: return "WindowTooWide";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::MeshFailure: return "MeshFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

void CsvWriter::row(const std::vector<double>& values) {
  require(values.size() == columns_, "csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
  out_ << '\n';
}

}  // namespace edgestates
