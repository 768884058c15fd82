#ifndef MSF_CSV_HPP
#define MSF_CSV_HPP

#include <string>

#include "msf/model.hpp"

namespace msf {

// Reads a series CSV with header `y,x1,...,xm` (m >= 0). Presample lags are
// not stored in the file; they come from the run config and are installed
// into Dataset::y0 by the caller.
struct CsvSeries {
  Vec y;
  Vec x;  // n * ncov row-major
  int ncov = 0;
};

CsvSeries read_series_csv(const std::string& path);
void write_series_csv(const std::string& path, const Vec& y, const Vec& x, int ncov);

}  // namespace msf

#endif
