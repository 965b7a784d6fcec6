#pragma once

// Observed time series: sampling times in years since a reference origin,
// one value per time.  Values are strictly positive for every label except
// net earnings, which may legitimately cross zero (and which no growth model
// here describes; such series can be loaded and plotted but not fitted).

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "satgrowth/errors.hpp"

namespace satgrowth {

enum class SeriesLabel { AnnualRevenue, CumulativeRevenue, Headcount, NetEarnings, Other };

inline const char* to_string(SeriesLabel label) {
  switch (label) {
    case SeriesLabel::AnnualRevenue: return "annual_revenue";
    case SeriesLabel::CumulativeRevenue: return "cumulative_revenue";
    case SeriesLabel::Headcount: return "headcount";
    case SeriesLabel::NetEarnings: return "net_earnings";
    case SeriesLabel::Other: return "other";
  }
  return "other";
}

struct TimeSeries {
  std::vector<double> t;       // years since t_origin, strictly increasing
  std::vector<double> values;  // same length as t
  SeriesLabel label = SeriesLabel::Other;
  double t_origin = 0.0;       // calendar year corresponding to t = 0
  std::string units;

  std::size_t size() const { return t.size(); }

  void validate() const {
    if (t.size() != values.size()) {
      throw DomainError("TimeSeries: t and values must have the same length");
    }
    if (!std::isfinite(t_origin)) throw DomainError("TimeSeries: t_origin must be finite");
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!std::isfinite(t[i]) || !std::isfinite(values[i])) {
        throw DomainError("TimeSeries: non-finite entry at index " + std::to_string(i));
      }
      if (i > 0 && t[i] <= t[i - 1]) {
        throw DomainError("TimeSeries: times must be strictly increasing (index " +
                          std::to_string(i) + ")");
      }
      if (label != SeriesLabel::NetEarnings && values[i] <= 0.0) {
        throw DomainError("TimeSeries: non-positive value at index " + std::to_string(i) +
                          " (only net earnings may cross zero)");
      }
    }
  }
};

// Running sum of an annual-flow series, e.g. yearly revenue into cumulative
// revenue.  Only meaningful for flows; already-cumulative input is rejected.
inline TimeSeries cumulative(const TimeSeries& series) {
  series.validate();
  if (series.size() == 0) throw DomainError("cumulative: series is empty");
  if (series.label != SeriesLabel::AnnualRevenue && series.label != SeriesLabel::Other) {
    throw DomainError(std::string("cumulative: cannot accumulate a series labelled ") +
                      to_string(series.label));
  }
  TimeSeries out = series;
  out.label = series.label == SeriesLabel::AnnualRevenue ? SeriesLabel::CumulativeRevenue
                                                         : SeriesLabel::Other;
  double running = 0.0;
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    running += series.values[i];
    out.values[i] = running;
  }
  return out;
}

}  // namespace satgrowth
