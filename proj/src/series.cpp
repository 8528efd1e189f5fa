#include "demodyn/series.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace demodyn {

Count GroundRecord::total() const {
  if (!counts) return 0;
  return std::accumulate(counts->begin(), counts->end(), Count{0});
}

void GroundSeries::validate() const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0 && !(records[i - 1].date < records[i].date))
      throw ModelError("ground series: dates must be strictly increasing at record " +
                       std::to_string(i + 1));
    if (records[i].counts) {
      for (Count c : *records[i].counts)
        if (c < 0) throw ModelError("ground series: negative count at record " + std::to_string(i + 1));
    }
  }
}

void AerialSeries::validate() const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0 && records[i].date < records[i - 1].date)
      throw ModelError("aerial series: dates must be sorted");
    if (!(records[i].estimate >= 0.0) || !std::isfinite(records[i].estimate))
      throw ModelError("aerial series: negative or non-finite estimate at record " +
                       std::to_string(i + 1));
  }
}

}  // namespace demodyn
