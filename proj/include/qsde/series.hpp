#pragma once

#include <string>
#include <vector>

namespace qsde {

// Uniformly spaced observations with a time-step label. Used for both
// synthetic model output and ingested market data. `counts` is populated
// only by tick aggregation (trades per bar).
struct ReturnSeries {
    std::vector<double> values;
    double dt = 1.0;
    std::string meta;
    std::vector<double> counts;
};

}  // namespace qsde
