#pragma once

#include <vector>

namespace zeno {

// Time grid with per-site and site-averaged densities. The error vectors are
// empty for deterministic runs and hold standard errors for ensembles.
struct ObservableSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> site_density;  // [time][site]
  std::vector<double> total_density;              // site average p(t)
  std::vector<std::vector<double>> site_stderr;
  std::vector<double> total_stderr;
};

}  // namespace zeno
