#pragma once

#include <string>
#include <vector>

#include "adc/workspace.hpp"

namespace adc {

// Canned analysis runs against a populated workspace. Artifacts land under
// out_dir (created if needed); the returned paths are what was written.
//
//   query1  monthly parcel means of COHERENCE_VV and NDVI (inward buffer 5 m,
//           cloud buffer 50 m) as a feature-space CSV, recorded per month
//           into the knowledge base
//   query2  parcels whose declared crop differs from the predicted one, plus
//           an NDVI animation per flagged parcel (10-day step, June through
//           October of the first dataset year)
//   query3  mowing events per calendar year for grassland parcels with mean
//           NDVI below 0.4, and the hotspot list averaging under one event
//           per year
//
// Outputs are deterministic: rerunning a scenario on a dataset generated
// from the same seed reproduces every artifact byte for byte.
std::vector<std::string> run_scenario(Workspace& ws, const std::string& name,
                                      const std::string& out_dir, int threads = 0);

}  // namespace adc
