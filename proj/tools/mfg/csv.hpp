#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mfg/model.hpp"

namespace mfg::cli {

/// Header row, comma-separated "%.17g" values, LF line endings. Columns must
/// have equal length.
std::string csv_text(const std::vector<std::string>& header,
                     const std::vector<const std::vector<double>*>& columns);

/// t followed by one column per trajectory; all trajectories share a grid.
std::string trajectory_csv(const std::vector<std::string>& names,
                           const std::vector<const Trajectory*>& series);

void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace mfg::cli
