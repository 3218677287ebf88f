#pragma once

#include "ompath/om.hpp"
#include "ompath/optimize.hpp"
#include "ompath/path.hpp"
#include "ompath/tube.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ompath {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// CSV with header `t,x1,...,xn` and one row per grid node.
std::string path_to_csv(const DiscretePath& path);

/// Parses path CSV; errors name the source and the offending line.
DiscretePath path_from_csv(std::string_view text, std::string_view source = "<input>");
DiscretePath read_path_csv(const std::filesystem::path& file);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& file, std::string_view contents);
std::string read_file(const std::filesystem::path& file);

nlohmann::json to_json(const OmEvaluation& om);
nlohmann::json to_json(const TubeEstimate& estimate);
nlohmann::json to_json(const RatioCheck& check);
/// Diagnostics only; the path goes to CSV.
nlohmann::json diagnostics_json(const OptimizeResult& result);

/// `epsilon,hits1,hits2,log_ratio,om_prediction,stderr`
std::string ratio_ladder_csv(const std::vector<RatioCheck>& ladder);
/// `epsilon,hits,samples,probability,stderr`
std::string tube_ladder_csv(const std::vector<TubeEstimate>& ladder);

}  // namespace ompath
