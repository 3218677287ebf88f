#include "ompath/io.hpp"

#include "ompath/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace ompath {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void malformed(std::string_view source, std::size_t line, const std::string& what) {
  throw ContractError(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string path_to_csv(const DiscretePath& path) {
  std::string out = "t";
  for (Eigen::Index c = 0; c < path.dimension(); ++c) out += ",x" + std::to_string(c + 1);
  out += '\n';
  for (std::size_t k = 0; k <= path.steps(); ++k) {
    out += format_double(path.time(k));
    for (Eigen::Index c = 0; c < path.dimension(); ++c) {
      out += ',';
      out += format_double(path.values()(static_cast<Eigen::Index>(k), c));
    }
    out += '\n';
  }
  return out;
}

DiscretePath path_from_csv(std::string_view text, std::string_view source) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start < text.size();) {
    const std::size_t end = text.find('\n', start);
    lines.push_back(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) malformed(source, 1, "empty file");

  const auto header = split(lines[0], ',');
  if (header.size() < 2 || header[0] != "t") malformed(source, 1, "header must be t,x1,...,xn");
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c] != "x" + std::to_string(c)) {
      malformed(source, 1, "expected column x" + std::to_string(c) + ", found '" + std::string(header[c]) + "'");
    }
  }
  const std::size_t dim = header.size() - 1;
  const std::size_t rows = lines.size() - 1;
  if (rows < 2) malformed(source, lines.size(), "need at least two data rows");

  std::vector<double> times(rows);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t line_no = r + 2;
    const auto fields = split(lines[r + 1], ',');
    if (fields.size() != dim + 1) {
      malformed(source, line_no, "expected " + std::to_string(dim + 1) + " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c <= dim; ++c) {
      double v = 0.0;
      const auto f = fields[c];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size() || f.empty()) {
        malformed(source, line_no, "cannot parse number '" + std::string(f) + "'");
      }
      if (c == 0) {
        times[r] = v;
      } else {
        values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) = v;
      }
    }
  }
  try {
    return DiscretePath::from_grid(times, std::move(values));
  } catch (const ContractError& e) {
    throw ContractError(std::string(source) + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

DiscretePath read_path_csv(const std::filesystem::path& file) {
  return path_from_csv(read_file(file), file.string());
}

void write_file_atomic(const std::filesystem::path& file, std::string_view contents) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::filesystem::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + " to " + file.string() + ": " + ec.message());
}

nlohmann::json to_json(const OmEvaluation& om) {
  return {{"total", om.total},
          {"drift_term", om.drift_term},
          {"divergence_term", om.divergence_term},
          {"grid_size", om.grid_size}};
}

nlohmann::json to_json(const TubeEstimate& e) {
  return {{"probability", e.probability}, {"hits", e.hits},       {"samples", e.samples},
          {"standard_error", e.standard_error}, {"epsilon", e.epsilon}, {"alpha", e.alpha},
          {"low_statistics", e.low_statistics}};
}

nlohmann::json to_json(const RatioCheck& c) {
  return {{"log_prob_ratio", number_or_null(c.log_prob_ratio)},
          {"om_prediction", c.om_prediction},
          {"agreement", number_or_null(c.agreement)},
          {"standard_error", number_or_null(c.standard_error)},
          {"inconclusive", c.inconclusive},
          {"om_first", c.om_first},
          {"om_second", c.om_second},
          {"joint_hits", c.joint_hits},
          {"first", to_json(c.first)},
          {"second", to_json(c.second)}};
}

nlohmann::json diagnostics_json(const OptimizeResult& r) {
  return {{"om", to_json(r.om)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"gradient_norm", r.gradient_norm},
          {"el_residual", r.el_residual}};
}

std::string ratio_ladder_csv(const std::vector<RatioCheck>& ladder) {
  std::string out = "epsilon,hits1,hits2,log_ratio,om_prediction,stderr\n";
  for (const auto& c : ladder) {
    out += format_double(c.first.epsilon) + ',' + std::to_string(c.first.hits) + ',' +
           std::to_string(c.second.hits) + ',' + (c.inconclusive ? "nan" : format_double(c.log_prob_ratio)) +
           ',' + format_double(c.om_prediction) + ',' + (c.inconclusive ? "nan" : format_double(c.standard_error)) +
           '\n';
  }
  return out;
}

std::string tube_ladder_csv(const std::vector<TubeEstimate>& ladder) {
  std::string out = "epsilon,hits,samples,probability,stderr\n";
  for (const auto& e : ladder) {
    out += format_double(e.epsilon) + ',' + std::to_string(e.hits) + ',' + std::to_string(e.samples) + ',' +
           format_double(e.probability) + ',' + format_double(e.standard_error) + '\n';
  }
  return out;
}

}  // namespace ompath
