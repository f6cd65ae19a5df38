#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "brt/forward.hpp"
#include "brt/phantoms.hpp"
#include "brt/pipeline.hpp"
#include "brt/system.hpp"

namespace brt {

namespace detail {

/// Images and sinograms are stored as a pair stem.json (metadata) and
/// stem.csv (values). Callers may pass either the stem or one of the two
/// concrete file names.
inline std::string data_stem(std::string path) {
  for (std::string_view ext : {".json", ".csv"}) {
    if (path.size() > ext.size() &&
        path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
      path.resize(path.size() - ext.size());
      break;
    }
  }
  return path;
}

/// Shortest decimal form that round-trips a double exactly.
inline std::string fmt_double(double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("'" + path + "': cannot open for writing");
  return os;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("'" + path + "': cannot open");
  return is;
}

inline void append_csv_row(std::string& out, const double* row, int count) {
  for (int k = 0; k < count; ++k) {
    if (k) out.push_back(',');
    out += fmt_double(row[k]);
  }
  out.push_back('\n');
}

inline std::vector<double> parse_csv_row(const std::string& line, const std::string& path,
                                         int lineno) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    std::string_view tok(line.data() + pos, comma - pos);
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
      tok.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected a number, got '" +
                               std::string(tok) + "'");
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

inline nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream is = open_in(path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace detail

/// Writes stem.json ({"size", "R", "description"}) and stem.csv
/// (size rows of size comma-separated values, full double precision).
inline void write_image(const ImageGrid& img, const std::string& path) {
  const std::string stem = detail::data_stem(path);
  {
    nlohmann::json j;
    j["size"] = img.size;
    j["R"] = img.R;
    j["description"] = img.description;
    std::ofstream os = detail::open_out(stem + ".json");
    os << j.dump(2) << '\n';
  }
  std::string buf;
  buf.reserve(static_cast<std::size_t>(img.size) * img.size * 20);
  for (int i = 0; i < img.size; ++i)
    detail::append_csv_row(buf, img.values.data() + static_cast<std::size_t>(i) * img.size,
                           img.size);
  std::ofstream os = detail::open_out(stem + ".csv");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("'" + stem + ".csv': write failed");
}

inline ImageGrid read_image(const std::string& path) {
  const std::string stem = detail::data_stem(path);
  const std::string json_path = stem + ".json";
  const std::string csv_path = stem + ".csv";
  const nlohmann::json j = detail::parse_json_file(json_path);
  ImageGrid img;
  try {
    img = make_image(j.at("size").get<int>(), j.at("R").get<double>(),
                     j.value("description", std::string()));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(json_path + ": " + e.what());
  }

  std::ifstream is = detail::open_in(csv_path);
  std::string line;
  for (int i = 0; i < img.size; ++i) {
    if (!std::getline(is, line))
      throw std::runtime_error(csv_path + ":" + std::to_string(i + 1) + ": unexpected end of file");
    const std::vector<double> row = detail::parse_csv_row(line, csv_path, i + 1);
    if (static_cast<int>(row.size()) != img.size)
      throw std::runtime_error(csv_path + ":" + std::to_string(i + 1) + ": expected " +
                               std::to_string(img.size) + " values, got " +
                               std::to_string(row.size()));
    std::copy(row.begin(), row.end(), img.values.begin() + static_cast<std::size_t>(i) * img.size);
  }
  return img;
}

/// Writes stem.json ({"R", "theta", "chirality", "M", "N", "epsilon"}) and
/// stem.csv (M rows of N comma-separated values: radial index down, direction
/// index across).
inline void write_sinogram(const Sinogram& s, const std::string& path) {
  const std::string stem = detail::data_stem(path);
  {
    nlohmann::json j;
    j["R"] = s.cfg.R;
    j["theta"] = s.cfg.theta;
    j["chirality"] = s.cfg.chirality;
    j["M"] = s.M;
    j["N"] = s.N;
    j["epsilon"] = s.epsilon;
    std::ofstream os = detail::open_out(stem + ".json");
    os << j.dump(2) << '\n';
  }
  std::string buf;
  buf.reserve(static_cast<std::size_t>(s.M) * s.N * 20);
  for (int i = 0; i < s.M; ++i)
    detail::append_csv_row(buf, s.values.data() + static_cast<std::size_t>(i) * s.N, s.N);
  std::ofstream os = detail::open_out(stem + ".csv");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("'" + stem + ".csv': write failed");
}

inline Sinogram read_sinogram(const std::string& path) {
  const std::string stem = detail::data_stem(path);
  const std::string json_path = stem + ".json";
  const std::string csv_path = stem + ".csv";
  const nlohmann::json j = detail::parse_json_file(json_path);
  Sinogram s;
  try {
    s.cfg.R = j.at("R").get<double>();
    s.cfg.theta = j.at("theta").get<double>();
    s.cfg.chirality = j.at("chirality").get<int>();
    s.M = j.at("M").get<int>();
    s.N = j.at("N").get<int>();
    s.epsilon = j.at("epsilon").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(json_path + ": " + e.what());
  }
  s.cfg.validate();
  if (s.M < 1 || s.N < 2 || s.N % 2 != 0)
    throw std::runtime_error(json_path + ": inconsistent sinogram dimensions");
  s.values.assign(static_cast<std::size_t>(s.M) * s.N, 0.0);

  std::ifstream is = detail::open_in(csv_path);
  std::string line;
  for (int i = 0; i < s.M; ++i) {
    if (!std::getline(is, line))
      throw std::runtime_error(csv_path + ":" + std::to_string(i + 1) + ": unexpected end of file");
    const std::vector<double> row = detail::parse_csv_row(line, csv_path, i + 1);
    if (static_cast<int>(row.size()) != s.N)
      throw std::runtime_error(csv_path + ":" + std::to_string(i + 1) + ": expected " +
                               std::to_string(s.N) + " values, got " + std::to_string(row.size()));
    std::copy(row.begin(), row.end(), s.values.begin() + static_cast<std::size_t>(i) * s.N);
  }
  return s;
}

/// Binary 8-bit PGM with the value range scaled to 0..255; a constant image
/// maps to all zeros.
inline void write_pgm(const ImageGrid& img, const std::string& path) {
  const auto [lo_it, hi_it] = std::minmax_element(img.values.begin(), img.values.end());
  const double lo = img.values.empty() ? 0.0 : *lo_it;
  const double hi = img.values.empty() ? 0.0 : *hi_it;
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("'" + path + "': cannot open for writing");
  os << "P5\n" << img.size << ' ' << img.size << "\n255\n";
  std::string buf;
  buf.reserve(img.values.size());
  for (double v : img.values) {
    int byte = static_cast<int>((v - lo) * scale + 0.5);
    byte = std::clamp(byte, 0, 255);
    buf.push_back(static_cast<char>(static_cast<unsigned char>(byte)));
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("'" + path + "': write failed");
}

inline nlohmann::json report_to_json(const ReconstructionReport& rep) {
  nlohmann::json j;
  j["R"] = rep.R;
  j["theta"] = rep.theta;
  j["epsilon"] = rep.epsilon;
  j["chirality"] = rep.chirality;
  j["M"] = rep.M;
  j["N"] = rep.N;
  j["rank"] = rep.rank;
  j["grid_size"] = rep.grid_size;
  j["seconds_harmonics"] = rep.seconds_harmonics;
  j["seconds_solve"] = rep.seconds_solve;
  j["seconds_synthesis"] = rep.seconds_synthesis;
  j["seconds_total"] = rep.seconds_total;
  j["imag_ratio"] = rep.imag_ratio;
  if (rep.rel_l2_percent) j["rel_l2_percent"] = *rep.rel_l2_percent;
  return j;
}

inline void write_report_json(const ReconstructionReport& rep, const std::string& path,
                              const std::vector<double>* artifact = nullptr) {
  nlohmann::json j = report_to_json(rep);
  if (artifact) j["artifact_profile"] = *artifact;
  std::ofstream os = detail::open_out(path);
  os << j.dump(2) << '\n';
}

/// Conditioning summary of a cache, one CSV row per harmonic:
/// full condition number, truncated condition number, and the first discarded
/// singular value.
inline void write_condition_table(const OperatorCache& cache, const std::string& path) {
  std::string buf = "n,cond_full,cond_truncated,sigma_r_plus_1\n";
  for (const TruncatedOperator& op : cache.ops) {
    buf += std::to_string(op.n);
    buf.push_back(',');
    buf += detail::fmt_double(op.cond_full());
    buf.push_back(',');
    buf += detail::fmt_double(op.cond_truncated());
    buf.push_back(',');
    buf += detail::fmt_double(op.truncation_error());
    buf.push_back('\n');
  }
  std::ofstream os = detail::open_out(path);
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("'" + path + "': write failed");
}

}  // namespace brt
