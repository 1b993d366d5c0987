#include "gds/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace gds::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);  // binary: identical bytes across platforms
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  return is;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const char* what) {
  double v = 0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) throw IoError(std::string("malformed number in ") + what + ": '" + s + "'");
  return v;
}

long long parse_int(const std::string& s, const char* what) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError(std::string("malformed integer in ") + what + ": '" + s + "'");
  return v;
}

std::string getline_checked(std::ifstream& is, const char* what) {
  std::string line;
  if (!std::getline(is, line)) throw IoError(std::string("unexpected end of file in ") + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw IoError("format_double failed");
  return std::string(buf, ptr);
}

void write_grid_csv(const std::filesystem::path& path, const GridSpec<double>& grid,
                    const std::string& mask_path) {
  auto os = open_out(path);
  os << "m1,m2,t0,s0,delta1,delta2,mask\n";
  os << grid.m1 << ',' << grid.m2 << ',' << format_double(grid.t0) << ',' << format_double(grid.s0)
     << ',' << format_double(grid.delta1) << ',' << format_double(grid.delta2) << ',' << mask_path
     << '\n';
}

GridSpec<double> read_grid_csv(const std::filesystem::path& path, std::string* mask_path) {
  auto is = open_in(path);
  getline_checked(is, "grid.csv header");
  const auto cells = split_csv(getline_checked(is, "grid.csv row"));
  if (cells.size() < 6) throw IoError("grid.csv: expected at least 6 fields");
  GridSpec<double> grid;
  grid.m1 = parse_int(cells[0], "grid.csv m1");
  grid.m2 = parse_int(cells[1], "grid.csv m2");
  grid.t0 = parse_double(cells[2], "grid.csv t0");
  grid.s0 = parse_double(cells[3], "grid.csv s0");
  grid.delta1 = parse_double(cells[4], "grid.csv delta1");
  grid.delta2 = parse_double(cells[5], "grid.csv delta2");
  if (mask_path != nullptr) *mask_path = cells.size() > 6 ? cells[6] : "";
  grid.validate();
  return grid;
}

void write_mask_csv(const std::filesystem::path& path, const GridSpec<double>& grid,
                    const std::vector<bool>& mask) {
  if (static_cast<Index>(mask.size()) != grid.size()) throw IoError("mask size must match the grid");
  auto os = open_out(path);
  os << "t_index,s_index,included\n";
  for (Index k = 0; k < grid.m1; ++k)
    for (Index l = 0; l < grid.m2; ++l)
      os << k << ',' << l << ',' << (mask[static_cast<size_t>(k * grid.m2 + l)] ? 1 : 0) << '\n';
}

std::vector<bool> read_mask_csv(const std::filesystem::path& path, const GridSpec<double>& grid) {
  auto is = open_in(path);
  getline_checked(is, "mask.csv header");
  std::vector<bool> mask(static_cast<size_t>(grid.size()), false);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw IoError("mask.csv: expected 3 fields per row");
    const Index k = parse_int(cells[0], "mask.csv t_index");
    const Index l = parse_int(cells[1], "mask.csv s_index");
    if (k < 0 || k >= grid.m1 || l < 0 || l >= grid.m2) throw IoError("mask.csv: index out of range");
    mask[static_cast<size_t>(k * grid.m2 + l)] = parse_int(cells[2], "mask.csv included") != 0;
  }
  return mask;
}

void write_images_csv(const std::filesystem::path& path, const std::vector<ImageSample<double>>& images,
                      const GridSpec<double>& grid) {
  auto os = open_out(path);
  os << "sample_id,t_index,s_index,value\n";
  for (size_t i = 0; i < images.size(); ++i) {
    if (images[i].values.size() != grid.size()) throw IoError("image size must match the grid");
    const std::string& id = images[i].id.empty() ? std::to_string(i) : images[i].id;
    for (Index k = 0; k < grid.m1; ++k)
      for (Index l = 0; l < grid.m2; ++l)
        os << id << ',' << k << ',' << l << ',' << format_double(images[i].values[k * grid.m2 + l])
           << '\n';
  }
}

std::vector<ImageSample<double>> read_images_csv(const std::filesystem::path& path,
                                                 const GridSpec<double>& grid) {
  auto is = open_in(path);
  getline_checked(is, "images.csv header");
  std::vector<ImageSample<double>> images;
  std::string line;
  std::string current_id;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw IoError("images.csv: expected 4 fields per row");
    if (images.empty() || cells[0] != current_id) {
      current_id = cells[0];
      ImageSample<double> img;
      img.id = current_id;
      img.values = VectorX<double>::Zero(grid.size());
      images.push_back(std::move(img));
    }
    const Index k = parse_int(cells[1], "images.csv t_index");
    const Index l = parse_int(cells[2], "images.csv s_index");
    if (k < 0 || k >= grid.m1 || l < 0 || l >= grid.m2) throw IoError("images.csv: index out of range");
    images.back().values[k * grid.m2 + l] = parse_double(cells[3], "images.csv value");
  }
  return images;
}

void write_responses_csv(const std::filesystem::path& path, const VectorX<double>& y) {
  auto os = open_out(path);
  os << "sample_id,y\n";
  for (Index i = 0; i < y.size(); ++i) os << i << ',' << format_double(y[i]) << '\n';
}

VectorX<double> read_responses_csv(const std::filesystem::path& path) {
  auto is = open_in(path);
  getline_checked(is, "responses.csv header");
  std::vector<double> values;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw IoError("responses.csv: expected 2 fields per row");
    values.push_back(parse_double(cells[1], "responses.csv y"));
  }
  VectorX<double> y(static_cast<Index>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) y[static_cast<Index>(i)] = values[i];
  return y;
}

void write_surface_csv(const std::filesystem::path& path, const GridSpec<double>& grid,
                       const VectorX<double>& raw, const VectorX<double>& truncated) {
  if (raw.size() != grid.size() || truncated.size() != grid.size())
    throw IoError("surface size must match the grid");
  auto os = open_out(path);
  os << "t,s,beta_raw,beta_truncated\n";
  for (Index j = 0; j < grid.size(); ++j) {
    const auto [t, s] = grid.point(j);
    os << format_double(t) << ',' << format_double(s) << ',' << format_double(raw[j]) << ','
       << format_double(truncated[j]) << '\n';
  }
}

SurfaceFile read_surface_csv(const std::filesystem::path& path) {
  auto is = open_in(path);
  getline_checked(is, "surface.csv header");
  std::vector<double> raw, trunc;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw IoError("surface.csv: expected 4 fields per row");
    raw.push_back(parse_double(cells[2], "surface.csv beta_raw"));
    trunc.push_back(parse_double(cells[3], "surface.csv beta_truncated"));
  }
  SurfaceFile out;
  out.raw.resize(static_cast<Index>(raw.size()));
  out.truncated.resize(static_cast<Index>(trunc.size()));
  for (size_t i = 0; i < raw.size(); ++i) {
    out.raw[static_cast<Index>(i)] = raw[i];
    out.truncated[static_cast<Index>(i)] = trunc[i];
  }
  return out;
}

void write_eta_csv(const std::filesystem::path& path, const VectorX<double>& eta) {
  auto os = open_out(path);
  os << "index,value\n";
  for (Index j = 0; j < eta.size(); ++j) os << j << ',' << format_double(eta[j]) << '\n';
}

VectorX<double> read_eta_csv(const std::filesystem::path& path) {
  auto is = open_in(path);
  getline_checked(is, "eta.csv header");
  std::vector<double> values;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw IoError("eta.csv: expected 2 fields per row");
    values.push_back(parse_double(cells[1], "eta.csv value"));
  }
  VectorX<double> eta(static_cast<Index>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) eta[static_cast<Index>(i)] = values[i];
  return eta;
}

void write_report_csv(const std::filesystem::path& path, const ReportTable& table) {
  auto os = open_out(path);
  for (size_t i = 0; i < table.header.size(); ++i)
    os << table.header[i] << (i + 1 < table.header.size() ? "," : "");
  os << '\n';
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) os << row[i] << (i + 1 < row.size() ? "," : "");
    os << '\n';
  }
}

MatrixX<double> read_dense_matrix(const std::filesystem::path& path, Index rows, Index cols) {
  auto is = open_in(path);
  MatrixX<double> m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (!(is >> m(i, j))) throw IoError("dense matrix file too short: " + path.string());
  return m;
}

}  // namespace gds::io
