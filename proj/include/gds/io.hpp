#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gds/design.hpp"
#include "gds/grid.hpp"

namespace gds::io {

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

/// grid.csv: header m1,m2,t0,s0,delta1,delta2,mask and a single data row;
/// the mask field is empty when no mask applies.
void write_grid_csv(const std::filesystem::path& path, const GridSpec<double>& grid,
                    const std::string& mask_path = "");
GridSpec<double> read_grid_csv(const std::filesystem::path& path, std::string* mask_path = nullptr);

/// mask.csv: header t_index,s_index,included with one row per grid cell.
void write_mask_csv(const std::filesystem::path& path, const GridSpec<double>& grid,
                    const std::vector<bool>& mask);
std::vector<bool> read_mask_csv(const std::filesystem::path& path, const GridSpec<double>& grid);

/// images.csv: header sample_id,t_index,s_index,value, row-major per sample.
void write_images_csv(const std::filesystem::path& path, const std::vector<ImageSample<double>>& images,
                      const GridSpec<double>& grid);
std::vector<ImageSample<double>> read_images_csv(const std::filesystem::path& path,
                                                 const GridSpec<double>& grid);

/// responses.csv: header sample_id,y.
void write_responses_csv(const std::filesystem::path& path, const VectorX<double>& y);
VectorX<double> read_responses_csv(const std::filesystem::path& path);

/// surface.csv: header t,s,beta_raw,beta_truncated in grid row-major order.
void write_surface_csv(const std::filesystem::path& path, const GridSpec<double>& grid,
                       const VectorX<double>& raw, const VectorX<double>& truncated);
struct SurfaceFile {
  VectorX<double> raw;
  VectorX<double> truncated;
};
SurfaceFile read_surface_csv(const std::filesystem::path& path);

/// eta.csv: header index,value.
void write_eta_csv(const std::filesystem::path& path, const VectorX<double>& eta);
VectorX<double> read_eta_csv(const std::filesystem::path& path);

/// Generic one-header-line report table; every cell is written with full
/// round-trip precision.
struct ReportTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
void write_report_csv(const std::filesystem::path& path, const ReportTable& table);

/// Whitespace-separated numeric matrix, row-major (test fixtures).
MatrixX<double> read_dense_matrix(const std::filesystem::path& path, Index rows, Index cols);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gds::io
