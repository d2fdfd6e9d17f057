// Matrix CSV files and the text model file.
//
// Model file layout (one record per line, doubles printed with 17
// significant digits so load(save(m)) is exact and save is byte-stable):
//
//   intact-model 1
//   mode linear|kernel
//   views <m>
//   dims <D_1> ... <D_m>
//   latent <d>
//   n_train <n>                      (0 in linear mode)
//   hyper <c> <C1> <C2> <max_outer> <max_inner> <tol_obj> <tol_x> <seed>
//   standardization 0|1
//   mean <v> <D_v values>            (per view, when standardized)
//   scale <v> <D_v values>
//   kernel <v> linear|rbf <gamma>    (kernel mode, per view)
//   matrix <W|A|Z> <v> <rows> <cols>
//   <rows lines of cols values>
//   end
#pragma once

#include "intact/types.hpp"

#include <filesystem>
#include <string>

namespace intact {

std::string format_double(double x);

/// Comma-separated rows; '#' lines are comments and blank lines are skipped.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& a, const std::string& header = {});

std::vector<int> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);

std::string serialize_model(const IntactModel& model);
IntactModel parse_model(const std::string& text);

void save_model(const std::filesystem::path& path, const IntactModel& model);
IntactModel load_model(const std::filesystem::path& path);

void write_history_csv(const std::filesystem::path& path, const FitHistory& history);

/// Creates `dir` (and parents) or throws IoError.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace intact
