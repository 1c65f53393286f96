#ifndef ICABENCH_IO_HPP
#define ICABENCH_IO_HPP

#include "icabench/types.hpp"

#include <filesystem>
#include <string>

namespace icabench {

enum class DatasetFormat { icab, csv };

DatasetFormat dataset_format_from_string(const std::string& s);

/// Guess the format from the file extension (.icab or .csv).
DatasetFormat guess_format(const std::filesystem::path& path);

// The .icab format is a raw payload of n_channels x n_samples little-endian
// IEEE-754 doubles, channel-major, next to a JSON sidecar <path>.json
// carrying {id, n_channels, n_samples, srate, labels}.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     double csv_srate = 0.0);
void save_dataset(const Dataset& ds, const std::filesystem::path& path,
                  DatasetFormat format);

/// CSV matrix, one row per line. Values written with 17 significant digits
/// so a save/load round trip is bit exact.
Matrix load_matrix_csv(const std::filesystem::path& path);
void save_matrix_csv(const Matrix& m, const std::filesystem::path& path);

/// Raw little-endian doubles, row-major, no header; the caller supplies the
/// expected shape on load.
Matrix load_matrix_binary(const std::filesystem::path& path,
                          Eigen::Index rows, Eigen::Index cols);
void save_matrix_binary(const Matrix& m, const std::filesystem::path& path);

/// Writes content to path atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace icabench

#endif  // ICABENCH_IO_HPP
