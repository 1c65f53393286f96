#include "icabench/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace icabench {

namespace fs = std::filesystem;
using nlohmann::json;

DatasetFormat dataset_format_from_string(const std::string& s) {
  if (s == "icab" || s == "binary") return DatasetFormat::icab;
  if (s == "csv") return DatasetFormat::csv;
  throw ValidationError("unknown dataset format '" + s + "'");
}

DatasetFormat guess_format(const fs::path& path) {
  return path.extension() == ".csv" ? DatasetFormat::csv : DatasetFormat::icab;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot write '" + tmp.string() + "'");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw Error("short write to '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path);
}

namespace {

fs::path icab_header_path(const fs::path& payload) {
  fs::path h = payload;
  h += ".json";
  return h;
}

Dataset load_icab(const fs::path& path) {
  const fs::path header_path = icab_header_path(path);
  json header;
  try {
    header = json::parse(read_file(header_path));
  } catch (const json::parse_error& e) {
    throw ParseError("'" + header_path.string() + "': malformed header at byte " +
                     std::to_string(e.byte) + ": " + e.what());
  }

  Dataset ds;
  try {
    ds.id = header.at("id").get<std::string>();
    ds.srate = header.at("srate").get<double>();
    ds.labels = header.at("labels").get<std::vector<std::string>>();
    const auto n = header.at("n_channels").get<Eigen::Index>();
    const auto N = header.at("n_samples").get<Eigen::Index>();
    ds.data.resize(n, N);
  } catch (const json::exception& e) {
    throw ParseError("'" + header_path.string() + "': bad header field: " + e.what());
  }

  const std::string payload = read_file(path);
  const std::size_t expected =
      static_cast<std::size_t>(ds.data.size()) * sizeof(double);
  if (payload.size() != expected) {
    throw ParseError("'" + path.string() + "': payload is " +
                     std::to_string(payload.size()) + " bytes, header declares " +
                     std::to_string(expected) + " (" +
                     std::to_string(ds.data.rows()) + " channels x " +
                     std::to_string(ds.data.cols()) + " samples)");
  }
  // Channel-major payload: one channel's samples after another.
  const double* values = reinterpret_cast<const double*>(payload.data());
  for (Eigen::Index i = 0; i < ds.data.rows(); ++i) {
    for (Eigen::Index t = 0; t < ds.data.cols(); ++t) {
      ds.data(i, t) = values[i * ds.data.cols() + t];
    }
  }
  for (Eigen::Index i = 0; i < ds.data.rows(); ++i) {
    for (Eigen::Index t = 0; t < ds.data.cols(); ++t) {
      if (!std::isfinite(ds.data(i, t))) {
        throw ParseError("'" + path.string() + "': non-finite value at byte offset " +
                         std::to_string((i * ds.data.cols() + t) * sizeof(double)) +
                         " (channel " + std::to_string(i) + ", sample " +
                         std::to_string(t) + ")");
      }
    }
  }
  ds.validate();
  return ds;
}

void save_icab(const Dataset& ds, const fs::path& path) {
  json header;
  header["id"] = ds.id;
  header["n_channels"] = ds.data.rows();
  header["n_samples"] = ds.data.cols();
  header["srate"] = ds.srate;
  header["labels"] = ds.labels;
  write_file_atomic(icab_header_path(path), header.dump(2) + "\n");

  std::string payload;
  payload.resize(static_cast<std::size_t>(ds.data.size()) * sizeof(double));
  double* out = reinterpret_cast<double*>(payload.data());
  for (Eigen::Index i = 0; i < ds.data.rows(); ++i) {
    for (Eigen::Index t = 0; t < ds.data.cols(); ++t) {
      out[i * ds.data.cols() + t] = ds.data(i, t);
    }
  }
  write_file_atomic(path, payload);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& field, long line_no, std::size_t col,
                    const fs::path& path) {
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0') {
    throw ParseError("'" + path.string() + "': line " + std::to_string(line_no) +
                     ", column " + std::to_string(col + 1) + ": cannot parse '" +
                     field + "' as a number");
  }
  if (!std::isfinite(v)) {
    throw ParseError("'" + path.string() + "': line " + std::to_string(line_no) +
                     ", column " + std::to_string(col + 1) + ": non-finite value '" +
                     field + "'");
  }
  return v;
}

Dataset load_csv(const fs::path& path, double srate) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("'" + path.string() + "': empty file");
  }
  Dataset ds;
  ds.labels = split_csv_line(line);
  const std::size_t n = ds.labels.size();

  std::vector<std::vector<double>> columns(n);
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != n) {
      throw ParseError("'" + path.string() + "': line " + std::to_string(line_no) +
                       ": expected " + std::to_string(n) + " fields, got " +
                       std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < n; ++j) {
      columns[j].push_back(parse_double(fields[j], line_no, j, path));
    }
  }
  const std::size_t N = columns.empty() ? 0 : columns[0].size();
  ds.data.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(N));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t t = 0; t < N; ++t) {
      ds.data(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)) =
          columns[j][t];
    }
  }
  ds.srate = srate;
  ds.id = path.stem().string();
  ds.validate();
  return ds;
}

void save_csv(const Dataset& ds, const fs::path& path) {
  std::ostringstream out;
  for (std::size_t j = 0; j < ds.labels.size(); ++j) {
    if (j) out << ',';
    out << ds.labels[j];
  }
  out << '\n';
  char buf[40];
  for (Eigen::Index t = 0; t < ds.data.cols(); ++t) {
    for (Eigen::Index i = 0; i < ds.data.rows(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.data(i, t));
      if (i) out << ',';
      out << buf;
    }
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace

Dataset load_dataset(const fs::path& path, DatasetFormat format, double csv_srate) {
  if (format == DatasetFormat::icab) {
    return load_icab(path);
  }
  if (!(csv_srate > 0.0)) {
    throw ValidationError("CSV datasets need a positive sampling rate (--srate)");
  }
  return load_csv(path, csv_srate);
}

void save_dataset(const Dataset& ds, const fs::path& path, DatasetFormat format) {
  ds.validate();
  if (format == DatasetFormat::icab) {
    save_icab(ds, path);
  } else {
    save_csv(ds, path);
  }
}

Matrix load_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open '" + path.string() + "'");
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      row.push_back(parse_double(fields[j], line_no, j, path));
    }
    if (!rows.empty() && row.size() != rows[0].size()) {
      throw ParseError("'" + path.string() + "': line " + std::to_string(line_no) +
                       ": ragged row (" + std::to_string(row.size()) + " vs " +
                       std::to_string(rows[0].size()) + " fields)");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw ParseError("'" + path.string() + "': no rows");
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

void save_matrix_csv(const Matrix& m, const fs::path& path) {
  std::ostringstream out;
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

Matrix load_matrix_binary(const fs::path& path, Eigen::Index rows, Eigen::Index cols) {
  const std::string payload = read_file(path);
  const std::size_t expected = static_cast<std::size_t>(rows * cols) * sizeof(double);
  if (payload.size() != expected) {
    throw ParseError("'" + path.string() + "': " + std::to_string(payload.size()) +
                     " bytes, expected " + std::to_string(expected) + " for " +
                     std::to_string(rows) + "x" + std::to_string(cols) + " doubles");
  }
  const double* values = reinterpret_cast<const double*>(payload.data());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = values[i * cols + j];
    }
  }
  return m;
}

void save_matrix_binary(const Matrix& m, const fs::path& path) {
  std::string payload;
  payload.resize(static_cast<std::size_t>(m.size()) * sizeof(double));
  double* out = reinterpret_cast<double*>(payload.data());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out[i * m.cols() + j] = m(i, j);
    }
  }
  write_file_atomic(path, payload);
}

}  // namespace icabench
