#include "icabench/io.hpp"

#include "icabench/synth.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace icabench;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "icabench_io_tests";
  fs::create_directories(dir);
  return dir;
}

Dataset small_dataset(int n, long samples, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_sources = n;
  spec.n_samples = samples;
  spec.seed = seed;
  return synth_dataset(spec).first;
}

}  // namespace

TEST_CASE("icab round trip is bit exact") {
  const Dataset ds = small_dataset(4, 1000, 42);
  const fs::path path = temp_dir() / "rt.icab";
  save_dataset(ds, path, DatasetFormat::icab);
  const Dataset back = load_dataset(path, DatasetFormat::icab);
  CHECK(back.data == ds.data);
  CHECK(back.srate == ds.srate);
  CHECK(back.labels == ds.labels);
  CHECK(back.id == ds.id);
}

TEST_CASE("icab payload is exactly 8 bytes per value") {
  Dataset ds;
  ds.data = Matrix::Random(2, 10);
  ds.srate = 100.0;
  ds.labels = default_labels(2);
  ds.id = "tiny";
  const fs::path path = temp_dir() / "tiny.icab";
  save_dataset(ds, path, DatasetFormat::icab);
  CHECK(fs::file_size(path) == 160);
  CHECK(fs::exists(temp_dir() / "tiny.icab.json"));
}

TEST_CASE("csv export of integer data reimports within 1e-12") {
  Dataset ds;
  ds.data.resize(3, 50);
  for (int i = 0; i < 3; ++i) {
    for (int t = 0; t < 50; ++t) ds.data(i, t) = i * 50 + t;
  }
  ds.srate = 128.0;
  ds.labels = {"a", "b", "c"};
  ds.id = "ints";
  const fs::path path = temp_dir() / "ints.csv";
  save_dataset(ds, path, DatasetFormat::csv);
  const Dataset back = load_dataset(path, DatasetFormat::csv, 128.0);
  CHECK((back.data - ds.data).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(back.labels == ds.labels);
}

TEST_CASE("csv with a NaN cell reports row and column") {
  const fs::path path = temp_dir() / "bad.csv";
  std::ofstream(path) << "c1,c2\n1.0,2.0\n3.0,nan\n";
  try {
    load_dataset(path, DatasetFormat::csv, 100.0);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }
}

TEST_CASE("header/payload shape mismatch is a parse error") {
  const Dataset ds = small_dataset(3, 100, 1);
  const fs::path path = temp_dir() / "mismatch.icab";
  save_dataset(ds, path, DatasetFormat::icab);
  // Corrupt the header: claim one more channel than the payload holds.
  const fs::path header = temp_dir() / "mismatch.icab.json";
  std::string text = read_file(header);
  const auto pos = text.find("\"n_channels\": 3");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 15, "\"n_channels\": 4");
  std::ofstream(header, std::ios::trunc) << text;
  CHECK_THROWS_AS(load_dataset(path, DatasetFormat::icab), ParseError);
}

TEST_CASE("malformed header names the byte offset") {
  const fs::path payload = temp_dir() / "broken.icab";
  std::ofstream(payload) << "xxxxxxxx";
  std::ofstream(temp_dir() / "broken.icab.json") << "{ not json";
  try {
    load_dataset(payload, DatasetFormat::icab);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}

TEST_CASE("matrix csv round trip is bit exact") {
  Rng rng(5);
  const Matrix m = rng.gaussian_matrix(7, 7) * 1e-3;
  const fs::path path = temp_dir() / "w.csv";
  save_matrix_csv(m, path);
  CHECK(load_matrix_csv(path) == m);
}

TEST_CASE("binary matrix io validates size") {
  Rng rng(6);
  const Matrix m = rng.gaussian_matrix(4, 4);
  const fs::path path = temp_dir() / "w.bin";
  save_matrix_binary(m, path);
  CHECK(load_matrix_binary(path, 4, 4) == m);
  CHECK_THROWS_AS(load_matrix_binary(path, 5, 5), ParseError);
}
