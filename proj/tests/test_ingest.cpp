#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "neuroauth/error.hpp"
#include "neuroauth/ingest.hpp"
#include "neuroauth/random.hpp"

using namespace neuroauth;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("neuroauth-ingest-" + std::to_string(Rng(std::random_device{}()).next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

SessionRecord random_record(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  SessionRecord r;
  r.user_id = 2;
  r.session_id = 5;
  r.samples.resize(rows * kNumChannels);
  for (auto& v : r.samples) v = rng.normal() * 30.0;
  return r;
}

std::string header() {
  std::string h;
  for (std::size_t c = 0; c < kNumChannels; ++c) h += (c ? "," : "") + std::string(kDefaultChannelLabels[c]);
  return h + "\n";
}

std::string data_row(std::size_t cols, const std::string& cell = "1.5") {
  std::string r;
  for (std::size_t c = 0; c < cols; ++c) r += (c ? "," : "") + cell;
  return r + "\n";
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::kInvalidArgument;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  FAIL("no error thrown");
  return {};
}

}  // namespace

TEST_CASE("default channel set") {
  const ChannelSet c;
  CHECK(c.size() == 32);
  CHECK(c[0] == "Fp1");
  CHECK(c[4] == "Fz");
  CHECK(c[31] == "PO10");
  CHECK_THROWS_AS(ChannelSet(std::vector<std::string>(31, "x")), Error);
  std::vector<std::string> dup(c.labels());
  dup[1] = dup[0];
  CHECK_THROWS_AS(ChannelSet{dup}, Error);
}

TEST_CASE("session CSV round trip is exact and byte-stable") {
  TempDir dir;
  const SessionRecord r = random_record(1000, 1);
  write_session_csv(r, dir.path / "a.csv");
  const SessionRecord back = read_session_csv(dir.path / "a.csv", 2, 5, 500.0);
  CHECK(back.n_samples() == 1000);
  CHECK(back.n_channels() == 32);
  CHECK(back.samples == r.samples);
  CHECK(back.channels == r.channels);
  write_session_csv(back, dir.path / "b.csv");
  CHECK(slurp(dir.path / "a.csv") == slurp(dir.path / "b.csv"));
}

TEST_CASE("session CSV errors") {
  TempDir dir;
  const fs::path p = dir.path / "bad.csv";

  std::string h31;
  for (int c = 0; c < 31; ++c) h31 += (c ? ",c" : "c") + std::to_string(c);
  spit(p, h31 + "\n" + data_row(31));
  CHECK(kind_of([&] { read_session_csv(p, 1, 1, 500.0); }) == ErrorKind::kChannelCountMismatch);
  CHECK(message_of([&] { read_session_csv(p, 1, 1, 500.0); }).find("channel count mismatch") != std::string::npos);

  spit(p, header() + data_row(32) + data_row(31));
  CHECK(message_of([&] { read_session_csv(p, 1, 1, 500.0); }).find("channel count mismatch") != std::string::npos);

  std::string text = header();
  for (int r = 0; r < 10; ++r) text += data_row(32, r == 7 ? "NaN" : "0.25");
  spit(p, text);
  CHECK(kind_of([&] { read_session_csv(p, 1, 1, 500.0); }) == ErrorKind::kNonFiniteValue);
  CHECK(message_of([&] { read_session_csv(p, 1, 1, 500.0); }).find("row 7 ") != std::string::npos);

  spit(p, header() + data_row(32, "abc"));
  CHECK(kind_of([&] { read_session_csv(p, 1, 1, 500.0); }) == ErrorKind::kMalformedDocument);
  spit(p, header());
  CHECK(kind_of([&] { read_session_csv(p, 1, 1, 500.0); }) == ErrorKind::kEmptyInput);
  CHECK(kind_of([&] { read_session_csv(dir.path / "missing.csv", 1, 1, 500.0); }) == ErrorKind::kMissingFile);
}

TEST_CASE("manifest load, ordering and errors") {
  TempDir dir;
  DatasetManifest m;
  m.root = dir.path;
  for (int u = 12; u >= 1; --u) {
    for (int s = 9; s >= 1; --s) m.entries.push_back({u, s, session_file_name(u, s), 100});
  }
  write_manifest(m, dir.path / "manifest.json");
  const DatasetManifest back = load_manifest(dir.path / "manifest.json");
  REQUIRE(back.entries.size() == 108);
  CHECK(back.entries.front().user_id == 1);
  CHECK(back.entries.front().session_id == 1);
  CHECK(back.entries[9].user_id == 2);
  CHECK(back.entries.back().session_id == 9);
  CHECK(back.users().size() == 12);
  CHECK(back.find(3, 2).path == "u3_s2.csv");
  CHECK(kind_of([&] { back.find(13, 1); }) == ErrorKind::kUnknownSession);

  spit(dir.path / "empty.json", R"({"schema_version": 1, "sample_rate_hz": 500, "entries": []})");
  CHECK(kind_of([&] { load_manifest(dir.path / "empty.json"); }) == ErrorKind::kEmptyManifest);
  CHECK(message_of([&] { load_manifest(dir.path / "empty.json"); }) == "empty manifest");

  spit(dir.path / "dup.json", R"({"schema_version": 1, "sample_rate_hz": 500, "entries": [
    {"user_id": 3, "session_id": 2, "path": "a.csv", "sample_count": 1},
    {"user_id": 3, "session_id": 2, "path": "b.csv", "sample_count": 1}]})");
  CHECK(kind_of([&] { load_manifest(dir.path / "dup.json"); }) == ErrorKind::kDuplicateSession);
  CHECK(message_of([&] { load_manifest(dir.path / "dup.json"); }).find("duplicate session") != std::string::npos);

  spit(dir.path / "broken.json", "{\"schema_version\": 1,");
  CHECK(kind_of([&] { load_manifest(dir.path / "broken.json"); }) == ErrorKind::kMalformedDocument);
  CHECK(kind_of([&] { load_manifest(dir.path / "nope.json"); }) == ErrorKind::kMissingFile);
}

TEST_CASE("load_session checks the declared sample count") {
  TempDir dir;
  write_session_csv(random_record(20, 2), dir.path / session_file_name(1, 1));
  DatasetManifest m;
  m.root = dir.path;
  m.entries.push_back({1, 1, session_file_name(1, 1), 20});
  const SessionRecord r = load_session(m, 1, 1);
  CHECK(r.user_id == 1);
  CHECK(r.n_samples() == 20);
  m.entries[0].sample_count = 21;
  CHECK(kind_of([&] { load_session(m, 1, 1); }) == ErrorKind::kMalformedDocument);
}

TEST_CASE("dataset statistics") {
  const std::vector<SessionCount> four{{1, 1, 1}, {1, 2, 2}, {2, 1, 3}, {2, 2, 4}};
  const DatasetStats s = dataset_stats(four, CountStage::kPostProcessing);
  CHECK(s.total == 10);
  CHECK(s.median == 2.5);
  CHECK(s.average == 2.5);
  CHECK(s.minimum == 1);
  CHECK(s.maximum == 4);
  CHECK(s.std_population == doctest::Approx(std::sqrt(1.25)));
  CHECK(s.std_sample == doctest::Approx(std::sqrt(5.0 / 3.0)));

  const std::vector<SessionCount> flat{{1, 1, 5}, {1, 2, 5}, {1, 3, 5}};
  const DatasetStats f = dataset_stats(flat, CountStage::kPreProcessing);
  CHECK(f.total == 15);
  CHECK(f.std_population == 0.0);
  CHECK(f.std_sample == 0.0);
  CHECK_THROWS_AS(dataset_stats(std::vector<SessionCount>{}, CountStage::kPreProcessing), Error);

  const auto by_user = group_counts_by_user(four);
  REQUIRE(by_user.size() == 2);
  CHECK(by_user[0].count == 3);
  CHECK(by_user[1].count == 7);
  CHECK(by_user[1].session_id == 0);
}

TEST_CASE("dataset statistics invariants (property)") {
  Rng rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<SessionCount> c;
    const std::size_t n = 1 + rng.below(120);
    std::size_t exact = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t v = rng.below(3'000'000);
      exact += v;
      c.push_back({static_cast<int>(i / 9 + 1), static_cast<int>(i % 9 + 1), v});
    }
    const DatasetStats s = dataset_stats(c, CountStage::kPreProcessing);
    CHECK(s.total == exact);
    CHECK(static_cast<double>(s.minimum) <= s.median);
    CHECK(s.median <= static_cast<double>(s.maximum));
    CHECK(std::abs(s.average * static_cast<double>(n) - static_cast<double>(s.total)) <=
          1e-6 * std::max(1.0, static_cast<double>(s.total)));
    CHECK(s.std_population <= s.std_sample + 1e-12);
  }
}
