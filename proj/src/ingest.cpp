#include "neuroauth/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "neuroauth/error.hpp"

namespace neuroauth {

namespace fs = std::filesystem;
using nlohmann::json;

void SessionRecord::validate() const {
  if (n_channels() == 0 || samples.size() % n_channels() != 0) {
    throw Error(ErrorKind::kChannelCountMismatch, "sample matrix does not match channel count");
  }
  if (n_samples() == 0) throw Error(ErrorKind::kEmptyInput, "session has no samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw Error(ErrorKind::kNonFiniteValue,
                  "non-finite value at row " + std::to_string(i / n_channels()));
    }
  }
}

const ManifestEntry& DatasetManifest::find(int user_id, int session_id) const {
  for (const auto& e : entries) {
    if (e.user_id == user_id && e.session_id == session_id) return e;
  }
  throw Error(ErrorKind::kUnknownSession, "no manifest entry for user " + std::to_string(user_id) +
                                              " session " + std::to_string(session_id));
}

std::vector<int> DatasetManifest::users() const {
  std::set<int> u;
  for (const auto& e : entries) u.insert(e.user_id);
  return {u.begin(), u.end()};
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingFile, "cannot open manifest " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedDocument, "malformed manifest: " + std::string(e.what()));
  }

  DatasetManifest m;
  m.root = path.parent_path();
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != DatasetManifest::kSchemaVersion) {
      throw Error(ErrorKind::kMalformedDocument,
                  "unsupported manifest schema_version " + std::to_string(version));
    }
    m.sample_rate_hz = doc.at("sample_rate_hz").get<double>();
    for (const auto& e : doc.at("entries")) {
      ManifestEntry entry;
      entry.user_id = e.at("user_id").get<int>();
      entry.session_id = e.at("session_id").get<int>();
      entry.path = e.at("path").get<std::string>();
      entry.sample_count = e.at("sample_count").get<std::size_t>();
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedDocument, "malformed manifest: " + std::string(e.what()));
  }
  if (!(m.sample_rate_hz > 0.0)) {
    throw Error(ErrorKind::kMalformedDocument, "manifest sample_rate_hz must be positive");
  }
  if (m.entries.empty()) throw Error(ErrorKind::kEmptyManifest, "empty manifest");

  std::sort(m.entries.begin(), m.entries.end(), [](const auto& a, const auto& b) {
    return std::pair(a.user_id, a.session_id) < std::pair(b.user_id, b.session_id);
  });
  for (std::size_t i = 1; i < m.entries.size(); ++i) {
    if (m.entries[i].user_id == m.entries[i - 1].user_id &&
        m.entries[i].session_id == m.entries[i - 1].session_id) {
      throw Error(ErrorKind::kDuplicateSession,
                  "duplicate session (" + std::to_string(m.entries[i].user_id) + ", " +
                      std::to_string(m.entries[i].session_id) + ")");
    }
  }
  return m;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  json doc;
  doc["schema_version"] = DatasetManifest::kSchemaVersion;
  doc["sample_rate_hz"] = manifest.sample_rate_hz;
  doc["entries"] = json::array();
  for (const auto& e : manifest.entries) {
    doc["entries"].push_back({{"user_id", e.user_id},
                              {"session_id", e.session_id},
                              {"path", e.path},
                              {"sample_count", e.sample_count}});
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write manifest " + path.string());
  out << doc.dump(2) << '\n';
}

std::string session_file_name(int user_id, int session_id) {
  return "u" + std::to_string(user_id) + "_s" + std::to_string(session_id) + ".csv";
}

SessionRecord load_session(const DatasetManifest& manifest, int user_id, int session_id) {
  const ManifestEntry& entry = manifest.find(user_id, session_id);
  SessionRecord rec =
      read_session_csv(manifest.root / entry.path, user_id, session_id, manifest.sample_rate_hz);
  if (rec.n_samples() != entry.sample_count) {
    throw Error(ErrorKind::kMalformedDocument,
                "session " + entry.path + " has " + std::to_string(rec.n_samples()) +
                    " rows, manifest declares " + std::to_string(entry.sample_count));
  }
  return rec;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

SessionRecord read_session_csv(const fs::path& path, int user_id, int session_id,
                               double sample_rate_hz) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kMissingFile, "cannot open session file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (in.bad()) throw Error(ErrorKind::kIo, "read failure on " + path.string());

  std::string_view rest(text);
  auto next_line = [&rest]() -> std::string_view {
    const std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  SessionRecord rec;
  rec.user_id = user_id;
  rec.session_id = session_id;
  rec.sample_rate_hz = sample_rate_hz;

  const auto header = split_commas(next_line());
  if (header.size() != kNumChannels) {
    throw Error(ErrorKind::kChannelCountMismatch,
                "channel count mismatch in " + path.string() + ": header has " +
                    std::to_string(header.size()) + " columns");
  }
  rec.channels = ChannelSet(std::vector<std::string>(header.begin(), header.end()));

  std::size_t row = 0;
  while (!rest.empty()) {
    const std::string_view line = next_line();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != kNumChannels) {
      throw Error(ErrorKind::kChannelCountMismatch,
                  "channel count mismatch in " + path.string() + " at row " + std::to_string(row) +
                      ": " + std::to_string(fields.size()) + " columns");
    }
    for (auto f : fields) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      const bool nan_text = f == "nan" || f == "NaN" || f == "inf" || f == "-inf";
      if (nan_text || (ec == std::errc() && ptr == f.data() + f.size() && !std::isfinite(v))) {
        throw Error(ErrorKind::kNonFiniteValue,
                    "non-finite value at row " + std::to_string(row) + " of " + path.string());
      }
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw Error(ErrorKind::kMalformedDocument, "unparseable value '" + std::string(f) +
                                                       "' at row " + std::to_string(row) +
                                                       " of " + path.string());
      }
      rec.samples.push_back(v);
    }
    ++row;
  }
  if (row == 0) throw Error(ErrorKind::kEmptyInput, "session file " + path.string() + " has no rows");
  return rec;
}

void write_session_csv(const SessionRecord& record, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write session file " + path.string());
  std::string line;
  for (std::size_t c = 0; c < record.n_channels(); ++c) {
    if (c) line += ',';
    line += record.channels[c];
  }
  line += '\n';
  out << line;
  char buf[64];
  for (std::size_t t = 0; t < record.n_samples(); ++t) {
    line.clear();
    for (std::size_t c = 0; c < record.n_channels(); ++c) {
      if (c) line += ',';
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), record.at(t, c));
      line.append(buf, ptr);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw Error(ErrorKind::kIo, "write failure on " + path.string());
}

DatasetStats dataset_stats(std::span<const SessionCount> counts, CountStage stage) {
  if (counts.empty()) throw Error(ErrorKind::kEmptyInput, "dataset_stats on empty input");
  std::vector<std::size_t> v;
  v.reserve(counts.size());
  for (const auto& c : counts) v.push_back(c.count);
  std::sort(v.begin(), v.end());

  DatasetStats s;
  s.stage = stage;
  s.entries = v.size();
  s.total = std::accumulate(v.begin(), v.end(), std::size_t{0});
  const double n = static_cast<double>(v.size());
  s.average = static_cast<double>(s.total) / n;
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 ? static_cast<double>(v[mid])
                          : 0.5 * (static_cast<double>(v[mid - 1]) + static_cast<double>(v[mid]));
  s.minimum = v.front();
  s.maximum = v.back();
  double ss = 0.0;
  for (auto x : v) {
    const double d = static_cast<double>(x) - s.average;
    ss += d * d;
  }
  s.std_population = std::sqrt(ss / n);
  s.std_sample = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return s;
}

std::vector<SessionCount> group_counts_by_user(std::span<const SessionCount> counts) {
  std::map<int, std::size_t> per_user;
  for (const auto& c : counts) per_user[c.user_id] += c.count;
  std::vector<SessionCount> out;
  for (const auto& [user, total] : per_user) out.push_back({user, 0, total});
  return out;
}

const char* to_string(CountStage stage) {
  return stage == CountStage::kPreProcessing ? "pre-processing" : "post-processing";
}

}  // namespace neuroauth
