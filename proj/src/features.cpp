#include "neuroauth/features.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "neuroauth/error.hpp"

namespace neuroauth {

namespace fs = std::filesystem;

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.values = values.select_rows(indices);
  out.column_names = column_names;
  out.meta.reserve(indices.size());
  for (auto i : indices) out.meta.push_back(meta[i]);
  return out;
}

FeatureMatrix FeatureMatrix::select_cols(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.values = values.select_cols(indices);
  out.meta = meta;
  for (auto j : indices) out.column_names.push_back(column_names[j]);
  return out;
}

void FeatureMatrix::append(const FeatureMatrix& other) {
  if (column_names.empty()) column_names = other.column_names;
  values.append_rows(other.values);
  meta.insert(meta.end(), other.meta.begin(), other.meta.end());
}

std::vector<std::string> feature_column_names(const ChannelSet& channels) {
  std::vector<std::string> names;
  names.reserve(channels.size() * kFeaturesPerChannel);
  for (const auto& label : channels.labels()) {
    for (auto f : kFeatureNames) names.push_back(label + "_" + std::string(f));
  }
  return names;
}

std::vector<double> extract_features(std::span<const double> window, std::size_t n_channels,
                                     KurtosisConvention kurtosis) {
  if (n_channels == 0 || window.empty() || window.size() % n_channels != 0) {
    throw Error(ErrorKind::kEmptyInput, "extract_features: empty or ragged window");
  }
  const std::size_t n = window.size() / n_channels;
  std::vector<double> out(n_channels * kFeaturesPerChannel);
  for (std::size_t c = 0; c < n_channels; ++c) {
    kernels::channel_moments(window.data() + c, n, n_channels, kurtosis,
                             out.data() + c * kFeaturesPerChannel);
  }
  return out;
}

FeatureMatrix build_feature_matrix(std::span<const WindowedSession> sessions,
                                   KurtosisConvention kurtosis) {
  FeatureMatrix fm;
  if (sessions.empty()) {
    fm.column_names = feature_column_names(ChannelSet());
    fm.values = Matrix(0, fm.column_names.size());
    return fm;
  }
  const ChannelSet& channels = sessions.front().channels();
  fm.column_names = feature_column_names(channels);
  std::size_t total = 0;
  for (const auto& ws : sessions) {
    if (!(ws.channels() == channels)) {
      throw Error(ErrorKind::kChannelCountMismatch,
                  "channel-set mismatch in session (" + std::to_string(ws.user_id()) + ", " +
                      std::to_string(ws.session_id()) + ")");
    }
    total += ws.size();
  }
  std::vector<double> data;
  data.reserve(total * fm.column_names.size());
  fm.meta.reserve(total);
  for (const auto& ws : sessions) {
    Matrix block;
    kernels::parallel::window_features(ws.record().samples, channels.size(), ws.starts(),
                                       ws.window_len(), kurtosis, block);
    data.insert(data.end(), block.data().begin(), block.data().end());
    for (std::size_t w = 0; w < ws.size(); ++w) {
      fm.meta.push_back({ws.user_id(), ws.session_id(), w, ws.starts()[w]});
    }
  }
  fm.values = Matrix(total, fm.column_names.size(), std::move(data));
  return fm;
}

Normalizer fit_normalizer(const FeatureMatrix& train) {
  if (train.rows() < 2) throw Error(ErrorKind::kEmptyInput, "normalizer needs at least 2 rows");
  Normalizer n;
  const auto first = train.values.row(0);
  n.minimum.assign(first.begin(), first.end());
  n.maximum.assign(first.begin(), first.end());
  for (std::size_t r = 1; r < train.rows(); ++r) {
    const auto row = train.values.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      n.minimum[c] = std::min(n.minimum[c], row[c]);
      n.maximum[c] = std::max(n.maximum[c], row[c]);
    }
  }
  return n;
}

void Normalizer::apply_in_place(Matrix& m) const {
  if (m.cols() != minimum.size()) {
    throw Error(ErrorKind::kInvalidArgument, "normalizer width does not match matrix");
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double range = maximum[c] - minimum[c];
      row[c] = range > 0.0 ? (row[c] - minimum[c]) / range : 0.0;
    }
  }
}

FeatureMatrix Normalizer::apply(const FeatureMatrix& m) const {
  FeatureMatrix out = m;
  apply_in_place(out.values);
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

template <class T>
T parse_number(const std::string& s, const std::string& where) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::kMalformedDocument, "bad number '" + s + "' in " + where);
  }
  return v;
}

}  // namespace

void write_feature_matrix(const FeatureMatrix& m, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream values(dir / "features.csv");
  std::ofstream meta(dir / "features.meta.csv");
  if (!values || !meta) throw Error(ErrorKind::kIo, "cannot write feature files in " + dir.string());
  for (std::size_t c = 0; c < m.column_names.size(); ++c) {
    values << (c ? "," : "") << m.column_names[c];
  }
  values << '\n';
  char buf[64];
  std::string line;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    line.clear();
    const auto row = m.values.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += ',';
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), row[c]);
      line.append(buf, ptr);
    }
    values << line << '\n';
  }
  meta << "user_id,session_id,window_index,start_sample\n";
  for (const auto& rm : m.meta) {
    meta << rm.user_id << ',' << rm.session_id << ',' << rm.window_index << ','
         << rm.start_sample << '\n';
  }
  if (!values || !meta) throw Error(ErrorKind::kIo, "write failure in " + dir.string());
}

FeatureMatrix read_feature_matrix(const fs::path& dir) {
  std::ifstream values(dir / "features.csv");
  std::ifstream meta(dir / "features.meta.csv");
  if (!values || !meta) {
    throw Error(ErrorKind::kMissingFile, "feature files not found in " + dir.string());
  }
  FeatureMatrix m;
  std::string line;
  std::getline(values, line);
  m.column_names = split_line(line);
  const std::size_t cols = m.column_names.size();
  std::vector<double> data;
  std::size_t rows = 0;
  while (std::getline(values, line)) {
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != cols) {
      throw Error(ErrorKind::kMalformedDocument, "ragged row " + std::to_string(rows) + " in features.csv");
    }
    for (const auto& f : fields) data.push_back(parse_number<double>(f, "features.csv"));
    ++rows;
  }
  m.values = Matrix(rows, cols, std::move(data));
  std::getline(meta, line);
  while (std::getline(meta, line)) {
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != 4) throw Error(ErrorKind::kMalformedDocument, "bad row in features.meta.csv");
    m.meta.push_back({parse_number<int>(f[0], "features.meta.csv"),
                      parse_number<int>(f[1], "features.meta.csv"),
                      parse_number<std::size_t>(f[2], "features.meta.csv"),
                      parse_number<std::size_t>(f[3], "features.meta.csv")});
  }
  if (m.meta.size() != rows) {
    throw Error(ErrorKind::kMalformedDocument, "feature metadata row count does not match values");
  }
  return m;
}

}  // namespace neuroauth
