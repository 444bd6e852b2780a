#include "bdnn/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bdnn/rng.hpp"

namespace bdnn {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t read_u32(std::istream& in, const char* what) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw std::runtime_error(std::string(what) + ": truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in, const char* what) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw std::runtime_error(std::string(what) + ": truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_f32(std::ostream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  write_u32(out, bits);
}

float read_f32(std::istream& in, const char* what) {
  const std::uint32_t bits = read_u32(in, what);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

void expect_magic(std::istream& in, const char* magic, const char* what) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0) {
    throw std::runtime_error(std::string(what) + ": bad magic");
  }
}

void expect_eof(std::istream& in, const char* what) {
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error(std::string(what) + ": trailing bytes");
  }
}

constexpr std::uint32_t kDatasetVersion = 1;

}  // namespace

void save_dataset(const std::string& path, const Mat& x) {
  require_finite(x, "dataset");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open dataset for writing: " + path);
  out.write("BHDM", 4);
  write_u32(out, kDatasetVersion);
  write_u32(out, static_cast<std::uint32_t>(x.rows()));
  write_u32(out, static_cast<std::uint32_t>(x.cols()));
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      write_f32(out, static_cast<float>(x(i, j)));
    }
  }
  if (!out) throw std::runtime_error("dataset: write failed: " + path);
}

Mat load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  expect_magic(in, "BHDM", "dataset");
  const std::uint32_t version = read_u32(in, "dataset");
  if (version != kDatasetVersion) {
    throw std::runtime_error("dataset: unsupported version " +
                             std::to_string(version));
  }
  const std::uint32_t rows = read_u32(in, "dataset");
  const std::uint32_t cols = read_u32(in, "dataset");
  if (rows == 0 || cols == 0) throw std::runtime_error("dataset: empty");
  Mat x(rows, cols);
  for (std::uint32_t j = 0; j < cols; ++j) {
    for (std::uint32_t i = 0; i < rows; ++i) {
      x(i, j) = static_cast<double>(read_f32(in, "dataset"));
    }
  }
  expect_eof(in, "dataset");
  require_finite(x, "dataset");
  return x;
}

void save_labels(const std::string& path, const LabelVector& y) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open labels for writing: " + path);
  for (std::uint32_t label : y) write_u32(out, label);
  if (!out) throw std::runtime_error("labels: write failed: " + path);
}

LabelVector load_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open labels: " + path);
  LabelVector y;
  while (in.peek() != std::char_traits<char>::eof()) {
    y.push_back(read_u32(in, "labels"));
  }
  return y;
}

void save_codes(const std::string& path, const PackedCodes& codes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open codes for writing: " + path);
  out.write("BHCB", 4);
  write_u32(out, static_cast<std::uint32_t>(codes.bits));
  write_u32(out, static_cast<std::uint32_t>(codes.count));
  for (std::uint64_t word : codes.words) write_u64(out, word);
  if (!out) throw std::runtime_error("codes: write failed: " + path);
}

PackedCodes load_codes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open codes: " + path);
  expect_magic(in, "BHCB", "codes");
  PackedCodes codes;
  codes.bits = static_cast<Index>(read_u32(in, "codes"));
  codes.count = static_cast<Index>(read_u32(in, "codes"));
  if (codes.bits < 1) throw std::runtime_error("codes: bad code length");
  const Index total = codes.words_per_code() * codes.count;
  codes.words.resize(total);
  for (Index w = 0; w < total; ++w) codes.words[w] = read_u64(in, "codes");
  expect_eof(in, "codes");
  return codes;
}

void save_ground_truth(const std::string& path, const GroundTruth& gt) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open ground truth for writing: " + path);
  }
  for (const auto& relevant : gt.relevant) {
    for (std::size_t i = 0; i < relevant.size(); ++i) {
      if (i) out << ' ';
      out << relevant[i];
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("ground truth: write failed: " + path);
}

GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ground truth: " + path);
  GroundTruth gt;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::vector<Index> relevant;
    long long value = 0;
    while (fields >> value) {
      if (value < 0) throw std::runtime_error("ground truth: negative index");
      relevant.push_back(static_cast<Index>(value));
    }
    if (!fields.eof()) throw std::runtime_error("ground truth: non-numeric token");
    gt.relevant.push_back(std::move(relevant));
  }
  return gt;
}

void write_trace_csv(const std::string& path,
                     const std::vector<TraceEntry>& history,
                     std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace for writing: " + path);
  out << "# seed=" << seed << '\n';
  out << "iteration,phase,objective\n";
  out.precision(17);
  for (const TraceEntry& entry : history) {
    out << entry.iteration << ',' << entry.phase << ',' << entry.objective
        << '\n';
  }
  if (!out) throw std::runtime_error("trace: write failed: " + path);
}

std::vector<Index> default_hidden_units(Index code_length) {
  switch (code_length) {
    case 8:
      return {90, 20};
    case 16:
      return {90, 30};
    case 24:
      return {100, 40};
    case 32:
      return {120, 50};
    default:
      throw std::invalid_argument(
          "no default hidden layout for code length " +
          std::to_string(code_length) + "; give layer_sizes explicitly");
  }
}

LayerSchedule schedule_for(HashMode mode, Index input_dim, Index code_length,
                           const std::vector<Index>& layer_sizes) {
  if (input_dim < 1) throw std::invalid_argument("schedule: input_dim must be >= 1");
  if (code_length < 1) {
    throw std::invalid_argument("schedule: code_length must be >= 1");
  }
  std::vector<Index> sizes = layer_sizes;
  if (sizes.empty()) {
    const std::vector<Index> hidden = default_hidden_units(code_length);
    sizes.push_back(input_dim);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(code_length);
    if (mode == HashMode::unsupervised) sizes.push_back(input_dim);
  } else {
    if (sizes.front() != input_dim) {
      throw std::invalid_argument("layer_sizes: first entry must equal the data dimension");
    }
  }
  const LayerSchedule schedule = LayerSchedule::make(mode, std::move(sizes));
  if (schedule.code_length() != code_length) {
    throw std::invalid_argument("layer_sizes: code layer width must equal code_length");
  }
  return schedule;
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

long long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long parsed = 0;
  try {
    parsed = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + key + ": not an integer: " + value);
  }
  if (used != value.size()) {
    throw std::invalid_argument("config: " + key + ": not an integer: " + value);
  }
  return parsed;
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double parsed = 0;
  try {
    parsed = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + key + ": not a number: " + value);
  }
  if (used != value.size() || !std::isfinite(parsed)) {
    throw std::invalid_argument("config: " + key + ": not a finite number: " + value);
  }
  return parsed;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw std::invalid_argument("config: " + key + ": expected 0/1/true/false");
}

std::vector<Index> parse_index_list(const std::string& key,
                                    const std::string& value) {
  std::vector<Index> out;
  std::string item;
  std::istringstream parts(value);
  while (std::getline(parts, item, ',')) {
    const long long v = parse_int(key, trim(item));
    if (v < 1) throw std::invalid_argument("config: " + key + ": entries must be >= 1");
    out.push_back(static_cast<Index>(v));
  }
  if (out.empty()) throw std::invalid_argument("config: " + key + ": empty list");
  return out;
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text) {
  RunConfig cfg;
  bool mode_seen = false;
  std::set<std::string> seen;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key or value");
    }
    if (!seen.insert(key).second) {
      throw std::invalid_argument("config: duplicate key: " + key);
    }

    if (key == "mode") {
      if (value == "uh") {
        cfg.mode = HashMode::unsupervised;
      } else if (value == "sh") {
        cfg.mode = HashMode::supervised;
      } else {
        throw std::invalid_argument("config: mode must be uh or sh");
      }
      mode_seen = true;
    } else if (key == "code_length") {
      const long long v = parse_int(key, value);
      if (v < 1) throw std::invalid_argument("config: code_length must be >= 1");
      cfg.code_length = static_cast<Index>(v);
    } else if (key == "layer_sizes") {
      cfg.layer_sizes = parse_index_list(key, value);
    } else if (key == "lambda1" || key == "lambda2" || key == "lambda3" ||
               key == "lambda4") {
      const double v = parse_real(key, value);
      if (v < 0) throw std::invalid_argument("config: " + key + " must be >= 0");
      if (key == "lambda1") cfg.lambda1 = v;
      if (key == "lambda2") cfg.lambda2 = v;
      if (key == "lambda3") cfg.lambda3 = v;
      if (key == "lambda4") cfg.lambda4 = v;
    } else if (key == "T") {
      const long long v = parse_int(key, value);
      if (v < 1) throw std::invalid_argument("config: T must be >= 1");
      cfg.T = static_cast<int>(v);
    } else if (key == "lbfgs_memory") {
      cfg.lbfgs.memory = static_cast<int>(parse_int(key, value));
    } else if (key == "lbfgs_max_iterations") {
      cfg.lbfgs.max_iterations = static_cast<int>(parse_int(key, value));
    } else if (key == "lbfgs_grad_tolerance") {
      cfg.lbfgs.grad_tolerance = parse_real(key, value);
    } else if (key == "lbfgs_wolfe_c1") {
      cfg.lbfgs.wolfe_c1 = parse_real(key, value);
    } else if (key == "lbfgs_wolfe_c2") {
      cfg.lbfgs.wolfe_c2 = parse_real(key, value);
    } else if (key == "lbfgs_max_line_search_steps") {
      cfg.lbfgs.max_line_search_steps = static_cast<int>(parse_int(key, value));
    } else if (key == "b_step_max_sweeps") {
      const long long v = parse_int(key, value);
      if (v < 1) throw std::invalid_argument("config: b_step_max_sweeps must be >= 1");
      cfg.b_step_max_sweeps = static_cast<int>(v);
    } else if (key == "seed") {
      const long long v = parse_int(key, value);
      if (v < 0) throw std::invalid_argument("config: seed must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(v);
    } else if (key == "standardize") {
      cfg.standardize = parse_bool(key, value);
    } else if (key == "per_class_sample") {
      const long long v = parse_int(key, value);
      if (v < 0) throw std::invalid_argument("config: per_class_sample must be >= 0");
      cfg.per_class_sample = static_cast<Index>(v);
    } else if (key == "max_similarity_entries") {
      const long long v = parse_int(key, value);
      if (v < 1) {
        throw std::invalid_argument("config: max_similarity_entries must be >= 1");
      }
      cfg.max_similarity_entries = static_cast<Index>(v);
    } else {
      throw std::invalid_argument("config: unknown key: " + key);
    }
  }
  if (!mode_seen) throw std::invalid_argument("config: missing required key: mode");
  cfg.lbfgs.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config_text(text.str());
}

UhConfig RunConfig::uh_config(Index input_dim) const {
  UhConfig cfg;
  cfg.lambda1 = lambda1.value_or(1e-5);
  cfg.lambda2 = lambda2.value_or(5e-2);
  cfg.lambda3 = lambda3.value_or(1e-2);
  cfg.lambda4 = lambda4.value_or(1e-6);
  cfg.T = T.value_or(10);
  cfg.schedule =
      schedule_for(HashMode::unsupervised, input_dim, code_length, layer_sizes);
  cfg.lbfgs = lbfgs;
  cfg.b_step_max_sweeps = b_step_max_sweeps;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

ShConfig RunConfig::sh_config(Index input_dim) const {
  ShConfig cfg;
  cfg.lambda1 = lambda1.value_or(1e-3);
  cfg.lambda2 = lambda2.value_or(5.0);
  cfg.lambda3 = lambda3.value_or(1.0);
  cfg.lambda4 = lambda4.value_or(1e-4);
  cfg.T = T.value_or(5);
  cfg.schedule =
      schedule_for(HashMode::supervised, input_dim, code_length, layer_sizes);
  cfg.lbfgs = lbfgs;
  if (per_class_sample > 0) cfg.per_class_sample = per_class_sample;
  cfg.max_similarity_entries = max_similarity_entries;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

Standardization fit_standardization(const Mat& x) {
  if (x.cols() < 2) {
    throw std::invalid_argument("standardize: need at least two samples");
  }
  Standardization st;
  st.mean = x.rowwise().mean();
  const Mat centered = x.colwise() - st.mean;
  st.inv_sigma = Vec(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    const double var = centered.row(i).squaredNorm() /
                       static_cast<double>(x.cols() - 1);
    const double sigma = std::sqrt(var);
    st.inv_sigma(i) = sigma > 0 ? 1.0 / sigma : 1.0;
  }
  return st;
}

Mat apply_standardization(const Standardization& st, const Mat& x) {
  if (x.rows() != st.mean.size()) {
    throw std::invalid_argument("standardize: dimension mismatch");
  }
  return st.inv_sigma.asDiagonal() * (x.colwise() - st.mean);
}

void fold_standardization(NetworkParams& params, const Standardization& st) {
  if (params.schedule.input_dim() != st.mean.size()) {
    throw std::invalid_argument("standardize fold: dimension mismatch");
  }
  Mat& w1 = params.weights.front();
  w1 = w1 * st.inv_sigma.asDiagonal();
  params.biases.front() -= w1 * st.mean;
}

std::pair<Mat, LabelVector> synth_dataset(const SynthSpec& spec) {
  if (spec.clusters < 1 || spec.dims < 1 || spec.per_cluster < 1) {
    throw std::invalid_argument("synth: counts must be >= 1");
  }
  if (spec.clusters > spec.dims) {
    throw std::invalid_argument("synth: need clusters <= dims for distinct means");
  }
  if (!(spec.radius >= 0) || !std::isfinite(spec.radius)) {
    throw std::invalid_argument("synth: radius must be finite and >= 0");
  }
  const Index m = spec.clusters * spec.per_cluster;
  Mat x(spec.dims, m);
  LabelVector y(m);
  Rng rng(spec.seed);
  for (Index c = 0; c < spec.clusters; ++c) {
    for (Index i = 0; i < spec.per_cluster; ++i) {
      const Index col = c * spec.per_cluster + i;
      for (Index d = 0; d < spec.dims; ++d) {
        x(d, col) = (d == c ? spec.radius : 0.0) + rng.normal();
      }
      y[col] = static_cast<std::uint32_t>(c);
    }
  }
  return {std::move(x), std::move(y)};
}

}  // namespace bdnn
