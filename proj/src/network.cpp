#include "bdnn/network.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace bdnn {

LayerSchedule LayerSchedule::make(HashMode mode, std::vector<Index> sizes) {
  LayerSchedule schedule;
  schedule.mode = mode;
  schedule.sizes = std::move(sizes);
  schedule.validate();
  return schedule;
}

void LayerSchedule::validate() const {
  if (sizes.size() < 3) {
    throw std::invalid_argument("schedule: need at least 3 layers");
  }
  for (Index s : sizes) {
    if (s < 1) throw std::invalid_argument("schedule: layer sizes must be >= 1");
  }
  if (mode == HashMode::unsupervised && sizes.back() != sizes.front()) {
    throw std::invalid_argument(
        "schedule: unsupervised nets reconstruct the input, s_n must equal s_1");
  }
}

Activation activation(const LayerSchedule& schedule, Index layer) {
  const Index n = schedule.layers();
  if (layer < 2 || layer > n) {
    throw std::logic_error("activation: layer index out of range");
  }
  if (schedule.mode == HashMode::unsupervised) {
    return layer <= n - 2 ? Activation::sigmoid : Activation::identity;
  }
  return layer <= n - 1 ? Activation::sigmoid : Activation::identity;
}

void NetworkParams::validate() const {
  schedule.validate();
  const std::size_t n = schedule.sizes.size();
  if (weights.size() != n - 1 || biases.size() != n - 1) {
    throw std::invalid_argument("params: need n-1 weight matrices and biases");
  }
  for (std::size_t l = 0; l + 1 < n; ++l) {
    if (weights[l].rows() != schedule.sizes[l + 1] ||
        weights[l].cols() != schedule.sizes[l]) {
      throw std::invalid_argument("params: weight shape mismatch at layer " +
                                  std::to_string(l + 1));
    }
    if (biases[l].size() != schedule.sizes[l + 1]) {
      throw std::invalid_argument("params: bias shape mismatch at layer " +
                                  std::to_string(l + 1));
    }
    require_finite(weights[l], "params.weights");
    if (!biases[l].allFinite()) {
      throw std::invalid_argument("params.biases: non-finite entries");
    }
  }
}

Mat sigmoid(const Mat& z) {
  // exp on the non-positive branch only, stable for large |z|.
  return z.unaryExpr([](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

ForwardTrace forward(const NetworkParams& params, const Mat& x) {
  if (x.rows() != params.schedule.input_dim()) {
    throw std::invalid_argument("forward: input has " + std::to_string(x.rows()) +
                                " rows, schedule expects " +
                                std::to_string(params.schedule.input_dim()));
  }
  require_finite(x, "forward input");
  const Index n = params.schedule.layers();
  ForwardTrace trace;
  trace.h.reserve(n);
  trace.z.reserve(n - 1);
  trace.h.push_back(x);
  for (Index l = 2; l <= n; ++l) {
    const Mat& prev = trace.h.back();
    Mat z = (params.weights[l - 2] * prev).colwise() + params.biases[l - 2];
    trace.h.push_back(activation(params.schedule, l) == Activation::sigmoid
                          ? sigmoid(z)
                          : z);
    trace.z.push_back(std::move(z));
  }
  return trace;
}

Mat encode(const NetworkParams& params, const Mat& x) {
  const ForwardTrace trace = forward(params, x);
  return sgn(trace.layer_output(params.schedule.code_layer()));
}

Index parameter_count(const LayerSchedule& schedule) {
  Index count = 0;
  for (std::size_t l = 0; l + 1 < schedule.sizes.size(); ++l) {
    count += schedule.sizes[l + 1] * (schedule.sizes[l] + 1);
  }
  return count;
}

Vec pack_params(const NetworkParams& params) {
  Vec flat(parameter_count(params.schedule));
  Index offset = 0;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const Mat& w = params.weights[l];
    std::memcpy(flat.data() + offset, w.data(), sizeof(double) * w.size());
    offset += w.size();
    const Vec& c = params.biases[l];
    std::memcpy(flat.data() + offset, c.data(), sizeof(double) * c.size());
    offset += c.size();
  }
  return flat;
}

Vec pack_grad(const LayerSchedule& schedule, const NetworkGrad& grad) {
  Vec flat(parameter_count(schedule));
  Index offset = 0;
  for (std::size_t l = 0; l < grad.weights.size(); ++l) {
    const Mat& w = grad.weights[l];
    std::memcpy(flat.data() + offset, w.data(), sizeof(double) * w.size());
    offset += w.size();
    const Vec& c = grad.biases[l];
    std::memcpy(flat.data() + offset, c.data(), sizeof(double) * c.size());
    offset += c.size();
  }
  if (offset != flat.size()) {
    throw std::logic_error("pack_grad: layout mismatch with schedule");
  }
  return flat;
}

NetworkParams unpack_params(const LayerSchedule& schedule, const Vec& flat) {
  if (flat.size() != parameter_count(schedule)) {
    throw std::invalid_argument("unpack_params: flat vector size mismatch");
  }
  NetworkParams params;
  params.schedule = schedule;
  Index offset = 0;
  for (std::size_t l = 0; l + 1 < schedule.sizes.size(); ++l) {
    const Index rows = schedule.sizes[l + 1];
    const Index cols = schedule.sizes[l];
    Mat w(rows, cols);
    std::memcpy(w.data(), flat.data() + offset, sizeof(double) * w.size());
    offset += w.size();
    Vec c(rows);
    std::memcpy(c.data(), flat.data() + offset, sizeof(double) * c.size());
    offset += c.size();
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(c));
  }
  return params;
}

namespace {

constexpr char kModelMagic[4] = {'B', 'H', 'N', 'M'};
constexpr std::uint32_t kModelVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw std::runtime_error("model file: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

void write_doubles(std::ostream& out, const double* data, std::size_t count) {
  // Assumes a little-endian host, as does every supported target.
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

void read_doubles(std::istream& in, double* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("model file: truncated payload");
}

}  // namespace

void save_model(const std::string& path, const NetworkParams& params) {
  params.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  out.write(kModelMagic, 4);
  write_u32(out, kModelVersion);
  write_u32(out, params.schedule.mode == HashMode::unsupervised ? 0u : 1u);
  write_u32(out, static_cast<std::uint32_t>(params.schedule.layers()));
  for (Index s : params.schedule.sizes) {
    write_u32(out, static_cast<std::uint32_t>(s));
  }
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    write_doubles(out, params.weights[l].data(), params.weights[l].size());
    write_doubles(out, params.biases[l].data(), params.biases[l].size());
  }
  if (!out) throw std::runtime_error("model file: write failed: " + path);
}

NetworkParams load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kModelMagic, 4) != 0) {
    throw std::runtime_error("model file: bad magic: " + path);
  }
  const std::uint32_t version = read_u32(in);
  if (version != kModelVersion) {
    throw std::runtime_error("model file: unsupported version " +
                             std::to_string(version));
  }
  const std::uint32_t mode = read_u32(in);
  if (mode > 1) throw std::runtime_error("model file: bad mode flag");
  const std::uint32_t n = read_u32(in);
  if (n < 3 || n > 64) throw std::runtime_error("model file: implausible layer count");
  std::vector<Index> sizes(n);
  for (auto& s : sizes) {
    s = static_cast<Index>(read_u32(in));
    if (s < 1) throw std::runtime_error("model file: bad layer size");
  }
  NetworkParams params;
  params.schedule = LayerSchedule::make(
      mode == 0 ? HashMode::unsupervised : HashMode::supervised, std::move(sizes));
  for (Index l = 0; l + 1 < params.schedule.layers(); ++l) {
    Mat w(params.schedule.sizes[l + 1], params.schedule.sizes[l]);
    read_doubles(in, w.data(), static_cast<std::size_t>(w.size()));
    Vec c(params.schedule.sizes[l + 1]);
    read_doubles(in, c.data(), static_cast<std::size_t>(c.size()));
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(c));
  }
  params.validate();
  return params;
}

}  // namespace bdnn
