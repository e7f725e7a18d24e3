#include "faithful/tensor_io.hpp"

#include "faithful/error.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace faithful {

namespace {

template <class T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&v, bytes, sizeof(T));
  }
  return v;
}

std::string_view dtype_name(DType d) { return d == DType::F32 ? "f32" : "f64"; }

std::size_t dtype_size(DType d) { return d == DType::F32 ? 4 : 8; }

Tensor parse_header(const std::string& line) {
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw PersistenceError(std::string("tensor header is not valid JSON: ") + e.what());
  }
  if (!h.is_object() || !h.contains("shape") || !h.contains("dtype"))
    throw PersistenceError("tensor header lacks shape or dtype");
  if (h.value("order", std::string("row-major")) != "row-major")
    throw PersistenceError("unsupported tensor order '" + h["order"].get<std::string>() + "'");
  Tensor t;
  const auto dtype = h["dtype"].get<std::string>();
  if (dtype == "f32")
    t.dtype = DType::F32;
  else if (dtype == "f64")
    t.dtype = DType::F64;
  else
    throw PersistenceError("unsupported tensor dtype '" + dtype + "'");
  t.shape = h["shape"].get<std::vector<int>>();
  for (int d : t.shape)
    if (d < 0) throw PersistenceError("negative tensor dimension");
  return t;
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

void write_tensor(std::ostream& out, const Tensor& t) {
  if (t.element_count() != static_cast<std::size_t>(t.data.size()))
    throw ShapeError("tensor data size does not match its shape");
  nlohmann::ordered_json h;
  h["shape"] = t.shape;
  h["dtype"] = dtype_name(t.dtype);
  h["order"] = "row-major";
  out << h.dump() << '\n';
  for (Eigen::Index i = 0; i < t.data.size(); ++i) {
    if (t.dtype == DType::F32) {
      const float v = to_little_endian(static_cast<float>(t.data[i]));
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    } else {
      const double v = to_little_endian(t.data[i]);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
  if (!out) throw PersistenceError("failed writing tensor payload");
}

Tensor read_tensor(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw PersistenceError("missing tensor header");
  Tensor t = parse_header(line);
  const std::size_t n = t.element_count();
  t.data.resize(static_cast<Eigen::Index>(n));
  std::vector<char> buf(n * dtype_size(t.dtype));
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size())
    throw PersistenceError("truncated tensor payload");
  for (std::size_t i = 0; i < n; ++i) {
    if (t.dtype == DType::F32) {
      float v;
      std::memcpy(&v, buf.data() + 4 * i, 4);
      t.data[static_cast<Eigen::Index>(i)] = to_little_endian(v);
    } else {
      double v;
      std::memcpy(&v, buf.data() + 8 * i, 8);
      t.data[static_cast<Eigen::Index>(i)] = to_little_endian(v);
    }
  }
  return t;
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::ostringstream out(std::ios::binary);
  write_tensor(out, t);
  write_file_atomic(path, out.str());
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot open tensor file " + path.string());
  Tensor t = read_tensor(in);
  if (in.peek() != std::char_traits<char>::eof())
    throw PersistenceError("trailing bytes after tensor payload in " + path.string());
  return t;
}

Tensor load_tensor_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot open tensor file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw PersistenceError("missing tensor header in " + path.string());
  return parse_header(line);
}

Tensor masks_to_tensor(std::span<const SpatialMask> masks) {
  if (masks.empty()) throw InputError("no masks to store");
  const int h = static_cast<int>(masks[0].rows()), w = static_cast<int>(masks[0].cols());
  Tensor t{{static_cast<int>(masks.size()), h, w}, Eigen::ArrayXd(masks.size() * h * w), DType::F32};
  Eigen::Index k = 0;
  for (const SpatialMask& m : masks) {
    if (m.rows() != h || m.cols() != w) throw ShapeError("masks differ in shape");
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) t.data[k++] = m(y, x);
  }
  return t;
}

std::vector<SpatialMask> tensor_to_masks(const Tensor& t) {
  if (t.shape.size() != 3) throw ShapeError("mask tensor must have shape (T, h, w)");
  std::vector<SpatialMask> out;
  Eigen::Index k = 0;
  for (int f = 0; f < t.shape[0]; ++f) {
    SpatialMask m(t.shape[1], t.shape[2]);
    for (int y = 0; y < t.shape[1]; ++y)
      for (int x = 0; x < t.shape[2]; ++x) m(y, x) = t.data[k++];
    out.push_back(std::move(m));
  }
  return out;
}

void save_spatial_masks(const std::filesystem::path& path, std::span<const SpatialMask> masks) {
  save_tensor(path, masks_to_tensor(masks));
}

std::vector<SpatialMask> load_spatial_masks(const std::filesystem::path& path) {
  return tensor_to_masks(load_tensor(path));
}

void save_temporal_weights(const std::filesystem::path& path, const TemporalWeights& w) {
  save_tensor(path, Tensor{{static_cast<int>(w.weights.size())}, w.weights.array(), DType::F32});
}

TemporalWeights load_temporal_weights(const std::filesystem::path& path, bool normalized) {
  const Tensor t = load_tensor(path);
  if (t.shape.size() != 1) throw ShapeError("temporal weight tensor must be one-dimensional");
  return {t.data.matrix(), normalized};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PersistenceError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw PersistenceError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw PersistenceError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace faithful
