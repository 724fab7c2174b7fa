#include "tfconv/container.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "tfconv/error.hpp"

namespace tfconv {

namespace {

template <typename T>
void to_little_endian(unsigned char* bytes) {
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
}

template <typename T>
void write_elements(std::ostream& os, std::span<const double> data) {
  unsigned char buf[sizeof(T)];
  for (double v : data) {
    const T x = static_cast<T>(v);
    std::memcpy(buf, &x, sizeof(T));
    to_little_endian<T>(buf);
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
  }
}

template <typename T>
void read_elements(std::istream& is, std::span<double> data) {
  unsigned char buf[sizeof(T)];
  for (double& v : data) {
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) {
      throw FormatError("tensor payload is shorter than its header declares");
    }
    to_little_endian<T>(buf);
    T x;
    std::memcpy(&x, buf, sizeof(T));
    v = static_cast<double>(x);
  }
}

}  // namespace

void write_tensor(std::ostream& os, const DenseTensor& t, Dtype dtype) {
  nlohmann::ordered_json header;
  header["dtype"] = dtype == Dtype::F64 ? "f64" : "f32";
  header["shape"] = t.shape();
  header["order"] = "row-major";
  os << header.dump() << '\n';
  if (dtype == Dtype::F64) {
    write_elements<double>(os, t.data());
  } else {
    write_elements<float>(os, t.data());
  }
  if (!os) throw FormatError("failed writing tensor");
}

DenseTensor read_tensor(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("missing tensor header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("tensor header is not valid JSON: ") + e.what());
  }
  if (!header.is_object() || !header.contains("dtype") || !header.contains("shape")) {
    throw FormatError("tensor header needs \"dtype\" and \"shape\"");
  }
  if (header.contains("order") && header["order"] != "row-major") {
    throw FormatError("only row-major tensors are supported");
  }
  const auto& dtype = header["dtype"];
  if (dtype != "f64" && dtype != "f32") throw FormatError("unsupported dtype " + dtype.dump());
  const auto& shape_json = header["shape"];
  if (!shape_json.is_array() || shape_json.empty()) throw FormatError("shape must be a non-empty array");
  Shape shape;
  for (const auto& e : shape_json) {
    if (!e.is_number_unsigned() || e.get<std::size_t>() == 0) {
      throw FormatError("shape entries must be positive integers, got " + shape_json.dump());
    }
    shape.push_back(e.get<std::size_t>());
  }
  DenseTensor t(shape);
  if (dtype == "f64") {
    read_elements<double>(is, t.data());
  } else {
    read_elements<float>(is, t.data());
  }
  return t;
}

void save_tensor(const std::filesystem::path& path, const DenseTensor& t, Dtype dtype) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_tensor(os, t, dtype);
}

DenseTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  DenseTensor t = read_tensor(is);
  if (is.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string() + ": trailing bytes after tensor payload");
  }
  return t;
}

}  // namespace tfconv
