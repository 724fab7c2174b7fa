#pragma once

#include <filesystem>
#include <iosfwd>

#include "tfconv/tensor.hpp"

namespace tfconv {

// On-disk tensor: one JSON header line
//   {"dtype":"f64","shape":[...],"order":"row-major"}
// followed by the raw little-endian elements. f32 files are widened to
// double on read; writing f32 narrows.
enum class Dtype { F64, F32 };

void write_tensor(std::ostream& os, const DenseTensor& t, Dtype dtype = Dtype::F64);
DenseTensor read_tensor(std::istream& is);

void save_tensor(const std::filesystem::path& path, const DenseTensor& t, Dtype dtype = Dtype::F64);
DenseTensor load_tensor(const std::filesystem::path& path);

}  // namespace tfconv
