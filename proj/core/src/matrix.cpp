#include "neurodream/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace neurodream {

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace neurodream
