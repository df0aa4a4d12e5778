#pragma once

#include <cstddef>
#include <vector>

namespace wdeconv {

//! Dense row-major matrix of doubles; rows are observations.
struct Matrix
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
    : rows(r)
    , cols(c)
    , data(r * c, fill)
  {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::vector<double> column(std::size_t j) const
  {
    std::vector<double> out(rows);
    for (std::size_t i = 0; i < rows; ++i)
      out[i] = (*this)(i, j);
    return out;
  }
};

} // namespace wdeconv
