#pragma once

#include "wdeconv/grid.hpp"
#include "wdeconv/matrix.hpp"

#include <string>
#include <vector>

namespace wdeconv {

//! Weighted atoms in R^d.
struct EmpiricalMeasure
{
  Matrix atoms; // n x d
  std::vector<double> weights;

  std::size_t size() const { return atoms.rows; }
  std::size_t dim() const { return atoms.cols; }

  //! Equal weights 1/n on the rows of `atoms`.
  static EmpiricalMeasure uniform(Matrix atoms);
  static EmpiricalMeasure uniform_1d(const std::vector<double>& points);
  static EmpiricalMeasure weighted_1d(const std::vector<double>& points,
                                      std::vector<double> weights);
};

//! Throws DomainError unless weights are nonnegative, sum to one and the
//! atoms are finite.
void validate(const EmpiricalMeasure& m);

struct DirectionNet
{
  std::vector<std::vector<double>> directions;
  double resolution = 0.0;
  std::size_t dim() const { return directions.empty() ? 0 : directions.front().size(); }
};

//! Exact W1 between one-dimensional measures by integrating |F_P - F_Q|
//! between merged breakpoints.
double w1_empirical_1d(const EmpiricalMeasure& p, const EmpiricalMeasure& q);

struct W1CdfResult
{
  double value = 0.0;
  bool left_tail_flag = false;
  bool right_tail_flag = false;
};

//! Trapezoidal L1 distance between two CDFs on a shared grid, with flags
//! when |F - G| exceeds 1e-3 at an endpoint.
W1CdfResult w1_cdf_report(const GridFunction1D& f, const GridFunction1D& g);
double w1_cdf(const GridFunction1D& f, const GridFunction1D& g);

EmpiricalMeasure project_measure(const EmpiricalMeasure& p, const std::vector<double>& v);

struct SlicedResult
{
  double value = 0.0;
  std::vector<double> argmax;
  std::size_t argmax_index = 0;
};

SlicedResult max_sliced_w1(const EmpiricalMeasure& p,
                           const EmpiricalMeasure& q,
                           const DirectionNet& net);

//! Largest total atom count accepted by exact_w1_small.
inline constexpr std::size_t exact_w1_atom_cap = 64;

//! Exact W1 by solving the transportation problem as a min-cost flow.
double exact_w1_small(const EmpiricalMeasure& p, const EmpiricalMeasure& q);

//! d = 1: {+1, -1}; d = 2: ceil(2 pi / delta) equiangular directions;
//! d = 3: Fibonacci sphere with covering radius below delta.
DirectionNet build_direction_net(std::size_t d, double delta);

void write_measure_csv(const std::string& path, const EmpiricalMeasure& m);
EmpiricalMeasure read_measure_csv(const std::string& path);

} // namespace wdeconv
