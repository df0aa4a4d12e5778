#pragma once

#include <vector>

namespace wdeconv {

struct SlopeFit
{
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

//! Ordinary least squares of log y on log x. Needs at least three distinct x
//! (TooFewPoints) and positive values (DomainError).
SlopeFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);

} // namespace wdeconv
