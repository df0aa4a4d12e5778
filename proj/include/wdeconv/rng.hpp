#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace wdeconv {

using Rng = std::mt19937_64;

//! One step of the splitmix64 generator; used to derive independent seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

//! Seed for replicate `rep` of ladder point `n_index`. Adding ladder points
//! or replicates never changes the seeds of existing runs.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t n_index,
                                    std::uint64_t rep)
{
  return splitmix64(splitmix64(splitmix64(master) ^ n_index) ^ rep);
}

inline double uniform01(Rng& rng)
{
  // 53 random bits, never exactly 0
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_exponential(Rng& rng)
{
  return -std::log(uniform01(rng));
}

inline double standard_normal(Rng& rng)
{
  // Box-Muller, one draw per call
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(uniform01(rng))) *
         std::cos(two_pi * uniform01(rng));
}

} // namespace wdeconv
