#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tlsgn/problem.hpp"

namespace tlsgn::probgen {

/// Prescribed spectrum for the augmented matrix C = U diag(sigmas) V'.
struct SpectrumSpec {
  Index m = 0;
  Index n = 0;
  std::vector<double> sigmas;  ///< n + 1 positive values, descending
  std::uint64_t seed = 0;
  bool ensure_generic = true;
};

/// Lower bound on |gamma| enforced by resampling V when ensure_generic.
double gamma_margin(Index n);

inline constexpr int max_resamples = 100;

/// Builds C with random Haar-distributed singular vectors and the given
/// singular values, then splits it into (A, b). Deterministic for a fixed
/// seed. Throws dimension_mismatch / invalid_argument on a bad spec and
/// resample_cap_exceeded when no V meets the gamma margin.
ProblemData generate(const SpectrumSpec& spec);

/// Spectrum with sigma_1 = 1, sigma_1..sigma_n geometric down to 0.1, and
/// sigma_{n+1} = sigma_n / gap.
std::vector<double> gapped_spectrum(Index n, double gap);

/// sigma_1..sigma_{n-1} evenly spaced from 1 down to 0.5, sigma_n = 0.1 and
/// sigma_{n+1} = 0.1 / gap. Every component except the one along sigma_n
/// dies out within a step or two, so sequences reach their asymptotic
/// rate well above the rounding floor. For n = 1 this is (1, 1 / gap).
std::vector<double> separated_spectrum(Index n, double gap);

/// Parses "m=100,n=10,gap=4[,seed=7][,generic=1][,shape=separated]" into a
/// spec; shape is geometric (gapped_spectrum, the default) or separated.
/// Unknown keys are rejected with parse_error.
SpectrumSpec parse_spec(const std::string& text);

/// m x k matrix with orthonormal columns, Haar distributed: QR of a
/// standard Gaussian matrix with the R diagonal made positive.
Matrix haar_orthonormal(Index m, Index k, std::uint64_t seed);

}  // namespace tlsgn::probgen
