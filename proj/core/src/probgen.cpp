#include "tlsgn/probgen.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "tlsgn/dense_linalg.hpp"
#include "tlsgn/error.hpp"

namespace tlsgn::probgen {

namespace {

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return g;
}

Matrix haar(Index rows, Index cols, std::mt19937_64& rng) {
  // qr_factor already makes diag(R) nonnegative, which is the sign
  // correction that turns Gaussian QR into Haar sampling.
  return linalg::qr_factor(gaussian(rows, cols, rng)).q;
}

void validate(const SpectrumSpec& spec) {
  const auto k = static_cast<std::size_t>(spec.n + 1);
  if (spec.n < 1)
    throw Error(ErrorCode::dimension_mismatch, "probgen needs n >= 1");
  if (spec.m < spec.n + 1)
    throw Error(ErrorCode::dimension_mismatch, "probgen needs m >= n + 1");
  if (spec.sigmas.size() != k)
    throw Error(ErrorCode::dimension_mismatch,
                "probgen needs n + 1 = " + std::to_string(k) + " singular values, got " +
                    std::to_string(spec.sigmas.size()));
  for (std::size_t i = 0; i < k; ++i) {
    if (!(spec.sigmas[i] > 0.0) || !std::isfinite(spec.sigmas[i]))
      throw Error(ErrorCode::invalid_argument, "singular values must be positive and finite");
    if (i > 0) {
      const bool ok = spec.ensure_generic ? spec.sigmas[i] < spec.sigmas[i - 1]
                                          : spec.sigmas[i] <= spec.sigmas[i - 1];
      if (!ok)
        throw Error(ErrorCode::invalid_argument,
                    spec.ensure_generic ? "singular values must be strictly descending"
                                        : "singular values must be descending");
    }
  }
}

}  // namespace

double gamma_margin(Index n) { return 0.1 / std::sqrt(static_cast<double>(n + 1)); }

Matrix haar_orthonormal(Index m, Index k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return haar(m, k, rng);
}

ProblemData generate(const SpectrumSpec& spec) {
  validate(spec);
  const Index k = spec.n + 1;
  std::mt19937_64 rng(spec.seed);
  const Matrix u = haar(spec.m, k, rng);
  Matrix v = haar(k, k, rng);
  if (spec.ensure_generic) {
    int tries = 1;
    // gamma is the last component of the right singular vector for sigma_{n+1}.
    while (std::abs(v(spec.n, spec.n)) < gamma_margin(spec.n)) {
      if (tries >= max_resamples)
        throw Error(ErrorCode::resample_cap_exceeded,
                    "no V with |gamma| >= margin after " + std::to_string(tries) + " draws");
      v = haar(k, k, rng);
      ++tries;
    }
  }
  const Vector sigma = Eigen::Map<const Vector>(spec.sigmas.data(), k);
  const Matrix c = u * sigma.asDiagonal() * v.transpose();
  return ProblemData::from_augmented(c);
}

std::vector<double> gapped_spectrum(Index n, double gap) {
  if (n < 1) throw Error(ErrorCode::dimension_mismatch, "gapped_spectrum needs n >= 1");
  if (!(gap > 1.0))
    throw Error(ErrorCode::invalid_argument, "gap must exceed 1 for a well-posed spectrum");
  constexpr double floor_value = 0.1;
  std::vector<double> s(static_cast<std::size_t>(n + 1));
  for (Index i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    s[static_cast<std::size_t>(i)] = std::pow(floor_value, t);
  }
  s[static_cast<std::size_t>(n)] = s[static_cast<std::size_t>(n - 1)] / gap;
  return s;
}

std::vector<double> separated_spectrum(Index n, double gap) {
  if (n < 1) throw Error(ErrorCode::dimension_mismatch, "separated_spectrum needs n >= 1");
  if (!(gap > 1.0))
    throw Error(ErrorCode::invalid_argument, "gap must exceed 1 for a well-posed spectrum");
  if (n == 1) return {1.0, 1.0 / gap};
  std::vector<double> s;
  for (Index i = 0; i + 1 < n; ++i) {
    const double t = n == 2 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 2);
    s.push_back(1.0 - 0.5 * t);
  }
  s.push_back(0.1);
  s.push_back(0.1 / gap);
  return s;
}

SpectrumSpec parse_spec(const std::string& text) {
  SpectrumSpec spec;
  double gap = 4.0;
  bool separated = false;
  bool have_m = false, have_n = false;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::parse_error, "expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      std::size_t used = 0;
      if (key == "m") {
        spec.m = std::stol(value, &used);
        have_m = true;
      } else if (key == "n") {
        spec.n = std::stol(value, &used);
        have_n = true;
      } else if (key == "gap") {
        gap = std::stod(value, &used);
      } else if (key == "seed") {
        spec.seed = std::stoull(value, &used);
      } else if (key == "generic") {
        spec.ensure_generic = std::stoi(value, &used) != 0;
      } else if (key == "shape") {
        if (value != "geometric" && value != "separated")
          throw Error(ErrorCode::parse_error, "shape must be geometric or separated");
        separated = value == "separated";
        used = value.size();
      } else {
        throw Error(ErrorCode::parse_error, "unknown generator key '" + key + "'");
      }
      if (used != value.size())
        throw Error(ErrorCode::parse_error, "trailing characters in '" + item + "'");
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::parse_error, "bad value in '" + item + "'");
    }
  }
  if (!have_m || !have_n)
    throw Error(ErrorCode::parse_error, "generator spec needs both m and n");
  try {
    spec.sigmas = separated ? separated_spectrum(spec.n, gap) : gapped_spectrum(spec.n, gap);
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
  return spec;
}

}  // namespace tlsgn::probgen
