#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "sdmm/errors.hpp"

namespace sdmm {

enum class Scheme : std::uint8_t { kMatDot = 1, kGasp = 2 };

inline std::string scheme_name(Scheme s) { return s == Scheme::kMatDot ? "matdot" : "gasp"; }

/// MatDot configuration: inner-product partition count p, collusion
/// tolerance X, server count N. Recovery threshold K = 2p + 2X - 1.
struct MatDotParams {
  std::size_t p = 1;
  std::size_t x = 1;
  std::size_t n_servers = 0;

  std::size_t threshold() const { return 2 * p + 2 * x - 1; }

  void validate() const {
    if (p == 0) throw InvalidArgument("MatDot partition count p must be >= 1");
    if (x == 0) throw InvalidArgument("collusion tolerance X must be >= 1");
    if (n_servers < threshold()) {
      throw InvalidArgument("MatDot needs N >= 2p + 2X - 1 = " + std::to_string(threshold()) +
                            " servers, got " + std::to_string(n_servers));
    }
  }
};

/// GASP configuration: outer-product partition counts m (rows of A) and
/// n (columns of B), collusion tolerance X, server count N. Recovery
/// threshold K = 2mn + 2X - 1.
struct GaspParams {
  std::size_t m = 1;
  std::size_t n = 1;
  std::size_t x = 1;
  std::size_t n_servers = 0;

  std::size_t threshold() const { return 2 * m * n + 2 * x - 1; }

  void validate() const {
    if (m == 0 || n == 0) throw InvalidArgument("GASP partition counts must be >= 1");
    if (x == 0) throw InvalidArgument("collusion tolerance X must be >= 1");
    if (n_servers < threshold()) {
      throw InvalidArgument("GASP needs N >= 2mn + 2X - 1 = " + std::to_string(threshold()) +
                            " servers, got " + std::to_string(n_servers));
    }
  }
};

using SchemeParams = std::variant<MatDotParams, GaspParams>;

inline Scheme scheme_of(const SchemeParams& params) {
  return std::holds_alternative<MatDotParams>(params) ? Scheme::kMatDot : Scheme::kGasp;
}

inline std::size_t threshold_of(const SchemeParams& params) {
  return std::visit([](const auto& p) { return p.threshold(); }, params);
}

inline std::size_t servers_of(const SchemeParams& params) {
  return std::visit([](const auto& p) { return p.n_servers; }, params);
}

inline std::size_t collusion_of(const SchemeParams& params) {
  return std::visit([](const auto& p) { return p.x; }, params);
}

inline void validate(const SchemeParams& params) {
  std::visit([](const auto& p) { p.validate(); }, params);
}

/// Masking noise specification: complex variance per mask entry plus the
/// declared i.i.d. per-entry variances of the inputs A and B (these feed the
/// data-side covariance in the leakage bound).
struct NoiseSpec {
  double sigma2 = 1.0;
  double input_sigma2_a = 1.0;
  double input_sigma2_b = 1.0;

  void validate() const {
    if (!(sigma2 > 0.0) || !(input_sigma2_a > 0.0) || !(input_sigma2_b > 0.0)) {
      throw InvalidArgument("all variances in a NoiseSpec must be positive");
    }
  }
};

}  // namespace sdmm
