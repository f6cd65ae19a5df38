#pragma once

#include <stdexcept>
#include <string>

namespace brt {

/// Thrown when two data products that must share acquisition parameters
/// (sinogram vs. operator cache, image vs. flags) disagree. The offending
/// field name is part of the message and kept accessible for callers that
/// want to report it separately.
class ConfigMismatchError : public std::runtime_error {
 public:
  ConfigMismatchError(std::string field, const std::string& detail)
      : std::runtime_error("configuration mismatch in field '" + field + "': " + detail),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Thrown by the truncated SVD when the requested rank reaches past the
/// numerical rank of the matrix (sigma_r == 0).
class RankDeficiencyError : public std::runtime_error {
 public:
  RankDeficiencyError(int harmonic, int requested_rank, int usable_rank)
      : std::runtime_error("harmonic n=" + std::to_string(harmonic) + ": requested rank " +
                           std::to_string(requested_rank) +
                           " exceeds the numerical rank; largest usable rank is " +
                           std::to_string(usable_rank)),
        harmonic_(harmonic),
        requested_rank_(requested_rank),
        usable_rank_(usable_rank) {}

  int harmonic() const noexcept { return harmonic_; }
  int requested_rank() const noexcept { return requested_rank_; }
  int usable_rank() const noexcept { return usable_rank_; }

 private:
  int harmonic_;
  int requested_rank_;
  int usable_rank_;
};

}  // namespace brt
