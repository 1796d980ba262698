#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "accentasr/common.hpp"
#include "accentasr/features.hpp"

namespace accentasr {

// Diagonal-covariance Gaussian mixture. All likelihoods in natural log.
struct DiagGmm {
  int dim = 0;
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> vars;
  std::vector<double> gconsts;  // -0.5 (D log 2pi + sum log var), per component

  int num_components() const { return static_cast<int>(weights.size()); }
  void refresh_gconsts();
  double log_likelihood(std::span<const float> frame) const;
  // Fills posteriors (length = components) and returns the total log likelihood.
  double component_posteriors(std::span<const float> frame, std::vector<double>& post) const;
};

// Left-to-right HMM without skips; each state has self-loop and forward
// log probabilities that sum to one in probability domain.
struct PhoneHmm {
  std::string unit;  // canonical tagged-grapheme string, or "sil"
  std::vector<DiagGmm> states;
  std::vector<double> log_self;
  std::vector<double> log_forward;

  int num_states() const { return static_cast<int>(states.size()); }
};

struct AcousticModel {
  int dim = 13;
  int states_per_unit = 3;
  std::vector<PhoneHmm> hmms;  // sorted by unit name
  std::unordered_map<std::string, int> unit_index;

  bool has_unit(const std::string& unit) const { return unit_index.count(unit) > 0; }
  const PhoneHmm& hmm(int index) const { return hmms[index]; }
  const PhoneHmm& hmm(const std::string& unit) const;
  int index_of(const std::string& unit) const;
  int64_t total_densities() const;
  // Stable density id for (unit, state); used by emission caches.
  int density_id(int unit_idx, int state) const { return unit_idx * states_per_unit + state; }

  double emission_logprob(const std::string& unit, int state, std::span<const float> frame) const;
};

struct GlobalStats {
  int dim = 0;
  double count = 0.0;
  std::vector<double> sum;
  std::vector<double> sumsq;

  void accumulate(const FeatureMatrix& f);
  std::vector<double> mean() const;
  std::vector<double> var(double floor) const;
};

struct FlatStartConfig {
  int dim = 13;
  int states = 3;
  double variance_floor = 1e-3;
};

// Single Gaussian per state at the global mean/variance (zero mean, unit
// variance when no stats are given); uniform transitions. Deterministic.
AcousticModel flat_start(const std::vector<std::string>& units, const FlatStartConfig& config,
                         const GlobalStats* stats = nullptr);

// Versioned binary dump; round-trips bit-exactly.
void write_acoustic_model(const AcousticModel& am, const std::string& path);
AcousticModel read_acoustic_model(const std::string& path);

}  // namespace accentasr
