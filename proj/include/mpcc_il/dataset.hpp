#pragma once

#include <string>
#include <vector>

#include "mpcc_il/dynamics.hpp"

namespace mpcc_il {

enum class Provenance { OffPolicy, OnPolicy, Augmented };

const char* provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

// One (observation, supervisor control) pair. The originating state and path
// parameter are kept so augmentation can re-query the supervisor; augmented
// samples reference their parent by index.
struct Sample {
  VecX observation;          // full 45-feature vector
  Vec3 target;               // supervisor (vz, roll_cmd, pitch_cmd)
  Provenance provenance = Provenance::OffPolicy;
  int episode = 0;
  int parent = -1;
  QuadState state;
  double nu = 0.0;
  double t = 0.0;
  double vz_est = 0.0;
};

// Append-only sample store; samples are never mutated after insertion.
class Dataset {
 public:
  void add(Sample sample);
  void extend(const Dataset& other);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<Sample>& samples() const { return samples_; }

  // Feature/target matrices for training; features are the first
  // `feature_dim` observation entries.
  MatX feature_matrix(int feature_dim) const;
  MatX target_matrix() const;

  // provenance,episode,o0..o44,u0,u1,u2 (one row per sample).
  void save_csv(const std::string& path) const;

  // Binary format that round trips every field bit-exactly.
  void save_binary(const std::string& path) const;
  static Dataset load_binary(const std::string& path);

 private:
  std::vector<Sample> samples_;
};

}  // namespace mpcc_il
