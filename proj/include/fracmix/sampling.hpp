#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fracmix {

/// Axis-aligned box [origin, origin + lengths) in the unit cube with its probability mass.
struct Stratum {
  std::vector<double> origin;
  std::vector<double> lengths;
  double weight = 0.0;

  bool contains(std::span<const double> point) const;
};

/// Input marginal in physical units. Lognormal is parameterized by its own mean and std.
class MarginalSpec {
 public:
  enum class Family { kUniform, kNormal, kLognormal };

  static MarginalSpec uniform(double lo, double hi);
  static MarginalSpec normal(double mean, double sigma);
  static MarginalSpec lognormal(double mean, double std);

  Family family() const { return family_; }
  double p1() const { return p1_; }
  double p2() const { return p2_; }

  /// Inverse CDF at a unit-cube coordinate clamped to [1e-15, 1 - 1e-15].
  double from_unit(double x) const;
  /// Same map composed with Phi, for standard-normal input spaces.
  double from_standard_normal(double z) const;

  /// Parameters (mu, sigma) of log(X) for the lognormal family.
  double log_mu() const;
  double log_sigma() const;

 private:
  MarginalSpec(Family f, double p1, double p2) : family_(f), p1_(p1), p2_(p2) {}
  Family family_;
  double p1_;
  double p2_;
};

inline constexpr double kUnitClamp = 1e-15;

/// Component-wise inverse-CDF transform of a unit-cube point.
std::vector<double> to_physical(std::span<const double> point, std::span<const MarginalSpec> marginals);

/// Refined Latinized stratified sampling design.
///
/// The cube is tiled by a grid of congruent cells, g[i] cells along dimension i;
/// the number of cells ("slots") is N (delta + 1)^level. Every dimension is cut
/// into slots equal-probability LHS bins, nested across levels. Each committed
/// sample occupies a distinct bin in every dimension and lies in its own cell.
///
/// A refinement splits every cell into delta + 1 slabs along the dimension with
/// the fewest cells (lowest index on ties). The slab holding the existing
/// sample keeps it; the other delta slabs become candidates whose coordinates
/// fill the newly empty LHS sub-bins. Candidates are committed in a seeded
/// random order. A committed sample's stratum is the run of slabs of its parent
/// cell from its own slab up to the next committed slab, with the first
/// committed slab extended down to the parent's lower face, so committed strata
/// always partition the cube.
class RlssDesign {
 public:
  static RlssDesign lss_init(std::uint64_t initial_size, std::size_t dimension, std::uint64_t seed,
                             std::uint64_t refinement_factor = 1);

  /// Enlarges the candidate pool by one refinement level. Requires an empty pool.
  void refine();

  /// Commits samples so that the batch [returned, sample_count()) has `batch`
  /// members. The first call returns 0: its batch includes the initial samples
  /// committed by lss_init, so it requires batch >= initial_size.
  std::size_t extend(std::size_t batch);

  std::size_t dimension() const { return dim_; }
  std::uint64_t initial_size() const { return initial_size_; }
  std::uint64_t refinement_factor() const { return delta_; }
  unsigned level() const { return level_; }
  std::uint64_t slot_count() const { return slots_; }
  std::uint64_t bins_per_dimension() const { return slots_; }
  const std::vector<std::uint64_t>& cells_per_dimension() const { return grid_; }
  std::size_t sample_count() const { return committed_.size(); }
  std::size_t candidate_count() const { return queue_.size() - queue_pos_; }
  std::uint64_t seed() const { return seed_; }

  std::span<const double> point(std::size_t k) const;
  std::uint64_t bin(std::size_t k, std::size_t dim) const;
  Stratum stratum(std::size_t k) const;
  double weight(std::size_t k) const;
  std::vector<double> weights() const;

  /// Points of the uncommitted candidate slots, in commit order.
  std::vector<std::vector<double>> candidate_points() const;

  nlohmann::json to_json() const;

 private:
  RlssDesign() = default;

  struct Slot {
    std::vector<std::uint64_t> bins;
    std::vector<double> point;
    std::uint64_t group = 0;
    std::uint64_t position = 0;
  };

  std::uint64_t cell(const Slot& s, std::size_t dim) const;
  void assign_bins(std::vector<Slot>& fresh, std::uint64_t tag);
  void place_point(Slot& s, std::uint64_t index) const;
  void recompute_ownership();

  std::size_t dim_ = 0;
  std::uint64_t initial_size_ = 0;
  std::uint64_t delta_ = 1;
  std::uint64_t seed_ = 0;
  unsigned level_ = 0;
  std::uint64_t slots_ = 0;
  std::vector<std::uint64_t> grid_;
  bool split_ = false;
  std::size_t split_dim_ = 0;

  std::vector<Slot> committed_;
  std::vector<Slot> pool_;
  std::vector<std::size_t> queue_;
  std::size_t queue_pos_ = 0;
  bool started_ = false;

  // Ownership run [start, start + span) of each committed sample within its group.
  std::vector<std::uint64_t> own_start_;
  std::vector<std::uint64_t> own_span_;
};

/// Coefficient of variation of the weighted estimator sum_k w_k Z_k^r under a
/// bootstrap that draws values.size() indices with replacement, each with
/// probability equal to its weight, and averages Z^r over the draws.
double weighted_bootstrap_cov(std::span<const double> values, std::span<const double> weights, double order,
                              std::size_t replicates, std::uint64_t seed);

}  // namespace fracmix
