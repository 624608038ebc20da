#include "fracmix/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "fracmix/errors.hpp"
#include "fracmix/random.hpp"
#include "fracmix/specfun.hpp"

namespace fracmix {

bool Stratum::contains(std::span<const double> point) const {
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (point[i] < origin[i] || point[i] >= origin[i] + lengths[i]) return false;
  }
  return true;
}

MarginalSpec MarginalSpec::uniform(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("uniform marginal needs lo < hi");
  return {Family::kUniform, lo, hi};
}

MarginalSpec MarginalSpec::normal(double mean, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(mean)) throw ConfigError("normal marginal needs sigma > 0");
  return {Family::kNormal, mean, sigma};
}

MarginalSpec MarginalSpec::lognormal(double mean, double std) {
  if (!(mean > 0.0) || !(std > 0.0)) throw ConfigError("lognormal marginal needs mean > 0 and std > 0");
  return {Family::kLognormal, mean, std};
}

double MarginalSpec::log_mu() const { return std::log(p1_ * p1_ / std::sqrt(p2_ * p2_ + p1_ * p1_)); }

double MarginalSpec::log_sigma() const { return std::sqrt(std::log1p(p2_ * p2_ / (p1_ * p1_))); }

double MarginalSpec::from_unit(double x) const {
  x = std::clamp(x, kUnitClamp, 1.0 - kUnitClamp);
  switch (family_) {
    case Family::kUniform:
      return p1_ + (p2_ - p1_) * x;
    case Family::kNormal:
      return p1_ + p2_ * std_normal_quantile(x);
    case Family::kLognormal:
      return std::exp(log_mu() + log_sigma() * std_normal_quantile(x));
  }
  return 0.0;
}

double MarginalSpec::from_standard_normal(double z) const {
  switch (family_) {
    case Family::kUniform:
      return p1_ + (p2_ - p1_) * std::clamp(std_normal_cdf(z), kUnitClamp, 1.0 - kUnitClamp);
    case Family::kNormal:
      return p1_ + p2_ * z;
    case Family::kLognormal:
      return std::exp(log_mu() + log_sigma() * z);
  }
  return 0.0;
}

std::vector<double> to_physical(std::span<const double> point, std::span<const MarginalSpec> marginals) {
  if (point.size() != marginals.size()) throw ConfigError("to_physical: dimension mismatch");
  std::vector<double> u(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) u[i] = marginals[i].from_unit(point[i]);
  return u;
}

std::uint64_t RlssDesign::cell(const Slot& s, std::size_t dim) const { return s.bins[dim] / (slots_ / grid_[dim]); }

// Each slab {cell_i = c} holds as many empty bins as fresh slots (one committed
// sample per occupied cell and per bin), so a random bijection keeps the LHS property.
void RlssDesign::assign_bins(std::vector<Slot>& fresh, std::uint64_t tag) {
  std::vector<char> occupied(slots_);
  std::vector<std::size_t> order(fresh.size());
  std::vector<std::uint64_t> free_bins;
  for (std::size_t i = 0; i < dim_; ++i) {
    std::uint64_t width = slots_ / grid_[i];
    std::fill(occupied.begin(), occupied.end(), 0);
    for (const auto& s : committed_) occupied[s.bins[i]] = 1;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::uint64_t> cells(fresh.size());
    for (std::size_t k = 0; k < fresh.size(); ++k) cells[k] = cell(fresh[k], i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return cells[x] < cells[y]; });
    std::size_t k = 0;
    while (k < order.size()) {
      std::uint64_t c = cells[order[k]];
      std::size_t end = k;
      while (end < order.size() && cells[order[end]] == c) ++end;
      free_bins.clear();
      for (std::uint64_t b = c * width; b < (c + 1) * width; ++b) {
        if (!occupied[b]) free_bins.push_back(b);
      }
      if (free_bins.size() != end - k) throw std::logic_error("RLSS bin bookkeeping out of balance");
      RandomStream rng(seed_, stream_id({tag, level_, i, c}));
      rng.shuffle(free_bins.begin(), free_bins.end());
      for (std::size_t j = k; j < end; ++j) fresh[order[j]].bins[i] = free_bins[j - k];
      k = end;
    }
  }
}

void RlssDesign::place_point(Slot& s, std::uint64_t index) const {
  RandomStream rng(seed_, stream_id({stream_tag::kCandidateOffset, level_, index}));
  auto scale = static_cast<double>(slots_);
  s.point.resize(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    auto b = static_cast<double>(s.bins[i]);
    double x = (b + rng.uniform()) / scale;
    double upper = (b + 1.0) / scale;
    if (x >= upper) x = std::nextafter(upper, 0.0);
    if (x < b / scale) x = b / scale;
    s.point[i] = x;
  }
}

RlssDesign RlssDesign::lss_init(std::uint64_t initial_size, std::size_t dimension, std::uint64_t seed,
                                std::uint64_t refinement_factor) {
  if (initial_size < 1 || dimension < 1 || refinement_factor < 1) {
    throw ConfigError("lss_init: N, dimension and delta must be positive");
  }
  RlssDesign d;
  d.dim_ = dimension;
  d.initial_size_ = initial_size;
  d.delta_ = refinement_factor;
  d.seed_ = seed;
  d.slots_ = initial_size;
  d.grid_.assign(dimension, 1);

  std::vector<std::uint64_t> factors;
  std::uint64_t n = initial_size;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      factors.push_back(p);
      n /= p;
    }
  }
  if (n > 1) factors.push_back(n);
  std::sort(factors.rbegin(), factors.rend());
  for (std::uint64_t f : factors) {
    auto it = std::min_element(d.grid_.begin(), d.grid_.end());
    *it *= f;
  }

  d.pool_.resize(initial_size);
  for (std::uint64_t k = 0; k < initial_size; ++k) {
    Slot& s = d.pool_[k];
    s.bins.resize(dimension);
    std::uint64_t rest = k;
    for (std::size_t i = 0; i < dimension; ++i) {
      std::uint64_t c = rest % d.grid_[i];
      rest /= d.grid_[i];
      s.bins[i] = c * (d.slots_ / d.grid_[i]);
    }
    s.group = k;
    s.position = 0;
  }
  d.assign_bins(d.pool_, stream_tag::kLssAssign);
  for (std::uint64_t k = 0; k < initial_size; ++k) d.place_point(d.pool_[k], k);
  d.committed_ = std::move(d.pool_);
  d.pool_.clear();
  d.recompute_ownership();
  return d;
}

void RlssDesign::refine() {
  if (candidate_count() != 0) throw std::logic_error("refine: candidate pool is not empty");
  std::uint64_t factor = delta_ + 1;
  if (slots_ > std::numeric_limits<std::uint64_t>::max() / factor / 4 || slots_ * factor > (1ull << 52)) {
    throw NumericError("refine: design exceeds the representable number of bins");
  }
  std::size_t d = static_cast<std::size_t>(std::min_element(grid_.begin(), grid_.end()) - grid_.begin());
  std::uint64_t new_slots = slots_ * factor;
  auto scale = static_cast<double>(new_slots);
  for (auto& s : committed_) {
    for (std::size_t i = 0; i < dim_; ++i) {
      std::uint64_t lo = s.bins[i] * factor;
      double raw = std::floor(s.point[i] * scale);
      std::uint64_t b = raw <= static_cast<double>(lo) ? lo : static_cast<std::uint64_t>(raw);
      s.bins[i] = std::min(b, lo + delta_);
    }
  }
  slots_ = new_slots;
  grid_[d] *= factor;
  ++level_;
  split_ = true;
  split_dim_ = d;

  pool_.clear();
  pool_.reserve(committed_.size() * delta_);
  for (std::size_t k = 0; k < committed_.size(); ++k) {
    Slot& parent = committed_[k];
    std::uint64_t parent_cell = cell(parent, d);
    parent.group = k;
    parent.position = parent_cell % factor;
    std::uint64_t base = parent_cell - parent.position;
    for (std::uint64_t p = 0; p < factor; ++p) {
      if (p == parent.position) continue;
      Slot s;
      s.group = k;
      s.position = p;
      s.bins.resize(dim_);
      for (std::size_t i = 0; i < dim_; ++i) {
        std::uint64_t c = i == d ? base + p : cell(parent, i);
        s.bins[i] = c * (slots_ / grid_[i]);
      }
      pool_.push_back(std::move(s));
    }
  }
  assign_bins(pool_, stream_tag::kCandidateAssign);
  for (std::size_t k = 0; k < pool_.size(); ++k) place_point(pool_[k], committed_.size() + k);

  queue_.resize(pool_.size());
  std::iota(queue_.begin(), queue_.end(), std::size_t{0});
  RandomStream rng(seed_, stream_id({stream_tag::kCandidateOrder, level_}));
  rng.shuffle(queue_.begin(), queue_.end());
  queue_pos_ = 0;
  recompute_ownership();
}

std::size_t RlssDesign::extend(std::size_t batch) {
  if (batch < 1) throw ConfigError("extend: batch must be positive");
  std::size_t first = committed_.size();
  std::size_t need = batch;
  if (!started_) {
    if (batch < initial_size_) throw ConfigError("extend: the first batch must cover the initial samples");
    started_ = true;
    first = 0;
    need = batch - initial_size_;
  }
  for (; need > 0; --need) {
    if (candidate_count() == 0) refine();
    committed_.push_back(std::move(pool_[queue_[queue_pos_++]]));
  }
  recompute_ownership();
  return first;
}

void RlssDesign::recompute_ownership() {
  std::size_t n = committed_.size();
  own_start_.assign(n, 0);
  own_span_.assign(n, 1);
  if (!split_) return;
  std::uint64_t factor = delta_ + 1;
  // Groups are indexed by the committed sample that was split; positions per group fit in factor slots.
  std::size_t groups = static_cast<std::size_t>(slots_ / factor);
  std::vector<std::size_t> member(groups * factor, std::numeric_limits<std::size_t>::max());
  for (std::size_t k = 0; k < n; ++k) member[committed_[k].group * factor + committed_[k].position] = k;
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  for (std::size_t g = 0; g < groups; ++g) {
    std::size_t owner = kNone;
    for (std::uint64_t p = 0; p < factor; ++p) {
      std::size_t k = member[g * factor + p];
      if (k != kNone) {
        own_start_[k] = owner == kNone ? 0 : p;
        own_span_[k] = owner == kNone ? p + 1 : 1;
        owner = k;
      } else if (owner != kNone) {
        ++own_span_[owner];
      }
    }
  }
}

std::span<const double> RlssDesign::point(std::size_t k) const { return committed_.at(k).point; }

std::uint64_t RlssDesign::bin(std::size_t k, std::size_t dim) const { return committed_.at(k).bins.at(dim); }

double RlssDesign::weight(std::size_t k) const {
  return static_cast<double>(own_span_.at(k)) / static_cast<double>(slots_);
}

std::vector<double> RlssDesign::weights() const {
  std::vector<double> w(committed_.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = weight(k);
  return w;
}

Stratum RlssDesign::stratum(std::size_t k) const {
  const Slot& s = committed_.at(k);
  Stratum st;
  st.origin.resize(dim_);
  st.lengths.resize(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    auto g = static_cast<double>(grid_[i]);
    std::uint64_t c = cell(s, i);
    if (split_ && i == split_dim_) {
      std::uint64_t base = c - s.position;
      st.origin[i] = static_cast<double>(base + own_start_[k]) / g;
      st.lengths[i] = static_cast<double>(own_span_[k]) / g;
    } else {
      st.origin[i] = static_cast<double>(c) / g;
      st.lengths[i] = 1.0 / g;
    }
  }
  st.weight = weight(k);
  return st;
}

std::vector<std::vector<double>> RlssDesign::candidate_points() const {
  std::vector<std::vector<double>> out;
  for (std::size_t q = queue_pos_; q < queue_.size(); ++q) out.push_back(pool_[queue_[q]].point);
  return out;
}

nlohmann::json RlssDesign::to_json() const {
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t k = 0; k < committed_.size(); ++k) {
    Stratum st = stratum(k);
    samples.push_back({{"point", committed_[k].point},
                       {"origin", st.origin},
                       {"lengths", st.lengths},
                       {"weight", st.weight}});
  }
  return {{"dimension", dim_}, {"level", level_}, {"samples", std::move(samples)}};
}

double weighted_bootstrap_cov(std::span<const double> values, std::span<const double> weights, double order,
                              std::size_t replicates, std::uint64_t seed) {
  if (values.size() != weights.size() || values.empty()) throw ConfigError("bootstrap: values and weights must match");
  if (replicates < 2) throw ConfigError("bootstrap: at least two replicates are required");
  std::size_t n = values.size();
  std::vector<double> powered(n);
  std::vector<double> cumulative(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (values[k] <= 0.0 && order != std::floor(order)) {
      throw DomainError("bootstrap: non-positive value at sample " + std::to_string(k));
    }
    powered[k] = order == 1.0 ? values[k] : std::pow(values[k], order);
    acc += weights[k];
    cumulative[k] = acc;
  }
  std::vector<double> rep(replicates);
  for (std::size_t b = 0; b < replicates; ++b) {
    RandomStream rng(seed, stream_id({stream_tag::kBootstrap, b}));
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double u = rng.uniform() * acc;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), n - 1);
      sum += powered[k];
    }
    rep[b] = sum / static_cast<double>(n);
  }
  if (std::all_of(rep.begin(), rep.end(), [&](double v) { return v == rep.front(); })) return 0.0;
  double mean = std::accumulate(rep.begin(), rep.end(), 0.0) / static_cast<double>(replicates);
  double ss = 0.0;
  for (double v : rep) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / static_cast<double>(replicates - 1));
  return mean == 0.0 ? 0.0 : sd / std::abs(mean);
}

}  // namespace fracmix
