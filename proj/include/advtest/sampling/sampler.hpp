#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advtest/rng.hpp"
#include "advtest/sampling/feedback.hpp"
#include "advtest/sampling/gbo.hpp"
#include "advtest/sampling/kd_tree.hpp"
#include "advtest/sampling/passive.hpp"
#include "advtest/sampling/rns.hpp"
#include "advtest/sdl/sampler_spec.hpp"

namespace advtest::sampling {

struct ProposalContext {
  /// Admissible box for the next point (rate limits around the previous region).
  std::optional<Box> constraint_region;
};

/// Common interface of all samplers. An instance is single-owner state.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual std::string_view name() const = 0;
  virtual bool uses_feedback() const = 0;
  virtual SamplePoint next(const ProposalContext& ctx = {}) = 0;
  /// Record the outcome of the most recent proposal. Passive samplers ignore it.
  virtual void observe(const SamplerFeedback&) {}
};

class RandomSampler final : public Sampler {
 public:
  RandomSampler(std::size_t dims, std::uint64_t seed) : dims_(dims), rng_(seed) {}
  std::string_view name() const override { return "random"; }
  bool uses_feedback() const override { return false; }
  SamplePoint next(const ProposalContext&) override { return random_next(dims_, rng_); }

 private:
  std::size_t dims_;
  Rng rng_;
};

/// Walks the lattice in row-major order, wrapping after the last cell.
class GridSampler final : public Sampler {
 public:
  GridSampler(std::size_t dims, std::uint64_t resolution) : dims_(dims), resolution_(resolution) {}
  std::string_view name() const override { return "grid"; }
  bool uses_feedback() const override { return false; }
  SamplePoint next(const ProposalContext&) override {
    const std::uint64_t k = index_++ % grid_size(resolution_, dims_);
    return grid_next(dims_, resolution_, k);
  }
  std::uint64_t resolution() const { return resolution_; }

 private:
  std::size_t dims_;
  std::uint64_t resolution_;
  std::uint64_t index_ = 0;
};

class HaltonSampler final : public Sampler {
 public:
  explicit HaltonSampler(std::size_t dims) : dims_(dims) {}
  std::string_view name() const override { return "halton"; }
  bool uses_feedback() const override { return false; }
  SamplePoint next(const ProposalContext&) override { return halton_next(dims_, ++index_); }

 private:
  std::size_t dims_;
  std::uint64_t index_ = 0;
};

class RnsSampler final : public Sampler {
 public:
  RnsSampler(std::size_t dims, std::uint64_t seed, RnsConfig cfg) : dims_(dims), rng_(seed), cfg_(cfg), kd_(dims) {}
  std::string_view name() const override { return "rns"; }
  bool uses_feedback() const override { return true; }
  SamplePoint next(const ProposalContext&) override { return rns_next(dims_, history_, kd_, rng_, cfg_); }
  void observe(const SamplerFeedback& f) override {
    history_.push_back(f);
    kd_.insert(f.point.coords, f.test_score);
  }
  const RnsConfig& config() const { return cfg_; }

 private:
  std::size_t dims_;
  Rng rng_;
  RnsConfig cfg_;
  KdTree<double> kd_;
  std::vector<SamplerFeedback> history_;
};

class GboSampler final : public Sampler {
 public:
  GboSampler(std::size_t dims, std::uint64_t seed, GboConfig cfg) : dims_(dims), rng_(seed), cfg_(cfg) {}
  std::string_view name() const override { return "gbo"; }
  bool uses_feedback() const override { return true; }
  SamplePoint next(const ProposalContext& ctx) override {
    return gbo_next(dims_, history_, rng_, cfg_, ctx.constraint_region);
  }
  void observe(const SamplerFeedback& f) override { history_.push_back(f); }
  const GboConfig& config() const { return cfg_; }

 private:
  std::size_t dims_;
  Rng rng_;
  GboConfig cfg_;
  std::vector<SamplerFeedback> history_;
};

/// Smallest resolution whose lattice holds `budget` points.
inline std::uint64_t default_grid_resolution(std::int64_t budget, std::size_t dims) {
  std::uint64_t r = 1;
  while (grid_size(r, dims) < static_cast<std::uint64_t>(budget)) ++r;
  return r;
}

inline std::uint64_t grid_resolution(const sdl::SamplerSpecification& spec, std::size_t dims) {
  if (auto r = spec.option("grid.resolution")) return static_cast<std::uint64_t>(*r);
  return default_grid_resolution(spec.budget, dims);
}

inline RnsConfig rns_config(const sdl::SamplerSpecification& s) {
  return {s.option_or_default("rns.radius"), s.option_or_default("rns.threshold"), s.option_or_default("rns.novelty"),
          static_cast<std::size_t>(s.option_or_default("rns.retries"))};
}

inline GboConfig gbo_config(const sdl::SamplerSpecification& s) {
  return {static_cast<std::size_t>(s.option_or_default("gbo.cold_start")), s.option_or_default("gbo.length_scale"),
          s.option_or_default("gbo.signal_variance"), s.option_or_default("gbo.noise"),
          static_cast<std::size_t>(s.option_or_default("gbo.candidates"))};
}

/// Registry: build the sampler named in the specification over `dims` dimensions.
inline std::unique_ptr<Sampler> make_sampler(const sdl::SamplerSpecification& spec, std::size_t dims) {
  const std::uint64_t seed = derive_seed(spec.seed, 0x5a3d1e);
  switch (spec.sampler) {
    case sdl::SamplerKind::Random: return std::make_unique<RandomSampler>(dims, seed);
    case sdl::SamplerKind::Grid: return std::make_unique<GridSampler>(dims, grid_resolution(spec, dims));
    case sdl::SamplerKind::Halton: return std::make_unique<HaltonSampler>(dims);
    case sdl::SamplerKind::Rns: return std::make_unique<RnsSampler>(dims, seed, rns_config(spec));
    case sdl::SamplerKind::Gbo: return std::make_unique<GboSampler>(dims, seed, gbo_config(spec));
  }
  throw Error("unknown sampler kind");
}

}  // namespace advtest::sampling
