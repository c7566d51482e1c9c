#ifndef ROTOPEND_NOISE_PATH_HPP
#define ROTOPEND_NOISE_PATH_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rotopend/kernel.hpp"

namespace rotopend {

struct SampleReport {
    int clipped_eigenvalues = 0;      // small negatives clipped to zero
    double min_eigenvalue_ratio = 0;  // min(lambda)/max(lambda) before clipping
    std::size_t embedding_size = 0;
};

// One sampled realization of the stationary Gaussian process on a uniform
// grid. Immutable; shifting shares the underlying samples. Evaluation
// between nodes is piecewise linear, queries outside the domain throw.
class NoisePath {
public:
    NoisePath(double t_start, double dt, std::vector<double> values,
              std::uint64_t seed, std::string kernel_id);

    // Exact-covariance sampling by circulant embedding: the grid values are a
    // zero-mean Gaussian vector with covariance r(|i-j| dt). An embedding
    // eigenvalue below -1e-10 * max is a hard error; small negatives are
    // clipped and counted in `report`.
    static NoisePath sample(const Kernel& kernel, double t_start, double dt,
                            std::size_t n, std::uint64_t seed,
                            SampleReport* report = nullptr);

    // Synthetic path from a function, for oracles and tests.
    static NoisePath from_function(const std::function<double(double)>& f,
                                   double t_start, double dt, std::size_t n,
                                   const std::string& id = "synthetic");

    double t_start() const { return t_start_; }
    double dt() const { return dt_; }
    std::size_t size() const { return values_->size(); }
    double t_end() const { return t_start_ + dt_ * static_cast<double>(size() - 1); }
    std::uint64_t seed() const { return seed_; }
    const std::string& kernel_id() const { return kernel_id_; }
    const std::vector<double>& values() const { return *values_; }

    double node_time(std::size_t i) const { return t_start_ + dt_ * static_cast<double>(i); }
    bool contains(double t) const;

    // Stored value at grid nodes, linear interpolation in between.
    double evaluate(double t) const;

    // theta^{t0}: evaluate(shifted(t0), s) == evaluate(*this, t0 + s).
    NoisePath shifted(double t0) const;

    // Index of the first node with node_time >= t - tol (clamped to range).
    std::size_t node_at_or_after(double t) const;
    std::size_t node_at_or_before(double t) const;

    void write_csv(const std::string& filename) const;
    static NoisePath read_csv(const std::string& filename);

private:
    double t_start_;
    double dt_;
    std::shared_ptr<const std::vector<double>> values_;
    std::uint64_t seed_;
    std::string kernel_id_;
};

}  // namespace rotopend

#endif
