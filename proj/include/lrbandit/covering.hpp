#pragma once

#include "lrbandit/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace lrbandit {

// Bumped whenever the construction changes; part of the cache key.
inline constexpr int kNetVersion = 1;

struct NetOptions {
    double cap = 5e5;           // hard limit on element count
    double separation = 0.8;    // final packing radius as a fraction of eps
    double ladder = 0.8;        // ratio between consecutive packing radii
    int batch = 4096;           // fresh candidates per stopping test
    std::uint64_t seed = 0x4e4554;
};

class LowRankNet {
public:
    LowRankNet(int d1, int d2, int r, double eps, Matrix flat);

    int d1() const { return d1_; }
    int d2() const { return d2_; }
    int r() const { return r_; }
    double eps() const { return eps_; }
    Eigen::Index size() const { return flat_.rows(); }
    // row i is vec(element i)
    const Matrix& flat() const { return flat_; }
    Matrix element(Eigen::Index i) const;
    // <Theta_i, X> for every element
    Vector predictions(const Matrix& x) const;

private:
    int d1_, d2_, r_;
    double eps_;
    Matrix flat_;
};

double log_net_size_bound(int d1, int d2, int r, double eps);
double net_size_bound(int d1, int d2, int r, double eps);

// rough size of what build_net will produce (calibrated packing count)
double estimate_net_size(int d1, int d2, int r, double eps, const NetOptions& opts = {});

LowRankNet build_net(int d1, int d2, int r, double eps, const NetOptions& opts = {});

double nearest_distance(const LowRankNet& net, const Matrix& target);

std::string net_cache_name(int d1, int d2, int r, double eps, const NetOptions& opts = {});
void save_net(const LowRankNet& net, const std::filesystem::path& path);
LowRankNet load_net(const std::filesystem::path& path);
// load from dir if a matching file exists, otherwise build and store it
LowRankNet build_net_cached(const std::filesystem::path& dir, int d1, int d2, int r, double eps,
                            const NetOptions& opts = {});

}  // namespace lrbandit
