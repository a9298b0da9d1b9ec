#include "lrbandit/covering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>
#include <vector>

namespace lrbandit {

LowRankNet::LowRankNet(int d1, int d2, int r, double eps, Matrix flat)
    : d1_(d1), d2_(d2), r_(r), eps_(eps), flat_(std::move(flat)) {
    if (flat_.cols() != static_cast<Eigen::Index>(d1) * d2)
        throw DimensionMismatch("net: element width does not match d1*d2");
}

Matrix LowRankNet::element(Eigen::Index i) const {
    Vector row = flat_.row(i).transpose();
    return unvec(row, d1_, d2_);
}

Vector LowRankNet::predictions(const Matrix& x) const {
    if (x.rows() != d1_ || x.cols() != d2_) throw DimensionMismatch("net: arm shape mismatch");
    return flat_ * vec(x);
}

double log_net_size_bound(int d1, int d2, int r, double eps) {
    if (!(eps > 0)) throw PreconditionError("net_size_bound: eps must be positive");
    return static_cast<double>((d1 + d2 + 1) * r) * std::log(9.0 / eps);
}

double net_size_bound(int d1, int d2, int r, double eps) {
    return std::pow(9.0 / eps, static_cast<double>((d1 + d2 + 1) * r));
}

namespace {

int effective_rank(int d1, int d2, int r) { return std::max(1, std::min({r, d1, d2})); }

// dimension of the rank-r matrix manifold
int manifold_dim(int d1, int d2, int r) {
    const int k = effective_rank(d1, d2, r);
    return k * (d1 + d2 - k);
}

std::vector<double> radius_ladder(double eps, const NetOptions& o) {
    const double target = o.separation * eps;
    std::vector<double> etas{1.0};
    while (etas.back() > target) etas.push_back(etas.back() * o.ladder);
    return etas;
}

Matrix orthonormal_columns(Rng& rng, int n, int k) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix a(n, k);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(n, k);
    // sign fix so the draw is Haar
    const Matrix rr = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    for (int j = 0; j < k; ++j)
        if (rr(j, j) < 0) q.col(j) *= -1.0;
    return q;
}

class CandidateStream {
public:
    CandidateStream(int d1, int d2, int r, std::uint64_t seed)
        : d1_(d1), d2_(d2), k_(effective_rank(d1, d2, r)), m_(manifold_dim(d1, d2, r)),
          rng_(make_rng(seed, 0x434e44)) {}

    // U diag(s) V^T scaled to radius rho, alternating two factor samplers
    Vector next() {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> g(0.0, 1.0);
        const double rho = u(rng_) < 0.5 ? 1.0 : std::pow(u(rng_), 1.0 / m_);
        Matrix x;
        if ((count_++ & 1) == 0) {
            const Matrix uu = orthonormal_columns(rng_, d1_, k_);
            const Matrix vv = orthonormal_columns(rng_, d2_, k_);
            Vector s(k_);
            do {
                for (int i = 0; i < k_; ++i) s(i) = std::abs(g(rng_));
            } while (s.norm() == 0.0);
            s /= s.norm();
            x = uu * s.asDiagonal() * vv.transpose();
        } else {
            Matrix a(d1_, k_), b(d2_, k_);
            for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng_);
            for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = g(rng_);
            x = a * b.transpose();
            const double n = x.norm();
            if (n == 0.0) return next();
            x /= n;
        }
        x *= rho;
        return vec(x);
    }

private:
    int d1_, d2_, k_, m_;
    Rng rng_;
    std::uint64_t count_ = 0;
};

// greedy packing with a uniform hash on the first few coordinates
class Packing {
public:
    explicit Packing(Eigen::Index dim) : dim_(dim), hashed_(std::min<Eigen::Index>(dim, 4)) {}

    Eigen::Index size() const { return static_cast<Eigen::Index>(points_.size() / dim_); }
    const std::vector<double>& points() const { return points_; }

    void set_radius(double eta) {
        eta_ = eta;
        cells_.clear();
        for (Eigen::Index i = 0; i < size(); ++i) cells_[key(&points_[i * dim_], 0)].push_back(i);
    }

    // true when inserted
    bool offer(const double* x) {
        const double e2 = eta_ * eta_;
        int offs[4] = {-1, -1, -1, -1};
        const int nh = static_cast<int>(hashed_);
        while (true) {
            auto it = cells_.find(key(x, offs));
            if (it != cells_.end()) {
                for (Eigen::Index idx : it->second) {
                    const double* p = &points_[idx * dim_];
                    double d2 = 0.0;
                    for (Eigen::Index j = 0; j < dim_ && d2 <= e2; ++j) d2 += (p[j] - x[j]) * (p[j] - x[j]);
                    if (d2 <= e2) return false;
                }
            }
            int j = 0;
            while (j < nh && offs[j] == 1) offs[j++] = -1;
            if (j == nh) break;
            ++offs[j];
        }
        const Eigen::Index idx = size();
        points_.insert(points_.end(), x, x + dim_);
        cells_[key(x, 0)].push_back(idx);
        return true;
    }

private:
    std::uint64_t key(const double* x, const int* offs) const {
        std::uint64_t k = 0;
        for (Eigen::Index j = 0; j < hashed_; ++j) {
            long c = static_cast<long>(std::floor(x[j] / eta_)) + (offs ? offs[j] : 0) + 32768;
            k |= (static_cast<std::uint64_t>(c) & 0xffff) << (16 * j);
        }
        return k;
    }

    Eigen::Index dim_;
    Eigen::Index hashed_;
    double eta_ = 1.0;
    std::vector<double> points_;
    std::unordered_map<std::uint64_t, std::vector<Eigen::Index>> cells_;
};

}  // namespace

double estimate_net_size(int d1, int d2, int r, double eps, const NetOptions& opts) {
    if (!(eps > 0)) throw PreconditionError("build_net: eps must be positive");
    const double eta = radius_ladder(eps, opts).back();
    return 1.0 + std::pow(1.9 / eta, manifold_dim(d1, d2, r));
}

LowRankNet build_net(int d1, int d2, int r, double eps, const NetOptions& opts) {
    if (d1 < 1 || d2 < 1 || r < 1 || r > std::min(d1, d2))
        throw PreconditionError("build_net: need dims >= 1 and 1 <= r <= min(d1, d2)");
    if (!(eps > 0 && eps <= 2)) throw PreconditionError("build_net: eps must be in (0, 2]");
    const double est = estimate_net_size(d1, d2, r, eps, opts);
    if (est > 4.0 * opts.cap)
        throw CapExceeded("build_net: estimated net size exceeds cap", est);

    const Eigen::Index dim = static_cast<Eigen::Index>(d1) * d2;
    const int m = manifold_dim(d1, d2, r);
    const auto ladder = radius_ladder(eps, opts);
    CandidateStream stream(d1, d2, r, opts.seed);
    Packing pack(dim);
    std::vector<double> seen;  // all candidates drawn so far

    pack.set_radius(ladder.front());
    const std::vector<double> zero(static_cast<std::size_t>(dim), 0.0);
    pack.offer(zero.data());
    const int tolerance = opts.batch / 2000;

    auto check_cap = [&](double eta) {
        if (static_cast<double>(pack.size()) > opts.cap) {
            const double projected =
                static_cast<double>(pack.size()) * std::pow(eta / ladder.back(), m);
            throw CapExceeded("build_net: net size exceeds cap", std::max(projected, opts.cap + 1));
        }
    };

    for (double eta : ladder) {
        pack.set_radius(eta);
        for (std::size_t off = 0; off < seen.size(); off += static_cast<std::size_t>(dim)) {
            pack.offer(&seen[off]);
        }
        check_cap(eta);
        while (true) {
            int inserted = 0;
            for (int b = 0; b < opts.batch; ++b) {
                const Vector c = stream.next();
                seen.insert(seen.end(), c.data(), c.data() + dim);
                if (pack.offer(c.data())) ++inserted;
            }
            check_cap(eta);
            if (inserted <= tolerance) break;
        }
    }

    const Eigen::Index n = pack.size();
    Matrix flat(n, dim);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) flat(i, j) = pack.points()[static_cast<std::size_t>(i * dim + j)];
    return LowRankNet(d1, d2, r, eps, std::move(flat));
}

double nearest_distance(const LowRankNet& net, const Matrix& target) {
    if (net.size() == 0) throw PreconditionError("nearest_distance: empty net");
    if (target.rows() != net.d1() || target.cols() != net.d2())
        throw DimensionMismatch("nearest_distance: target shape mismatch");
    const Eigen::RowVectorXd t = vec(target).transpose();
    return std::sqrt((net.flat().rowwise() - t).rowwise().squaredNorm().minCoeff());
}

std::string net_cache_name(int d1, int d2, int r, double eps, const NetOptions& opts) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "net_%dx%d_r%d_eps%.17g_v%d_s%llx.bin", d1, d2, r, eps, kNetVersion,
                  static_cast<unsigned long long>(opts.seed));
    return buf;
}

namespace {
constexpr char kMagic[8] = {'L', 'R', 'B', 'N', 'E', 'T', '0', '1'};
}

void save_net(const LowRankNet& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write net cache " + path.string());
    const std::int32_t hdr[4] = {kNetVersion, net.d1(), net.d2(), net.r()};
    const double eps = net.eps();
    const std::int64_t n = net.size();
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    out.write(reinterpret_cast<const char*>(&eps), sizeof eps);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    // row-major element storage
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = net.flat();
    out.write(reinterpret_cast<const char*>(rm.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rm.size())));
    if (!out) throw Error("failed writing net cache " + path.string());
}

LowRankNet load_net(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read net cache " + path.string());
    char magic[8];
    std::int32_t hdr[4];
    double eps = 0;
    std::int64_t n = 0;
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(hdr), sizeof hdr);
    in.read(reinterpret_cast<char*>(&eps), sizeof eps);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || !std::equal(magic, magic + 8, kMagic) || hdr[0] != kNetVersion || n < 0)
        throw Error("net cache " + path.string() + " is corrupt or from another version");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(n, hdr[1] * hdr[2]);
    in.read(reinterpret_cast<char*>(rm.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rm.size())));
    if (!in) throw Error("net cache " + path.string() + " is truncated");
    return LowRankNet(hdr[1], hdr[2], hdr[3], eps, Matrix(rm));
}

LowRankNet build_net_cached(const std::filesystem::path& dir, int d1, int d2, int r, double eps,
                            const NetOptions& opts) {
    const auto path = dir / net_cache_name(d1, d2, r, eps, opts);
    if (std::filesystem::exists(path)) {
        LowRankNet net = load_net(path);
        if (net.d1() == d1 && net.d2() == d2 && net.r() == r && net.eps() == eps) return net;
    }
    LowRankNet net = build_net(d1, d2, r, eps, opts);
    std::filesystem::create_directories(dir);
    const auto tmp = path.string() + ".tmp";
    save_net(net, tmp);
    std::filesystem::rename(tmp, path);
    return net;
}

}  // namespace lrbandit
