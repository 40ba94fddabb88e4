#include "qv/generators.hpp"

#include <unsupported/Eigen/FFT>

#include <Eigen/Cholesky>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace qv {

uint64_t rng_at(uint64_t seed, uint64_t counter) {
    uint64_t x = seed + counter * 0x9E3779B97F4A7C15ull;
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double uniform01(uint64_t seed, uint64_t counter) {
    return static_cast<double>(rng_at(seed, counter) >> 11) * 0x1.0p-53;
}

double gaussian(uint64_t seed, uint64_t pair_index) {
    // u1 in ]0,1] so the log is finite.
    double u1 = static_cast<double>((rng_at(seed, 2 * pair_index) >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform01(seed, 2 * pair_index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

std::vector<double> uniform_grid(double T, size_t n_intervals) {
    std::vector<double> g(n_intervals + 1);
    for (size_t i = 0; i <= n_intervals; ++i) g[i] = T * static_cast<double>(i) / n_intervals;
    g.back() = T;
    return g;
}

size_t interval_count(const PathRecipe& r) {
    double n = std::ldexp(1.0, r.level) * r.horizon;
    auto N = static_cast<size_t>(std::llround(n));
    if (N < 1) N = 1;
    return N;
}

CadlagPath gen_walk(const PathRecipe& r, std::vector<Jump> jumps) {
    const int d = r.dim;
    Eigen::MatrixXd sigma = r.sigma.size() ? r.sigma : Eigen::MatrixXd::Identity(d, d);
    if (sigma.rows() != d) throw std::invalid_argument("walk: sigma must have d rows");
    const int k = static_cast<int>(sigma.cols());

    // Block-structured signs: within a block of length L = bit_ceil(max(k,2)),
    // s_i[a] = r_block[a] * (-1)^popcount((i mod L) & a). Columns a != b then
    // cancel exactly over every full block, so the matched-grid tensor QV is
    // T * sigma sigma^T with no statistical error. N is padded to a multiple
    // of L to keep the final block full.
    const size_t L = std::bit_ceil(static_cast<size_t>(std::max(k, 2)));
    size_t N = interval_count(r);
    N = ((N + L - 1) / L) * L;
    const double mesh = r.horizon / static_cast<double>(N);
    const double scale = std::sqrt(mesh);

    std::vector<double> grid = uniform_grid(r.horizon, N);
    std::vector<Eigen::VectorXd> samples(N + 1, Eigen::VectorXd::Zero(d));
    std::vector<double> block_sign(k);
    Eigen::VectorXd s(k);
    for (size_t i = 0; i < N; ++i) {
        const size_t j = i % L;
        if (j == 0) {
            const size_t b = i / L;
            for (int a = 0; a < k; ++a)
                block_sign[a] = uniform01(r.seed, b * static_cast<size_t>(k) + a) < 0.5 ? -1.0 : 1.0;
        }
        for (int a = 0; a < k; ++a)
            s[a] = block_sign[a] * (std::popcount(j & static_cast<size_t>(a)) % 2 ? -1.0 : 1.0);
        samples[i + 1] = samples[i] + scale * (sigma * s);
    }
    return CadlagPath(std::move(grid), std::move(samples), std::move(jumps));
}

// One component of fractional Gaussian noise (unit spacing), Davies-Harte
// circulant embedding; Cholesky fallback on small grids if the embedding is
// not nonnegative.
std::vector<double> fgn(size_t N, double H, uint64_t seed, uint64_t stream) {
    auto gamma = [H](double k) {
        k = std::abs(k);
        return 0.5 * (std::pow(k + 1.0, 2.0 * H) - 2.0 * std::pow(k, 2.0 * H) +
                      std::pow(std::abs(k - 1.0), 2.0 * H));
    };
    const size_t m = 2 * N;
    std::vector<std::complex<double>> c(m);
    for (size_t j = 0; j <= N; ++j) c[j] = gamma(static_cast<double>(j));
    for (size_t j = N + 1; j < m; ++j) c[j] = c[m - j];

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> lambda(m);
    fft.fwd(lambda, c);

    double min_l = 0.0, max_l = 0.0;
    for (const auto& l : lambda) {
        min_l = std::min(min_l, l.real());
        max_l = std::max(max_l, l.real());
    }
    if (min_l < -1e-8 * max_l && N <= (1u << 12)) {
        // Exact covariance factorization for desk-scale grids.
        Eigen::MatrixXd C(N, N);
        for (size_t i = 0; i < N; ++i)
            for (size_t j = 0; j < N; ++j)
                C(i, j) = gamma(static_cast<double>(i) - static_cast<double>(j));
        Eigen::LLT<Eigen::MatrixXd> llt(C);
        Eigen::VectorXd z(N);
        for (size_t i = 0; i < N; ++i)
            z[i] = gaussian(seed, stream * (1ull << 32) + i);
        Eigen::VectorXd x = llt.matrixL() * z;
        return {x.data(), x.data() + N};
    }

    const uint64_t base = stream * (1ull << 32);
    std::vector<std::complex<double>> w(m);
    auto lam = [&](size_t j) { return std::max(lambda[j].real(), 0.0); };
    w[0] = std::sqrt(lam(0) / m) * gaussian(seed, base + 0);
    w[N] = std::sqrt(lam(N) / m) * gaussian(seed, base + 1);
    for (size_t j = 1; j < N; ++j) {
        double a = gaussian(seed, base + 2 * j);
        double b = gaussian(seed, base + 2 * j + 1);
        w[j] = std::sqrt(lam(j) / (2.0 * m)) * std::complex<double>(a, b);
        w[m - j] = std::conj(w[j]);
    }
    std::vector<std::complex<double>> out(m);
    fft.fwd(out, w);
    std::vector<double> noise(N);
    for (size_t i = 0; i < N; ++i) noise[i] = out[i].real();
    return noise;
}

CadlagPath gen_fbm(const PathRecipe& r) {
    if (!(r.hurst > 0.0 && r.hurst < 1.0))
        throw std::invalid_argument("FBM: hurst must lie in ]0,1[");
    const size_t N = interval_count(r);
    const double mesh = r.horizon / static_cast<double>(N);
    const double scale = std::pow(mesh, r.hurst);
    std::vector<double> grid = uniform_grid(r.horizon, N);
    std::vector<Eigen::VectorXd> samples(N + 1, Eigen::VectorXd::Zero(r.dim));
    for (int comp = 0; comp < r.dim; ++comp) {
        auto noise = fgn(N, r.hurst, r.seed, static_cast<uint64_t>(comp) + 1);
        double acc = 0.0;
        for (size_t i = 0; i < N; ++i) {
            acc += scale * noise[i];
            samples[i + 1][comp] = acc;
        }
    }
    return CadlagPath(std::move(grid), std::move(samples), {});
}

CadlagPath gen_smooth(const PathRecipe& r) {
    const size_t N = interval_count(r);
    std::vector<double> grid = uniform_grid(r.horizon, N);
    std::vector<Eigen::VectorXd> samples(N + 1, Eigen::VectorXd::Zero(r.dim));
    for (size_t i = 0; i <= N; ++i) {
        const double t = grid[i];
        for (int c = 0; c < r.dim; ++c) {
            double v = 0.0;
            if (c < static_cast<int>(r.poly.size())) {
                const auto& p = r.poly[c];
                for (size_t k = p.size(); k-- > 0;) v = v * t + p[k];
            } else {
                v = t;  // default: coordinate moves linearly
            }
            if (c < static_cast<int>(r.sin_amp.size()))
                v += r.sin_amp[c] * std::sin((c < static_cast<int>(r.sin_freq.size())
                                                  ? r.sin_freq[c]
                                                  : 1.0) *
                                             t);
            samples[i][c] = v;
        }
    }
    return CadlagPath(std::move(grid), std::move(samples), {});
}

}  // namespace

CadlagPath generate(const PathRecipe& recipe) {
    if (recipe.dim < 1) throw std::invalid_argument("recipe: dim must be positive");
    if (recipe.horizon <= 0.0) throw std::invalid_argument("recipe: horizon must be positive");
    for (const auto& j : recipe.jumps) {
        if (j.time <= 0.0 || j.time > recipe.horizon)
            throw std::invalid_argument("recipe: jump time outside ]0,T]");
        if (j.delta.size() != recipe.dim)
            throw std::invalid_argument("recipe: jump dimension mismatch");
    }
    switch (recipe.kind) {
        case RecipeKind::ScaledRandomWalk:
            return gen_walk(recipe, {});
        case RecipeKind::JumpDiffusion: {
            auto jumps = recipe.jumps;
            std::sort(jumps.begin(), jumps.end(),
                      [](const Jump& a, const Jump& b) { return a.time < b.time; });
            return gen_walk(recipe, std::move(jumps));
        }
        case RecipeKind::FBM:
            return gen_fbm(recipe);
        case RecipeKind::StepFV: {
            auto jumps = recipe.jumps;
            std::sort(jumps.begin(), jumps.end(),
                      [](const Jump& a, const Jump& b) { return a.time < b.time; });
            return CadlagPath::pure_jump(recipe.horizon, recipe.dim, std::move(jumps));
        }
        case RecipeKind::SmoothFV:
            return gen_smooth(recipe);
    }
    throw std::logic_error("unreachable");
}

Eigen::MatrixXd ExpectedQV::tensor_at(double t) const {
    Eigen::MatrixXd m = t * linear_rate;
    const int d = static_cast<int>(linear_rate.rows());
    for (const auto& j : tensor_jumps) {
        if (j.time > t) break;
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k) m(i, k) += j.delta[i * d + k];
    }
    return m;
}

double ExpectedQV::scalar_at(double t) const { return tensor_at(t).trace(); }

std::optional<ExpectedQV> expected_qv(const PathRecipe& recipe) {
    const int d = recipe.dim;
    ExpectedQV e;
    e.linear_rate = Eigen::MatrixXd::Zero(d, d);
    auto jump_part = [&]() {
        for (const auto& j : recipe.jumps) {
            Eigen::MatrixXd outer = j.delta * j.delta.transpose();
            Eigen::VectorXd flat(d * d);
            for (int i = 0; i < d; ++i)
                for (int k = 0; k < d; ++k) flat[i * d + k] = outer(i, k);
            e.tensor_jumps.push_back({j.time, std::move(flat)});
        }
        std::sort(e.tensor_jumps.begin(), e.tensor_jumps.end(),
                  [](const Jump& a, const Jump& b) { return a.time < b.time; });
    };
    switch (recipe.kind) {
        case RecipeKind::ScaledRandomWalk: {
            Eigen::MatrixXd sigma =
                recipe.sigma.size() ? recipe.sigma : Eigen::MatrixXd::Identity(d, d);
            e.linear_rate = sigma * sigma.transpose();
            return e;
        }
        case RecipeKind::JumpDiffusion: {
            Eigen::MatrixXd sigma =
                recipe.sigma.size() ? recipe.sigma : Eigen::MatrixXd::Identity(d, d);
            e.linear_rate = sigma * sigma.transpose();
            jump_part();
            return e;
        }
        case RecipeKind::StepFV:
            jump_part();
            return e;
        case RecipeKind::SmoothFV:
            return e;  // zero QV
        case RecipeKind::FBM:
            if (recipe.hurst > 0.5) return e;  // Holder > 1/2: zero QV
            return std::nullopt;
    }
    return std::nullopt;
}

double holder_quotient(const CadlagPath& path, double exponent) {
    const auto& g = path.grid();
    double worst = 0.0;
    for (size_t i = 0; i + 1 < g.size(); ++i) {
        double mesh = g[i + 1] - g[i];
        if (mesh <= 0.0) continue;
        double inc = (path.continuous_value(g[i + 1]) - path.continuous_value(g[i])).norm();
        worst = std::max(worst, inc / std::pow(mesh, exponent));
    }
    return worst;
}

}  // namespace qv
