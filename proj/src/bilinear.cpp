#include "qv/bilinear.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace qv {

BilinearForm BilinearForm::inner(int d) {
    BilinearForm b;
    b.kind_ = BilinearKind::Inner;
    b.in_dim_ = d;
    b.out_dim_ = 1;
    b.op_norm_ = 1.0;
    return b;
}

BilinearForm BilinearForm::outer(int d) {
    BilinearForm b;
    b.kind_ = BilinearKind::Outer;
    b.in_dim_ = d;
    b.out_dim_ = d * d;
    b.op_norm_ = 1.0;  // ||x (x) y||_alpha = |x||y| for any reasonable crossnorm
    return b;
}

namespace {

// splitmix64 finalizer; local copy to avoid a dependency on generators.
uint64_t mix(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double unit_interval(uint64_t seed, uint64_t ctr) {
    return static_cast<double>(mix(seed + ctr * 0x9E3779B97F4A7C15ull) >> 11) * 0x1.0p-53;
}

// sup_{|x|=|y|=1} |B(x,y)|_2 by alternating SVD steps with random restarts.
double estimate_norm(const std::vector<Eigen::MatrixXd>& c, int d, uint64_t seed) {
    const int m = static_cast<int>(c.size());
    double best = 0.0;
    uint64_t ctr = 0;
    for (int restart = 0; restart < 64; ++restart) {
        Eigen::VectorXd y(d);
        for (int i = 0; i < d; ++i) y[i] = 2.0 * unit_interval(seed, ctr++) - 1.0;
        if (y.norm() == 0.0) y.setOnes();
        y.normalize();
        Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
        for (int iter = 0; iter < 30; ++iter) {
            Eigen::MatrixXd My(m, d);  // rows (C_k y)^T, so B(x,y) = My x
            for (int k = 0; k < m; ++k) My.row(k) = (c[k] * y).transpose();
            Eigen::JacobiSVD<Eigen::MatrixXd> s1(My, Eigen::ComputeThinV);
            x = s1.matrixV().col(0);
            Eigen::MatrixXd Mx(m, d);  // rows x^T C_k, so B(x,y) = Mx y
            for (int k = 0; k < m; ++k) Mx.row(k) = (c[k].transpose() * x).transpose();
            Eigen::JacobiSVD<Eigen::MatrixXd> s2(Mx, Eigen::ComputeThinV);
            y = s2.matrixV().col(0);
        }
        Eigen::VectorXd v(m);
        for (int k = 0; k < m; ++k) v[k] = x.dot(c[k] * y);
        best = std::max(best, v.norm());
    }
    return best;
}

}  // namespace

BilinearForm BilinearForm::coefficients(std::vector<Eigen::MatrixXd> c, uint64_t norm_seed) {
    if (c.empty()) throw std::invalid_argument("coefficient form needs >= 1 matrix");
    const int d = static_cast<int>(c.front().rows());
    for (const auto& M : c)
        if (M.rows() != d || M.cols() != d)
            throw std::invalid_argument("coefficient matrices must be square and same size");
    BilinearForm b;
    b.kind_ = BilinearKind::Coefficients;
    b.in_dim_ = d;
    b.out_dim_ = static_cast<int>(c.size());
    b.coeff_ = std::move(c);
    b.op_norm_ = estimate_norm(b.coeff_, d, norm_seed);
    b.norm_estimated_ = true;
    return b;
}

Eigen::VectorXd BilinearForm::apply(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    if (x.size() != in_dim_ || y.size() != in_dim_)
        throw std::invalid_argument("bilinear form: dimension mismatch");
    switch (kind_) {
        case BilinearKind::Inner: {
            Eigen::VectorXd v(1);
            v[0] = x.dot(y);
            return v;
        }
        case BilinearKind::Outer: {
            Eigen::VectorXd v(in_dim_ * in_dim_);
            for (int i = 0; i < in_dim_; ++i)
                for (int j = 0; j < in_dim_; ++j) v[i * in_dim_ + j] = x[i] * y[j];
            return v;
        }
        case BilinearKind::Coefficients: {
            Eigen::VectorXd v(out_dim_);
            for (int k = 0; k < out_dim_; ++k) v[k] = x.dot(coeff_[k] * y);
            return v;
        }
    }
    throw std::logic_error("unreachable");
}

BilinearForm BilinearForm::compose_linear(const Eigen::MatrixXd& T) const {
    if (T.cols() != out_dim_) throw std::invalid_argument("compose_linear: dimension mismatch");
    std::vector<Eigen::MatrixXd> c;
    c.reserve(static_cast<size_t>(T.rows()));
    const int d = in_dim_;
    for (int k = 0; k < T.rows(); ++k) {
        Eigen::MatrixXd Ck = Eigen::MatrixXd::Zero(d, d);
        switch (kind_) {
            case BilinearKind::Inner:
                Ck = T(k, 0) * Eigen::MatrixXd::Identity(d, d);
                break;
            case BilinearKind::Outer:
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) Ck(i, j) = T(k, i * d + j);
                break;
            case BilinearKind::Coefficients:
                for (int l = 0; l < out_dim_; ++l) Ck += T(k, l) * coeff_[l];
                break;
        }
        c.push_back(std::move(Ck));
    }
    return coefficients(std::move(c));
}

double matrix_crossnorm(const Eigen::MatrixXd& M, Crossnorm alpha) {
    if (alpha == Crossnorm::Hilbertian) return M.norm();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    if (alpha == Crossnorm::Injective) return sv.size() ? sv[0] : 0.0;
    return sv.sum();  // Projective = nuclear (Euclidean ground norm)
}

double value_norm(const Eigen::VectorXd& v, int mat_dim, Crossnorm alpha) {
    if (mat_dim > 0) return matrix_crossnorm(unflatten(v, mat_dim, mat_dim), alpha);
    return v.norm();
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int rows, int cols) {
    if (v.size() != rows * cols) throw std::invalid_argument("unflatten: size mismatch");
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = v[i * cols + j];
    return M;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& M) {
    Eigen::VectorXd v(M.rows() * M.cols());
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j) v[i * M.cols() + j] = M(i, j);
    return v;
}

std::string to_string(Crossnorm a) {
    switch (a) {
        case Crossnorm::Projective: return "projective";
        case Crossnorm::Injective: return "injective";
        case Crossnorm::Hilbertian: return "hilbertian";
    }
    return "?";
}

Crossnorm crossnorm_from_string(std::string_view s) {
    if (s == "projective" || s == "nuclear") return Crossnorm::Projective;
    if (s == "injective" || s == "spectral") return Crossnorm::Injective;
    if (s == "hilbertian" || s == "frobenius") return Crossnorm::Hilbertian;
    throw std::invalid_argument("unknown crossnorm: " + std::string(s));
}

}  // namespace qv
