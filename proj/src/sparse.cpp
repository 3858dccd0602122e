#include "jetexit/sparse.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "jetexit/error.hpp"

namespace jetexit {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(rows + 1, 0);
    for (std::size_t k = 0; k < entries.size();) {
        const Triplet& t = entries[k];
        if (t.row >= rows || t.col >= cols) throw Error("triplet index out of range");
        double sum = 0.0;
        std::size_t j = k;
        while (j < entries.size() && entries[j].row == t.row && entries[j].col == t.col) {
            sum += entries[j].value;
            ++j;
        }
        m.col.push_back(t.col);
        m.val.push_back(sum);
        ++m.row_ptr[t.row + 1];
        k = j;
    }
    for (std::size_t i = 0; i < rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    return it != last && *it == j ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(rows);
    multiply(x, y);
    return y;
}

std::vector<Triplet> CsrMatrix::triplets() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) t.push_back({i, col[k], val[k]});
    }
    return t;
}

Ilu0::Ilu0(const CsrMatrix& a) : lu_(a), diag_(a.rows) {
    const std::size_t n = a.rows;
    for (std::size_t i = 0; i < n; ++i) {
        diag_[i] = lu_.row_ptr[i + 1];
        for (std::size_t k = lu_.row_ptr[i]; k < lu_.row_ptr[i + 1]; ++k) {
            if (lu_.col[k] == i) diag_[i] = k;
        }
        if (diag_[i] == lu_.row_ptr[i + 1]) throw SolverError("ILU(0): missing diagonal entry", {});
    }
    std::vector<std::ptrdiff_t> where(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = lu_.row_ptr[i]; k < lu_.row_ptr[i + 1]; ++k) {
            where[lu_.col[k]] = static_cast<std::ptrdiff_t>(k);
        }
        for (std::size_t k = lu_.row_ptr[i]; k < lu_.row_ptr[i + 1] && lu_.col[k] < i; ++k) {
            const std::size_t p = lu_.col[k];
            const double pivot = lu_.val[diag_[p]];
            if (pivot == 0.0) throw SolverError("ILU(0): zero pivot", {});
            lu_.val[k] /= pivot;
            const double l = lu_.val[k];
            for (std::size_t q = diag_[p] + 1; q < lu_.row_ptr[p + 1]; ++q) {
                const std::ptrdiff_t w = where[lu_.col[q]];
                if (w >= 0) lu_.val[static_cast<std::size_t>(w)] -= l * lu_.val[q];
            }
        }
        for (std::size_t k = lu_.row_ptr[i]; k < lu_.row_ptr[i + 1]; ++k) where[lu_.col[k]] = -1;
    }
}

void Ilu0::apply(std::span<const double> r, std::span<double> z) const {
    const std::size_t n = lu_.rows;
    for (std::size_t i = 0; i < n; ++i) {
        double s = r[i];
        for (std::size_t k = lu_.row_ptr[i]; k < diag_[i]; ++k) s -= lu_.val[k] * z[lu_.col[k]];
        z[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = z[i];
        for (std::size_t k = diag_[i] + 1; k < lu_.row_ptr[i + 1]; ++k) s -= lu_.val[k] * z[lu_.col[k]];
        z[i] = s / lu_.val[diag_[i]];
    }
}

IterativeResult gmres_ilu(const CsrMatrix& a, std::span<const double> b, double tol,
                          std::size_t max_iter, std::size_t restart, std::span<const double> x0) {
    const std::size_t n = a.rows;
    const Ilu0 precond(a);
    IterativeResult res;
    res.x.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), res.x.begin());
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(res.x.begin(), res.x.end(), 0.0);
        res.converged = true;
        return res;
    }
    const std::size_t m = std::max<std::size_t>(1, restart);
    std::vector<std::vector<double>> v(m + 1, std::vector<double>(n));
    std::vector<std::vector<double>> z(m, std::vector<double>(n));
    std::vector<double> h((m + 1) * m), cs(m), sn(m), g(m + 1), w(n), r(n);
    auto H = [&](std::size_t i, std::size_t j) -> double& { return h[i * m + j]; };

    while (res.iterations < max_iter) {
        a.multiply(res.x, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        double beta = norm2(r);
        res.relative_residual = beta / bnorm;
        res.history.push_back(res.relative_residual);
        if (res.relative_residual <= tol) {
            res.converged = true;
            return res;
        }
        for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;
        std::size_t k = 0;
        for (; k < m && res.iterations < max_iter; ++k) {
            ++res.iterations;
            precond.apply(v[k], z[k]);
            a.multiply(z[k], w);
            for (std::size_t i = 0; i <= k; ++i) {
                double d = 0.0;
                for (std::size_t q = 0; q < n; ++q) d += w[q] * v[i][q];
                H(i, k) = d;
                for (std::size_t q = 0; q < n; ++q) w[q] -= d * v[i][q];
            }
            const double hn = norm2(w);
            H(k + 1, k) = hn;
            if (hn > 0.0) {
                for (std::size_t q = 0; q < n; ++q) v[k + 1][q] = w[q] / hn;
            }
            for (std::size_t i = 0; i < k; ++i) {
                const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
                H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
                H(i, k) = t;
            }
            const double denom = std::hypot(H(k, k), H(k + 1, k));
            if (denom == 0.0) throw SolverError("GMRES breakdown", res.history);
            cs[k] = H(k, k) / denom;
            sn[k] = H(k + 1, k) / denom;
            H(k, k) = denom;
            H(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            res.history.push_back(std::abs(g[k + 1]) / bnorm);
            if (std::abs(g[k + 1]) / bnorm <= tol || hn == 0.0) {
                ++k;
                break;
            }
        }
        // Back substitution and update x += Z y.
        std::vector<double> y(k);
        for (std::size_t i = k; i-- > 0;) {
            double s = g[i];
            for (std::size_t j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
            y[i] = s / H(i, i);
        }
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t q = 0; q < n; ++q) res.x[q] += y[j] * z[j][q];
        }
    }
    a.multiply(res.x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    res.relative_residual = norm2(r) / bnorm;
    res.converged = res.relative_residual <= tol;
    return res;
}

struct SparseDirect::Impl {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    std::size_t n = 0;
};

SparseDirect::SparseDirect(const CsrMatrix& a) : impl_(std::make_unique<Impl>()) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(a.nnz());
    for (const Triplet& e : a.triplets()) {
        t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
    }
    Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(a.rows), static_cast<Eigen::Index>(a.cols));
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    impl_->n = a.rows;
    impl_->lu.analyzePattern(m);
    impl_->lu.factorize(m);
    if (impl_->lu.info() != Eigen::Success) {
        throw SolverError("sparse LU factorization failed", {});
    }
}

SparseDirect::~SparseDirect() = default;

std::vector<double> SparseDirect::solve(std::span<const double> b) const {
    Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = impl_->lu.solve(rhs);
    if (impl_->lu.info() != Eigen::Success) throw SolverError("sparse LU solve failed", {});
    return {x.data(), x.data() + x.size()};
}

}  // namespace jetexit
