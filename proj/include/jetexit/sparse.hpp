#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace jetexit {

struct Triplet {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;
};

/// Row-compressed sparse matrix with sorted column indices per row.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col;
    std::vector<double> val;

    /// Duplicate (row, col) entries are summed.
    static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);
    static CsrMatrix identity(std::size_t n);

    std::size_t nnz() const { return val.size(); }
    double at(std::size_t i, std::size_t j) const;
    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> multiply(std::span<const double> x) const;
    std::vector<Triplet> triplets() const;
};

/// Zero-fill incomplete LU factorization on the matrix's own pattern.
class Ilu0 {
public:
    explicit Ilu0(const CsrMatrix& a);
    /// Solves (L U) z = r.
    void apply(std::span<const double> r, std::span<double> z) const;

private:
    CsrMatrix lu_;
    std::vector<std::size_t> diag_;
};

struct IterativeResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> history;
    bool converged = false;
};

/// Restarted GMRES, right-preconditioned with ILU(0). `x0` may be empty.
IterativeResult gmres_ilu(const CsrMatrix& a, std::span<const double> b, double tol,
                          std::size_t max_iter, std::size_t restart = 50,
                          std::span<const double> x0 = {});

/// Sparse LU factorization (COLAMD ordering); reusable for several right-hand sides.
class SparseDirect {
public:
    explicit SparseDirect(const CsrMatrix& a);
    ~SparseDirect();
    SparseDirect(const SparseDirect&) = delete;
    SparseDirect& operator=(const SparseDirect&) = delete;

    std::vector<double> solve(std::span<const double> b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

double norm2(std::span<const double> v);

}  // namespace jetexit
