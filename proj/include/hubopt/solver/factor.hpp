#pragma once

// Sparse LU factorisation of a simplex basis with product-form updates.

#include <functional>
#include <vector>

namespace hubopt::solver
{

struct SparseColumn
{
    const int* index = nullptr;
    const double* value = nullptr;
    int size = 0;
};

class BasisFactor
{
public:
    /// Column k of the basis is `column(k)`. Returns the positions whose
    /// columns were found dependent; for each, `replacement_rows` names the row
    /// whose unit column took its place.
    std::vector<int> factorize(int m, const std::function<SparseColumn(int)>& column,
                               std::vector<int>& replacement_rows, double pivot_threshold = 0.1,
                               double singular_tol = 1e-11);

    /// x := B^-1 x. Input is row-indexed, output is position-indexed.
    void ftran(std::vector<double>& x) const;
    /// y := B^-T y. Input is position-indexed, output is row-indexed.
    void btran(std::vector<double>& y) const;

    /// Records that position `p` now holds a column whose ftran image is `alpha`.
    void update(int p, const std::vector<double>& alpha);

    int updates() const { return static_cast<int>(eta_pos_.size()); }
    std::size_t fill() const { return l_index_.size() + u_index_.size() + eta_index_.size(); }
    int dimension() const { return m_; }

private:
    int m_ = 0;
    // Pivot step s eliminates row pivot_row_[s] with the column at position pivot_pos_[s].
    std::vector<int> pivot_row_;
    std::vector<int> pivot_pos_;
    std::vector<double> u_diag_;
    std::vector<int> l_start_, l_index_;
    std::vector<double> l_value_;
    // Off-diagonal U entries of step s, stored by row index.
    std::vector<int> u_start_, u_index_;
    std::vector<double> u_value_;
    std::vector<int> eta_pos_, eta_start_, eta_index_;
    std::vector<double> eta_pivot_, eta_value_;
    mutable std::vector<double> work_;
};

} // namespace hubopt::solver
