#include "hubopt/solver/lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hubopt::solver
{

SparseMatrix SparseMatrix::transposed() const
{
    SparseMatrix t;
    t.rows = cols;
    t.cols = rows;
    int minor = rows;
    int major = cols;
    t.start.assign(static_cast<std::size_t>(minor) + 1, 0);
    for (int k : index)
        ++t.start[static_cast<std::size_t>(k) + 1];
    for (int i = 0; i < minor; ++i)
        t.start[static_cast<std::size_t>(i) + 1] += t.start[static_cast<std::size_t>(i)];
    t.index.resize(index.size());
    t.value.resize(value.size());
    std::vector<int> next(t.start.begin(), t.start.end() - 1);
    for (int j = 0; j < major; ++j)
        for (int p = start[static_cast<std::size_t>(j)]; p < start[static_cast<std::size_t>(j) + 1]; ++p)
        {
            int i = index[static_cast<std::size_t>(p)];
            int q = next[static_cast<std::size_t>(i)]++;
            t.index[static_cast<std::size_t>(q)] = j;
            t.value[static_cast<std::size_t>(q)] = value[static_cast<std::size_t>(p)];
        }
    return t;
}

SparseMatrix csc_from_triplets(int rows, int cols, std::vector<int> ri, std::vector<int> ci,
                               std::vector<double> v)
{
    std::vector<std::size_t> order(ri.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ci[a] != ci[b] ? ci[a] < ci[b] : ri[a] < ri[b];
    });
    SparseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.start.assign(static_cast<std::size_t>(cols) + 1, 0);
    int last_r = -1, last_c = -1;
    for (std::size_t k : order)
    {
        if (ci[k] == last_c && ri[k] == last_r)
        {
            m.value.back() += v[k];
            continue;
        }
        m.index.push_back(ri[k]);
        m.value.push_back(v[k]);
        ++m.start[static_cast<std::size_t>(ci[k]) + 1];
        last_r = ri[k];
        last_c = ci[k];
    }
    for (int j = 0; j < cols; ++j)
        m.start[static_cast<std::size_t>(j) + 1] += m.start[static_cast<std::size_t>(j)];
    // Drop explicit zeros produced by cancellation.
    SparseMatrix out;
    out.rows = rows;
    out.cols = cols;
    out.start.assign(static_cast<std::size_t>(cols) + 1, 0);
    for (int j = 0; j < cols; ++j)
    {
        for (int p = m.start[static_cast<std::size_t>(j)]; p < m.start[static_cast<std::size_t>(j) + 1]; ++p)
            if (m.value[static_cast<std::size_t>(p)] != 0.0)
            {
                out.index.push_back(m.index[static_cast<std::size_t>(p)]);
                out.value.push_back(m.value[static_cast<std::size_t>(p)]);
            }
        out.start[static_cast<std::size_t>(j) + 1] = static_cast<int>(out.index.size());
    }
    return out;
}

LpProblem to_lp(const milp::MILPInstance& instance)
{
    LpProblem lp;
    int n = static_cast<int>(instance.variables.size());
    int m = static_cast<int>(instance.constraints.size());
    std::vector<int> ri, ci;
    std::vector<double> v;
    lp.row_lower.resize(static_cast<std::size_t>(m));
    lp.row_upper.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
    {
        const auto& c = instance.constraints[static_cast<std::size_t>(i)];
        for (const auto& t : c.terms)
        {
            ri.push_back(i);
            ci.push_back(t.var);
            v.push_back(t.coeff);
        }
        lp.row_lower[static_cast<std::size_t>(i)] = c.sense == milp::Sense::LE ? -kInf : c.rhs;
        lp.row_upper[static_cast<std::size_t>(i)] = c.sense == milp::Sense::GE ? kInf : c.rhs;
    }
    lp.a = csc_from_triplets(m, n, std::move(ri), std::move(ci), std::move(v));
    lp.cost.assign(static_cast<std::size_t>(n), 0.0);
    for (const auto& t : instance.objective)
        lp.cost[static_cast<std::size_t>(t.var)] += t.coeff;
    for (const auto& var : instance.variables)
    {
        lp.col_lower.push_back(var.lower);
        lp.col_upper.push_back(var.upper);
        lp.integer.push_back(var.is_integer() ? 1 : 0);
    }
    lp.offset = instance.objective_offset;
    return lp;
}

double objective_of(const LpProblem& lp, const std::vector<double>& x)
{
    double z = lp.offset;
    for (int j = 0; j < lp.cols(); ++j)
        z += lp.cost[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
    return z;
}

double max_violation(const LpProblem& lp, const std::vector<double>& x)
{
    double worst = 0.0;
    std::vector<double> act(static_cast<std::size_t>(lp.rows()), 0.0);
    for (int j = 0; j < lp.cols(); ++j)
    {
        double xj = x[static_cast<std::size_t>(j)];
        worst = std::max({worst, lp.col_lower[static_cast<std::size_t>(j)] - xj,
                          xj - lp.col_upper[static_cast<std::size_t>(j)]});
        for (int p = lp.a.start[static_cast<std::size_t>(j)]; p < lp.a.start[static_cast<std::size_t>(j) + 1]; ++p)
            act[static_cast<std::size_t>(lp.a.index[static_cast<std::size_t>(p)])] +=
                lp.a.value[static_cast<std::size_t>(p)] * xj;
    }
    for (int i = 0; i < lp.rows(); ++i)
        worst = std::max({worst, lp.row_lower[static_cast<std::size_t>(i)] - act[static_cast<std::size_t>(i)],
                          act[static_cast<std::size_t>(i)] - lp.row_upper[static_cast<std::size_t>(i)]});
    return worst;
}

} // namespace hubopt::solver
