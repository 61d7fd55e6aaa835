#include "hubopt/solver/presolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hubopt::solver
{

namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Work
{
    const LpProblem& lp;
    SparseMatrix rows; // CSC of A'
    std::vector<double> lb, ub, lo, up;
    std::vector<char> col_on, row_on;
    std::vector<int> col_cnt, row_cnt;
    std::vector<double> removed;
    double offset;
    double tol;

    explicit Work(const LpProblem& p, double t)
        : lp(p), rows(p.a.transposed()), lb(p.col_lower), ub(p.col_upper), lo(p.row_lower),
          up(p.row_upper), col_on(static_cast<std::size_t>(p.cols()), 1),
          row_on(static_cast<std::size_t>(p.rows()), 1), col_cnt(static_cast<std::size_t>(p.cols())),
          row_cnt(static_cast<std::size_t>(p.rows())), removed(static_cast<std::size_t>(p.cols()), kNaN),
          offset(p.offset), tol(t)
    {
        for (int j = 0; j < p.cols(); ++j)
            col_cnt[static_cast<std::size_t>(j)] = p.a.start[static_cast<std::size_t>(j) + 1] - p.a.start[static_cast<std::size_t>(j)];
        for (int i = 0; i < p.rows(); ++i)
            row_cnt[static_cast<std::size_t>(i)] = rows.start[static_cast<std::size_t>(i) + 1] - rows.start[static_cast<std::size_t>(i)];
    }

    void drop_row(int i)
    {
        row_on[static_cast<std::size_t>(i)] = 0;
        for (int q = rows.start[static_cast<std::size_t>(i)]; q < rows.start[static_cast<std::size_t>(i) + 1]; ++q)
        {
            int j = rows.index[static_cast<std::size_t>(q)];
            if (col_on[static_cast<std::size_t>(j)])
                --col_cnt[static_cast<std::size_t>(j)];
        }
    }

    void fix_col(int j, double v)
    {
        auto u = static_cast<std::size_t>(j);
        col_on[u] = 0;
        removed[u] = v;
        offset += lp.cost[u] * v;
        for (int p = lp.a.start[u]; p < lp.a.start[u + 1]; ++p)
        {
            auto i = static_cast<std::size_t>(lp.a.index[static_cast<std::size_t>(p)]);
            if (!row_on[i])
                continue;
            double a = lp.a.value[static_cast<std::size_t>(p)];
            lo[i] -= a * v;
            up[i] -= a * v;
            --row_cnt[i];
        }
    }

    // Tightens column bounds; integer columns are rounded inward.
    void tighten(int j, double l, double u)
    {
        auto k = static_cast<std::size_t>(j);
        if (lp.integer[k])
        {
            if (std::isfinite(l))
                l = std::ceil(l - 1e-9);
            if (std::isfinite(u))
                u = std::floor(u + 1e-9);
        }
        lb[k] = std::max(lb[k], l);
        ub[k] = std::min(ub[k], u);
    }
};

} // namespace

std::vector<double> Presolved::postsolve(const std::vector<double>& reduced_x) const
{
    std::vector<double> x = removed_value;
    for (std::size_t k = 0; k < col_map.size(); ++k)
        x[static_cast<std::size_t>(col_map[k])] = reduced_x[k];
    return x;
}

Presolved presolve(const LpProblem& lp, double tol)
{
    Work w(lp, tol);
    Presolved out;
    int n = lp.cols(), m = lp.rows();
    bool changed = true;
    while (changed)
    {
        changed = false;
        for (int i = 0; i < m; ++i)
        {
            auto u = static_cast<std::size_t>(i);
            if (!w.row_on[u] || w.row_cnt[u] > 1)
                continue;
            if (w.row_cnt[u] == 0)
            {
                if (w.lo[u] > tol || w.up[u] < -tol)
                {
                    out.outcome = Presolved::Outcome::Infeasible;
                    return out;
                }
                w.row_on[u] = 0;
                changed = true;
                continue;
            }
            int j = -1;
            double a = 0.0;
            for (int q = w.rows.start[u]; q < w.rows.start[u + 1]; ++q)
                if (w.col_on[static_cast<std::size_t>(w.rows.index[static_cast<std::size_t>(q)])])
                {
                    j = w.rows.index[static_cast<std::size_t>(q)];
                    a = w.rows.value[static_cast<std::size_t>(q)];
                }
            if (a > 0.0)
                w.tighten(j, w.lo[u] / a, w.up[u] / a);
            else
                w.tighten(j, w.up[u] / a, w.lo[u] / a);
            w.drop_row(i);
            changed = true;
        }

        for (int j = 0; j < n; ++j)
        {
            auto u = static_cast<std::size_t>(j);
            if (!w.col_on[u])
                continue;
            if (w.lb[u] > w.ub[u])
            {
                if (w.lb[u] > w.ub[u] + tol * std::max(1.0, std::abs(w.lb[u])))
                {
                    out.outcome = Presolved::Outcome::Infeasible;
                    return out;
                }
                w.ub[u] = w.lb[u];
            }
            if (w.lb[u] == w.ub[u])
            {
                w.fix_col(j, w.lb[u]);
                changed = true;
                continue;
            }
            if (w.col_cnt[u] == 0)
            {
                double c = lp.cost[u];
                double v;
                if (c > 0.0)
                    v = w.lb[u];
                else if (c < 0.0)
                    v = w.ub[u];
                else
                    v = std::isfinite(w.lb[u]) ? w.lb[u] : std::isfinite(w.ub[u]) ? w.ub[u] : 0.0;
                if (!std::isfinite(v))
                {
                    out.outcome = Presolved::Outcome::Unbounded;
                    return out;
                }
                w.fix_col(j, v);
                changed = true;
            }
        }
    }

    std::vector<int> new_col(static_cast<std::size_t>(n), -1), new_row(static_cast<std::size_t>(m), -1);
    for (int j = 0; j < n; ++j)
        if (w.col_on[static_cast<std::size_t>(j)])
        {
            new_col[static_cast<std::size_t>(j)] = static_cast<int>(out.col_map.size());
            out.col_map.push_back(j);
        }
    for (int i = 0; i < m; ++i)
        if (w.row_on[static_cast<std::size_t>(i)])
        {
            new_row[static_cast<std::size_t>(i)] = static_cast<int>(out.row_map.size());
            out.row_map.push_back(i);
        }
    auto& r = out.reduced;
    r.a.rows = static_cast<int>(out.row_map.size());
    r.a.cols = static_cast<int>(out.col_map.size());
    r.a.start.push_back(0);
    for (int j : out.col_map)
    {
        auto u = static_cast<std::size_t>(j);
        for (int p = lp.a.start[u]; p < lp.a.start[u + 1]; ++p)
        {
            int ni = new_row[static_cast<std::size_t>(lp.a.index[static_cast<std::size_t>(p)])];
            if (ni < 0)
                continue;
            r.a.index.push_back(ni);
            r.a.value.push_back(lp.a.value[static_cast<std::size_t>(p)]);
        }
        r.a.start.push_back(static_cast<int>(r.a.index.size()));
        r.cost.push_back(lp.cost[u]);
        r.col_lower.push_back(w.lb[u]);
        r.col_upper.push_back(w.ub[u]);
        r.integer.push_back(lp.integer[u]);
    }
    for (int i : out.row_map)
    {
        r.row_lower.push_back(w.lo[static_cast<std::size_t>(i)]);
        r.row_upper.push_back(w.up[static_cast<std::size_t>(i)]);
    }
    r.offset = w.offset;
    out.removed_value = std::move(w.removed);
    return out;
}

Presolved no_presolve(const LpProblem& lp)
{
    Presolved out;
    out.reduced = lp;
    for (int j = 0; j < lp.cols(); ++j)
        out.col_map.push_back(j);
    for (int i = 0; i < lp.rows(); ++i)
        out.row_map.push_back(i);
    out.removed_value.assign(static_cast<std::size_t>(lp.cols()), kNaN);
    return out;
}

namespace
{
double pow2(double v) { return std::exp2(std::round(std::log2(v))); }
} // namespace

Scaling identity_scaling(const LpProblem& lp)
{
    return {std::vector<double>(static_cast<std::size_t>(lp.cols()), 1.0),
            std::vector<double>(static_cast<std::size_t>(lp.rows()), 1.0)};
}

Scaling compute_scaling(const LpProblem& lp, int passes)
{
    Scaling s = identity_scaling(lp);
    int n = lp.cols(), m = lp.rows();
    std::vector<double> rmin(static_cast<std::size_t>(m)), rmax(static_cast<std::size_t>(m));
    for (int pass = 0; pass < passes; ++pass)
    {
        std::fill(rmin.begin(), rmin.end(), kInf);
        std::fill(rmax.begin(), rmax.end(), 0.0);
        for (int j = 0; j < n; ++j)
            for (int p = lp.a.start[static_cast<std::size_t>(j)]; p < lp.a.start[static_cast<std::size_t>(j) + 1]; ++p)
            {
                auto i = static_cast<std::size_t>(lp.a.index[static_cast<std::size_t>(p)]);
                double v = std::abs(lp.a.value[static_cast<std::size_t>(p)]) * s.col[static_cast<std::size_t>(j)];
                rmin[i] = std::min(rmin[i], v);
                rmax[i] = std::max(rmax[i], v);
            }
        for (int i = 0; i < m; ++i)
            if (rmax[static_cast<std::size_t>(i)] > 0.0)
                s.row[static_cast<std::size_t>(i)] = pow2(1.0 / std::sqrt(rmin[static_cast<std::size_t>(i)] * rmax[static_cast<std::size_t>(i)]));
        for (int j = 0; j < n; ++j)
        {
            if (lp.integer[static_cast<std::size_t>(j)])
                continue;
            double cmin = kInf, cmax = 0.0;
            for (int p = lp.a.start[static_cast<std::size_t>(j)]; p < lp.a.start[static_cast<std::size_t>(j) + 1]; ++p)
            {
                double v = std::abs(lp.a.value[static_cast<std::size_t>(p)]) *
                           s.row[static_cast<std::size_t>(lp.a.index[static_cast<std::size_t>(p)])];
                cmin = std::min(cmin, v);
                cmax = std::max(cmax, v);
            }
            if (cmax > 0.0)
                s.col[static_cast<std::size_t>(j)] = pow2(1.0 / std::sqrt(cmin * cmax));
        }
    }
    return s;
}

LpProblem Scaling::apply(const LpProblem& lp) const
{
    LpProblem out = lp;
    for (int j = 0; j < lp.cols(); ++j)
    {
        auto u = static_cast<std::size_t>(j);
        double c = col[u];
        for (int p = lp.a.start[u]; p < lp.a.start[u + 1]; ++p)
            out.a.value[static_cast<std::size_t>(p)] *= c * row[static_cast<std::size_t>(lp.a.index[static_cast<std::size_t>(p)])];
        out.cost[u] *= c;
        out.col_lower[u] /= c;
        out.col_upper[u] /= c;
    }
    for (int i = 0; i < lp.rows(); ++i)
    {
        auto u = static_cast<std::size_t>(i);
        out.row_lower[u] *= row[u];
        out.row_upper[u] *= row[u];
    }
    return out;
}

} // namespace hubopt::solver
