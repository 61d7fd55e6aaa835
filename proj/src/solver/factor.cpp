#include "hubopt/solver/factor.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hubopt::solver
{

namespace
{
constexpr double kDropTol = 1e-14;
}

std::vector<int> BasisFactor::factorize(int m, const std::function<SparseColumn(int)>& column,
                                        std::vector<int>& replacement_rows, double pivot_threshold,
                                        double singular_tol)
{
    m_ = m;
    pivot_row_.clear();
    pivot_pos_.clear();
    u_diag_.clear();
    l_start_.assign(1, 0);
    l_index_.clear();
    l_value_.clear();
    u_start_.assign(1, 0);
    u_index_.clear();
    u_value_.clear();
    eta_pos_.clear();
    eta_start_.assign(1, 0);
    eta_index_.clear();
    eta_pivot_.clear();
    eta_value_.clear();
    replacement_rows.clear();

    auto um = static_cast<std::size_t>(m);
    std::vector<SparseColumn> cols(um);
    std::vector<int> row_count(um, 0);
    for (int k = 0; k < m; ++k)
    {
        cols[static_cast<std::size_t>(k)] = column(k);
        const auto& c = cols[static_cast<std::size_t>(k)];
        for (int p = 0; p < c.size; ++p)
            ++row_count[static_cast<std::size_t>(c.index[p])];
    }
    // Row-wise pattern: positions touching each row.
    std::vector<int> row_start(um + 1, 0);
    for (int i = 0; i < m; ++i)
        row_start[static_cast<std::size_t>(i) + 1] = row_start[static_cast<std::size_t>(i)] + row_count[static_cast<std::size_t>(i)];
    std::vector<int> row_pos(static_cast<std::size_t>(row_start.back()));
    {
        std::vector<int> next(row_start.begin(), row_start.end() - 1);
        for (int k = 0; k < m; ++k)
        {
            const auto& c = cols[static_cast<std::size_t>(k)];
            for (int p = 0; p < c.size; ++p)
                row_pos[static_cast<std::size_t>(next[static_cast<std::size_t>(c.index[p])]++)] = k;
        }
    }

    std::vector<int> active(um);
    std::set<std::pair<int, int>> queue;
    for (int k = 0; k < m; ++k)
    {
        active[static_cast<std::size_t>(k)] = cols[static_cast<std::size_t>(k)].size;
        queue.emplace(active[static_cast<std::size_t>(k)], k);
    }
    std::vector<char> done(um, 0);
    std::vector<int> step_of_row(um, -1);
    std::vector<double> x(um, 0.0);
    std::vector<int> mark(um, -1);
    std::vector<int> reach;
    std::vector<std::pair<int, int>> stack;
    std::vector<int> singular;

    int stamp = 0;
    while (!queue.empty())
    {
        int k = queue.begin()->second;
        queue.erase(queue.begin());
        done[static_cast<std::size_t>(k)] = 1;
        const auto& c = cols[static_cast<std::size_t>(k)];
        ++stamp;

        // Symbolic reach of the column through the current L, in post-order.
        reach.clear();
        for (int p = 0; p < c.size; ++p)
        {
            int root = c.index[p];
            if (mark[static_cast<std::size_t>(root)] == stamp)
                continue;
            mark[static_cast<std::size_t>(root)] = stamp;
            stack.emplace_back(root, 0);
            while (!stack.empty())
            {
                auto& [row, next] = stack.back();
                int s = step_of_row[static_cast<std::size_t>(row)];
                bool pushed = false;
                if (s >= 0)
                {
                    int end = l_start_[static_cast<std::size_t>(s) + 1];
                    for (int q = l_start_[static_cast<std::size_t>(s)] + next; q < end; ++q)
                    {
                        ++next;
                        int child = l_index_[static_cast<std::size_t>(q)];
                        if (mark[static_cast<std::size_t>(child)] != stamp)
                        {
                            mark[static_cast<std::size_t>(child)] = stamp;
                            stack.emplace_back(child, 0);
                            pushed = true;
                            break;
                        }
                    }
                }
                if (!pushed)
                {
                    reach.push_back(stack.back().first);
                    stack.pop_back();
                }
            }
        }

        for (int p = 0; p < c.size; ++p)
            x[static_cast<std::size_t>(c.index[p])] = c.value[p];
        for (auto it = reach.rbegin(); it != reach.rend(); ++it)
        {
            int s = step_of_row[static_cast<std::size_t>(*it)];
            if (s < 0)
                continue;
            double v = x[static_cast<std::size_t>(*it)];
            if (v == 0.0)
                continue;
            for (int q = l_start_[static_cast<std::size_t>(s)]; q < l_start_[static_cast<std::size_t>(s) + 1]; ++q)
                x[static_cast<std::size_t>(l_index_[static_cast<std::size_t>(q)])] -= l_value_[static_cast<std::size_t>(q)] * v;
        }

        double amax = 0.0;
        for (int r : reach)
            if (step_of_row[static_cast<std::size_t>(r)] < 0)
                amax = std::max(amax, std::abs(x[static_cast<std::size_t>(r)]));

        for (int p = 0; p < c.size; ++p)
            --row_count[static_cast<std::size_t>(c.index[p])];

        if (amax <= singular_tol)
        {
            singular.push_back(k);
            for (int r : reach)
                x[static_cast<std::size_t>(r)] = 0.0;
            continue;
        }

        int pivot = -1;
        for (int r : reach)
        {
            if (step_of_row[static_cast<std::size_t>(r)] >= 0)
                continue;
            double v = std::abs(x[static_cast<std::size_t>(r)]);
            if (v < pivot_threshold * amax)
                continue;
            if (pivot < 0)
            {
                pivot = r;
                continue;
            }
            int rc = row_count[static_cast<std::size_t>(r)];
            int pc = row_count[static_cast<std::size_t>(pivot)];
            double pv = std::abs(x[static_cast<std::size_t>(pivot)]);
            if (rc < pc || (rc == pc && (v > pv || (v == pv && r < pivot))))
                pivot = r;
        }

        int step = static_cast<int>(pivot_row_.size());
        double diag = x[static_cast<std::size_t>(pivot)];
        pivot_row_.push_back(pivot);
        pivot_pos_.push_back(k);
        u_diag_.push_back(diag);
        for (int r : reach)
        {
            double v = x[static_cast<std::size_t>(r)];
            x[static_cast<std::size_t>(r)] = 0.0;
            if (r == pivot || std::abs(v) <= kDropTol)
                continue;
            if (step_of_row[static_cast<std::size_t>(r)] >= 0)
            {
                u_index_.push_back(r);
                u_value_.push_back(v);
            }
            else
            {
                l_index_.push_back(r);
                l_value_.push_back(v / diag);
            }
        }
        l_start_.push_back(static_cast<int>(l_index_.size()));
        u_start_.push_back(static_cast<int>(u_index_.size()));
        step_of_row[static_cast<std::size_t>(pivot)] = step;

        for (int q = row_start[static_cast<std::size_t>(pivot)]; q < row_start[static_cast<std::size_t>(pivot) + 1]; ++q)
        {
            int other = row_pos[static_cast<std::size_t>(q)];
            if (done[static_cast<std::size_t>(other)])
                continue;
            auto& a = active[static_cast<std::size_t>(other)];
            queue.erase({a, other});
            --a;
            queue.emplace(a, other);
        }
    }

    // Dependent columns are replaced by -e_r for the rows left without a pivot.
    std::size_t next_singular = 0;
    for (int r = 0; r < m && next_singular < singular.size(); ++r)
    {
        if (step_of_row[static_cast<std::size_t>(r)] >= 0)
            continue;
        int k = singular[next_singular++];
        replacement_rows.push_back(r);
        step_of_row[static_cast<std::size_t>(r)] = static_cast<int>(pivot_row_.size());
        pivot_row_.push_back(r);
        pivot_pos_.push_back(k);
        u_diag_.push_back(-1.0);
        l_start_.push_back(static_cast<int>(l_index_.size()));
        u_start_.push_back(static_cast<int>(u_index_.size()));
    }
    work_.assign(um, 0.0);
    return singular;
}

void BasisFactor::ftran(std::vector<double>& x) const
{
    for (int s = 0; s < m_; ++s)
    {
        double v = x[static_cast<std::size_t>(pivot_row_[static_cast<std::size_t>(s)])];
        if (v == 0.0)
            continue;
        for (int q = l_start_[static_cast<std::size_t>(s)]; q < l_start_[static_cast<std::size_t>(s) + 1]; ++q)
            x[static_cast<std::size_t>(l_index_[static_cast<std::size_t>(q)])] -= l_value_[static_cast<std::size_t>(q)] * v;
    }
    auto& w = work_;
    for (int s = m_ - 1; s >= 0; --s)
    {
        int r = pivot_row_[static_cast<std::size_t>(s)];
        double v = x[static_cast<std::size_t>(r)];
        x[static_cast<std::size_t>(r)] = 0.0;
        if (v != 0.0)
        {
            v /= u_diag_[static_cast<std::size_t>(s)];
            for (int q = u_start_[static_cast<std::size_t>(s)]; q < u_start_[static_cast<std::size_t>(s) + 1]; ++q)
                x[static_cast<std::size_t>(u_index_[static_cast<std::size_t>(q)])] -= u_value_[static_cast<std::size_t>(q)] * v;
        }
        w[static_cast<std::size_t>(pivot_pos_[static_cast<std::size_t>(s)])] = v;
    }
    x.swap(w);
    for (std::size_t e = 0; e < eta_pos_.size(); ++e)
    {
        auto p = static_cast<std::size_t>(eta_pos_[e]);
        double v = x[p];
        if (v == 0.0)
            continue;
        v /= eta_pivot_[e];
        x[p] = v;
        for (int q = eta_start_[e]; q < eta_start_[e + 1]; ++q)
            x[static_cast<std::size_t>(eta_index_[static_cast<std::size_t>(q)])] -= eta_value_[static_cast<std::size_t>(q)] * v;
    }
}

void BasisFactor::btran(std::vector<double>& y) const
{
    for (std::size_t e = eta_pos_.size(); e-- > 0;)
    {
        auto p = static_cast<std::size_t>(eta_pos_[e]);
        double v = y[p];
        for (int q = eta_start_[e]; q < eta_start_[e + 1]; ++q)
            v -= eta_value_[static_cast<std::size_t>(q)] * y[static_cast<std::size_t>(eta_index_[static_cast<std::size_t>(q)])];
        y[p] = v / eta_pivot_[e];
    }
    auto& t = work_;
    for (int s = 0; s < m_; ++s)
    {
        double v = y[static_cast<std::size_t>(pivot_pos_[static_cast<std::size_t>(s)])];
        for (int q = u_start_[static_cast<std::size_t>(s)]; q < u_start_[static_cast<std::size_t>(s) + 1]; ++q)
            v -= u_value_[static_cast<std::size_t>(q)] * t[static_cast<std::size_t>(u_index_[static_cast<std::size_t>(q)])];
        t[static_cast<std::size_t>(pivot_row_[static_cast<std::size_t>(s)])] = v / u_diag_[static_cast<std::size_t>(s)];
    }
    for (int s = m_ - 1; s >= 0; --s)
    {
        auto r = static_cast<std::size_t>(pivot_row_[static_cast<std::size_t>(s)]);
        double v = t[r];
        for (int q = l_start_[static_cast<std::size_t>(s)]; q < l_start_[static_cast<std::size_t>(s) + 1]; ++q)
            v -= l_value_[static_cast<std::size_t>(q)] * t[static_cast<std::size_t>(l_index_[static_cast<std::size_t>(q)])];
        t[r] = v;
    }
    y.swap(t);
}

void BasisFactor::update(int p, const std::vector<double>& alpha)
{
    eta_pos_.push_back(p);
    eta_pivot_.push_back(alpha[static_cast<std::size_t>(p)]);
    for (int i = 0; i < m_; ++i)
    {
        double v = alpha[static_cast<std::size_t>(i)];
        if (i != p && std::abs(v) > kDropTol)
        {
            eta_index_.push_back(i);
            eta_value_.push_back(v);
        }
    }
    eta_start_.push_back(static_cast<int>(eta_index_.size()));
}

} // namespace hubopt::solver
