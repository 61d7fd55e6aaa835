#include "hubopt/solver/simplex.hpp"

#include "hubopt/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hubopt::solver
{

using namespace kernels;

namespace
{

constexpr double kShiftLimit = 1e-7;

double unit_draw(std::uint64_t j)
{
    // splitmix64; gives the same perturbation for a column on every run.
    std::uint64_t z = j + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

struct Candidate
{
    int j;
    double abs_alpha;
    double slack;
    double ratio;
};

} // namespace

Simplex::Simplex(const LpProblem& lp, SimplexOptions options)
    : lp_(lp), opt_(options), at_(lp.a.transposed()), n_(lp.cols()), m_(lp.rows())
{
    auto total = static_cast<std::size_t>(n_ + m_);
    lb_.resize(total);
    ub_.resize(total);
    for (int j = 0; j < n_; ++j)
    {
        lb_[static_cast<std::size_t>(j)] = lp.col_lower[static_cast<std::size_t>(j)];
        ub_[static_cast<std::size_t>(j)] = lp.col_upper[static_cast<std::size_t>(j)];
    }
    for (int i = 0; i < m_; ++i)
    {
        lb_[static_cast<std::size_t>(n_ + i)] = lp.row_lower[static_cast<std::size_t>(i)];
        ub_[static_cast<std::size_t>(n_ + i)] = lp.row_upper[static_cast<std::size_t>(i)];
    }
    real_lb_ = lb_;
    real_ub_ = ub_;
    artificial_.assign(total, 0);
    cost_.assign(total, 0.0);
    std::copy(lp.cost.begin(), lp.cost.end(), cost_.begin());
    wcost_ = cost_;
    x_.assign(total, 0.0);
    d_.assign(total, 0.0);
    state_.assign(total, kAtLower);
    is_basic_.assign(total, 0);
    logical_index_.resize(static_cast<std::size_t>(m_));
    std::iota(logical_index_.begin(), logical_index_.end(), 0);
    alpha_.assign(total, 0.0);
    alpha_mark_.assign(total, 0);
    slack_basis();
}

SparseColumn Simplex::column(int j) const
{
    if (j < n_)
    {
        int s = lp_.a.start[static_cast<std::size_t>(j)];
        return {lp_.a.index.data() + s, lp_.a.value.data() + s, lp_.a.start[static_cast<std::size_t>(j) + 1] - s};
    }
    return {&logical_index_[static_cast<std::size_t>(j - n_)], &minus_one_, 1};
}

void Simplex::slack_basis()
{
    head_.resize(static_cast<std::size_t>(m_));
    for (int j = 0; j < n_; ++j)
    {
        state_[static_cast<std::size_t>(j)] = kAtLower;
        is_basic_[static_cast<std::size_t>(j)] = 0;
        place_nonbasic(j);
    }
    for (int i = 0; i < m_; ++i)
    {
        head_[static_cast<std::size_t>(i)] = n_ + i;
        state_[static_cast<std::size_t>(n_ + i)] = kBasic;
        is_basic_[static_cast<std::size_t>(n_ + i)] = 1;
    }
    weight_.assign(static_cast<std::size_t>(m_), 1.0);
    factor_valid_ = false;
}

void Simplex::place_nonbasic(int j)
{
    auto u = static_cast<std::size_t>(j);
    double lo = lb_[u], up = ub_[u];
    bool lf = std::isfinite(lo), uf = std::isfinite(up);
    auto& s = state_[u];
    if (lf && uf && lo == up)
        s = kFixed;
    else if (s == kAtUpper && uf)
        s = kAtUpper;
    else if (s == kFree && !lf && !uf)
        s = kFree;
    else if (lf)
        s = kAtLower;
    else if (uf)
        s = kAtUpper;
    else
        s = kFree;
    x_[u] = (s == kAtLower || s == kFixed) ? lo : s == kAtUpper ? up : 0.0;
}

void Simplex::set_bounds(int j, double lower, double upper)
{
    auto u = static_cast<std::size_t>(j);
    real_lb_[u] = lb_[u] = lower;
    real_ub_[u] = ub_[u] = upper;
    artificial_[u] = 0;
    if (!is_basic_[u])
        place_nonbasic(j);
}

void Simplex::set_basis(const Basis& basis)
{
    auto total = static_cast<std::size_t>(n_ + m_);
    if (basis.status.size() != total ||
        std::count(basis.status.begin(), basis.status.end(), kBasic) != m_)
    {
        slack_basis();
        return;
    }
    state_ = basis.status;
    head_.clear();
    for (int j = 0; j < n_ + m_; ++j)
    {
        bool b = state_[static_cast<std::size_t>(j)] == kBasic;
        is_basic_[static_cast<std::size_t>(j)] = b ? 1 : 0;
        if (b)
            head_.push_back(j);
        else
            place_nonbasic(j);
    }
    weight_.assign(static_cast<std::size_t>(m_), 1.0);
    factor_valid_ = false;
}

Basis Simplex::basis() const { return Basis{state_}; }

void Simplex::refactor()
{
    std::vector<int> rows;
    auto singular = factor_.factorize(
        m_, [&](int k) { return column(head_[static_cast<std::size_t>(k)]); }, rows);
    for (std::size_t i = 0; i < singular.size(); ++i)
    {
        auto k = static_cast<std::size_t>(singular[i]);
        int out = head_[k];
        int in = n_ + rows[i];
        state_[static_cast<std::size_t>(out)] = kAtLower;
        is_basic_[static_cast<std::size_t>(out)] = 0;
        place_nonbasic(out);
        state_[static_cast<std::size_t>(in)] = kBasic;
        is_basic_[static_cast<std::size_t>(in)] = 1;
        head_[k] = in;
        weight_[k] = 1.0;
    }
    factor_valid_ = true;
}

void Simplex::compute_primal()
{
    std::vector<double> r(static_cast<std::size_t>(m_), 0.0);
    for (int j = 0; j < n_ + m_; ++j)
    {
        double v = x_[static_cast<std::size_t>(j)];
        if (is_basic_[static_cast<std::size_t>(j)] || v == 0.0)
            continue;
        auto c = column(j);
        for (int p = 0; p < c.size; ++p)
            r[static_cast<std::size_t>(c.index[p])] -= c.value[p] * v;
    }
    factor_.ftran(r);
    for (int k = 0; k < m_; ++k)
        x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(k)])] = r[static_cast<std::size_t>(k)];
}

void Simplex::compute_duals()
{
    std::vector<double> y(static_cast<std::size_t>(m_));
    for (int k = 0; k < m_; ++k)
        y[static_cast<std::size_t>(k)] = wcost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(k)])];
    factor_.btran(y);
    std::vector<double> prod(static_cast<std::size_t>(n_), 0.0);
    column_products(lp_.a, y.data(), is_basic_.data(), prod.data());
    for (int j = 0; j < n_; ++j)
    {
        auto u = static_cast<std::size_t>(j);
        d_[u] = is_basic_[u] ? 0.0 : wcost_[u] - prod[u];
    }
    for (int i = 0; i < m_; ++i)
    {
        auto u = static_cast<std::size_t>(n_ + i);
        d_[u] = is_basic_[u] ? 0.0 : wcost_[u] + y[static_cast<std::size_t>(i)];
    }
}

bool Simplex::make_dual_feasible()
{
    bool moved = false;
    double big = opt_.artificial_bound;
    for (int j = 0; j < n_ + m_; ++j)
    {
        auto u = static_cast<std::size_t>(j);
        if (is_basic_[u] || state_[u] == kFixed)
            continue;
        double dj = d_[u];
        auto s = state_[u];
        bool wrong = (s == kAtLower && dj < -opt_.dual_tol) || (s == kAtUpper && dj > opt_.dual_tol) ||
                     (s == kFree && std::abs(dj) > opt_.dual_tol);
        if (!wrong)
            continue;
        if (std::abs(dj) <= kShiftLimit && s != kFree)
        {
            wcost_[u] -= dj;
            d_[u] = 0.0;
            perturbed_ = true;
            continue;
        }
        if (dj < 0.0)
        {
            if (!std::isfinite(ub_[u]))
            {
                ub_[u] = std::max(lb_[u], 0.0) + big;
                artificial_[u] = 1;
            }
            state_[u] = kAtUpper;
        }
        else
        {
            if (!std::isfinite(lb_[u]))
            {
                lb_[u] = std::min(ub_[u], 0.0) - big;
                artificial_[u] = 1;
            }
            state_[u] = kAtLower;
        }
        place_nonbasic(j);
        moved = true;
    }
    return moved;
}

void Simplex::perturb_costs()
{
    for (int j = 0; j < n_; ++j)
    {
        auto u = static_cast<std::size_t>(j);
        bool lf = std::isfinite(real_lb_[u]), uf = std::isfinite(real_ub_[u]);
        if (lf && uf && real_lb_[u] == real_ub_[u])
            continue;
        double xi = 5e-7 * (1.0 + std::abs(cost_[u])) * (0.5 + 0.5 * unit_draw(static_cast<std::uint64_t>(j)));
        double dir = 0.0;
        if (is_basic_[u])
            dir = lf ? 1.0 : uf ? -1.0 : 0.0;
        else if (state_[u] == kAtLower)
            dir = 1.0;
        else if (state_[u] == kAtUpper)
            dir = -1.0;
        wcost_[u] += dir * xi;
    }
    perturbed_ = true;
}

void Simplex::remove_artificial(int j)
{
    auto u = static_cast<std::size_t>(j);
    if (!artificial_[u])
        return;
    lb_[u] = real_lb_[u];
    ub_[u] = real_ub_[u];
    artificial_[u] = 0;
}

bool Simplex::limits_hit()
{
    if (iterations_ >= opt_.iteration_limit)
        return true;
    if (deadline_ && (iterations_ & 31) == 0 && Clock::now() > *deadline_)
    {
        time_out_ = true;
        return true;
    }
    return false;
}

double Simplex::primal_infeasibility(int k) const
{
    auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(k)]);
    double v = x_[j];
    if (v < lb_[j] - opt_.primal_tol)
        return lb_[j] - v;
    if (v > ub_[j] + opt_.primal_tol)
        return v - ub_[j];
    return 0.0;
}

void Simplex::pivot_row(const std::vector<double>& rho)
{
    int nnz = 0;
    for (double v : rho)
        nnz += v != 0.0;
    alpha_nz_.clear();
    if (nnz * 10 < m_)
    {
        alpha_dense_ = false;
        for (int i = 0; i < m_; ++i)
        {
            double ri = rho[static_cast<std::size_t>(i)];
            if (ri == 0.0)
                continue;
            for (int q = at_.start[static_cast<std::size_t>(i)]; q < at_.start[static_cast<std::size_t>(i) + 1]; ++q)
            {
                auto j = static_cast<std::size_t>(at_.index[static_cast<std::size_t>(q)]);
                if (is_basic_[j])
                    continue;
                if (!alpha_mark_[j])
                {
                    alpha_mark_[j] = 1;
                    alpha_nz_.push_back(static_cast<int>(j));
                }
                alpha_[j] += ri * at_.value[static_cast<std::size_t>(q)];
            }
            auto l = static_cast<std::size_t>(n_ + i);
            if (!is_basic_[l])
            {
                alpha_mark_[l] = 1;
                alpha_nz_.push_back(n_ + i);
                alpha_[l] = -ri;
            }
        }
        return;
    }
    alpha_dense_ = true;
    column_products(lp_.a, rho.data(), is_basic_.data(), alpha_.data());
    for (int i = 0; i < m_; ++i)
        if (!is_basic_[static_cast<std::size_t>(n_ + i)])
            alpha_[static_cast<std::size_t>(n_ + i)] = -rho[static_cast<std::size_t>(i)];
    for (int j = 0; j < n_ + m_; ++j)
        if (!is_basic_[static_cast<std::size_t>(j)] && alpha_[static_cast<std::size_t>(j)] != 0.0)
            alpha_nz_.push_back(j);
}

void Simplex::clear_pivot_row()
{
    if (alpha_dense_)
        std::fill(alpha_.begin(), alpha_.end(), 0.0);
    else
        for (int j : alpha_nz_)
        {
            alpha_[static_cast<std::size_t>(j)] = 0.0;
            alpha_mark_[static_cast<std::size_t>(j)] = 0;
        }
    alpha_nz_.clear();
    alpha_dense_ = false;
}

void Simplex::apply_flips(const std::vector<int>& flips)
{
    if (flips.empty())
        return;
    std::vector<double> r(static_cast<std::size_t>(m_), 0.0);
    for (int j : flips)
    {
        auto u = static_cast<std::size_t>(j);
        double old = x_[u];
        state_[u] = state_[u] == kAtLower ? kAtUpper : kAtLower;
        x_[u] = state_[u] == kAtLower ? lb_[u] : ub_[u];
        double delta = x_[u] - old;
        auto c = column(j);
        for (int p = 0; p < c.size; ++p)
            r[static_cast<std::size_t>(c.index[p])] += c.value[p] * delta;
    }
    factor_.ftran(r);
    for (int k = 0; k < m_; ++k)
        x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(k)])] -= r[static_cast<std::size_t>(k)];
}

double Simplex::current_objective(const std::vector<double>& costs) const
{
    double z = lp_.offset;
    for (int j = 0; j < n_; ++j)
        z += costs[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
    return z;
}

double Simplex::lagrangian_bound()
{
    std::vector<double> y(static_cast<std::size_t>(m_));
    for (int k = 0; k < m_; ++k)
        y[static_cast<std::size_t>(k)] = cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(k)])];
    factor_.btran(y);
    std::vector<double> prod(static_cast<std::size_t>(n_), 0.0);
    column_products(lp_.a, y.data(), is_basic_.data(), prod.data());
    double bound = lp_.offset;
    auto add = [&](std::size_t u, double dj) {
        if (std::abs(dj) <= opt_.dual_tol)
            return;
        double b = dj > 0.0 ? real_lb_[u] : real_ub_[u];
        bound += std::isfinite(b) ? dj * b : -kInf;
    };
    for (int j = 0; j < n_; ++j)
        if (!is_basic_[static_cast<std::size_t>(j)])
            add(static_cast<std::size_t>(j), cost_[static_cast<std::size_t>(j)] - prod[static_cast<std::size_t>(j)]);
    for (int i = 0; i < m_; ++i)
        if (!is_basic_[static_cast<std::size_t>(n_ + i)])
            add(static_cast<std::size_t>(n_ + i), y[static_cast<std::size_t>(i)]);
    return bound;
}

Simplex::Phase Simplex::dual_loop(double cutoff)
{
    auto um = static_cast<std::size_t>(m_);
    std::vector<double> infeas(um), rho(um), col(um), tau(um);
    std::vector<Candidate> cands;
    std::vector<int> flips;
    int retries = 0;
    int troubles = 0;
    for (;;)
    {
        if (limits_hit())
            return Phase::Limit;
        if (factor_.updates() >= opt_.refactor_interval)
        {
            refactor();
            compute_primal();
            compute_duals();
            if (make_dual_feasible())
                compute_primal();
        }
        for (int k = 0; k < m_; ++k)
            infeas[static_cast<std::size_t>(k)] = primal_infeasibility(k);
        ArgMax best = chuzr(infeas.data(), weight_.data(), m_);
        if (best.index < 0)
            return Phase::Done;

        if (cutoff < kInf && iterations_ % 20 == 0 && current_objective(wcost_) > cutoff &&
            lagrangian_bound() > cutoff)
            return Phase::Cutoff;

        int r = best.index;
        int p = head_[static_cast<std::size_t>(r)];
        auto up = static_cast<std::size_t>(p);
        bool to_lower = x_[up] < lb_[up];
        double s = to_lower ? 1.0 : -1.0;
        double delta = to_lower ? lb_[up] - x_[up] : x_[up] - ub_[up];

        std::fill(rho.begin(), rho.end(), 0.0);
        rho[static_cast<std::size_t>(r)] = 1.0;
        factor_.btran(rho);
        double rho_norm = 0.0;
        for (double v : rho)
            rho_norm += v * v;
        pivot_row(rho);

        cands.clear();
        for (int j : alpha_nz_)
        {
            auto u = static_cast<std::size_t>(j);
            auto st = state_[u];
            if (st == kFixed || is_basic_[u])
                continue;
            double a = s * alpha_[u];
            if (std::abs(a) <= opt_.pivot_tol)
                continue;
            double slack;
            if (st == kAtLower)
            {
                if (a >= 0.0)
                    continue;
                slack = d_[u];
            }
            else if (st == kAtUpper)
            {
                if (a <= 0.0)
                    continue;
                slack = -d_[u];
            }
            else
                slack = std::abs(d_[u]);
            slack = std::max(slack, 0.0);
            cands.push_back({j, std::abs(a), slack, slack / std::abs(a)});
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            return a.ratio != b.ratio ? a.ratio < b.ratio : a.j < b.j;
        });

        // Bound-flipping ratio test with a Harris tolerance inside each group.
        flips.clear();
        int chosen = -1;
        double slope = delta;
        std::size_t idx = 0;
        while (idx < cands.size())
        {
            double harris = kInf;
            std::size_t end = idx;
            while (end < cands.size() && cands[end].ratio <= harris)
            {
                harris = std::min(harris, (cands[end].slack + opt_.dual_tol) / cands[end].abs_alpha);
                ++end;
            }
            double total = 0.0;
            bool boxed = true;
            for (std::size_t g = idx; g < end; ++g)
            {
                auto u = static_cast<std::size_t>(cands[g].j);
                double range = ub_[u] - lb_[u];
                if (!std::isfinite(range))
                {
                    boxed = false;
                    break;
                }
                total += cands[g].abs_alpha * range;
            }
            // The last group always supplies the entering column, so a
            // rounding-level leftover slope cannot flip every candidate.
            if (boxed && end < cands.size() && slope - total > 0.0)
            {
                for (std::size_t g = idx; g < end; ++g)
                    flips.push_back(cands[g].j);
                slope -= total;
                idx = end;
                continue;
            }
            std::size_t pick = idx;
            for (std::size_t g = idx + 1; g < end; ++g)
                if (cands[g].abs_alpha > cands[pick].abs_alpha)
                    pick = g;
            chosen = static_cast<int>(pick);
            break;
        }

        if (chosen < 0)
        {
            clear_pivot_row();
            if (factor_.updates() > 0 && retries < 2)
            {
                ++retries;
                refactor();
                compute_primal();
                compute_duals();
                if (make_dual_feasible())
                    compute_primal();
                continue;
            }
            return Phase::Infeasible;
        }
        retries = 0;

        const Candidate& qc = cands[static_cast<std::size_t>(chosen)];
        int q = qc.j;
        auto uq = static_cast<std::size_t>(q);
        double t = qc.slack / qc.abs_alpha;

        std::fill(col.begin(), col.end(), 0.0);
        {
            auto c = column(q);
            for (int k = 0; k < c.size; ++k)
                col[static_cast<std::size_t>(c.index[k])] = c.value[k];
        }
        factor_.ftran(col);
        double alpha_r = col[static_cast<std::size_t>(r)];
        if (std::abs(alpha_r - alpha_[uq]) > 1e-7 * std::max(1.0, std::abs(alpha_r)) ||
            std::abs(alpha_r) <= opt_.pivot_tol)
        {
            clear_pivot_row();
            if (++troubles > 50)
                throw Error(ErrorCode::NumericalBreakdown, "dual simplex: pivot row and column disagree after repeated refactorisation");
            refactor();
            compute_primal();
            compute_duals();
            if (make_dual_feasible())
                compute_primal();
            continue;
        }

        // Dual step; candidates overshot within the Harris tolerance get their cost shifted.
        double step = s * t;
        for (int j : alpha_nz_)
        {
            auto u = static_cast<std::size_t>(j);
            if (is_basic_[u])
                continue;
            d_[u] += step * alpha_[u];
        }
        d_[uq] = 0.0;
        for (std::size_t g = flips.size(); g < cands.size(); ++g)
        {
            const auto& cnd = cands[g];
            if (cnd.ratio > t + opt_.dual_tol / cnd.abs_alpha)
                break;
            auto u = static_cast<std::size_t>(cnd.j);
            auto st = state_[u];
            if ((st == kAtLower && d_[u] < 0.0) || (st == kAtUpper && d_[u] > 0.0))
            {
                wcost_[u] -= d_[u];
                d_[u] = 0.0;
                perturbed_ = true;
            }
        }

        apply_flips(flips);

        std::copy(rho.begin(), rho.end(), tau.begin());
        factor_.ftran(tau);

        double bound = to_lower ? lb_[up] : ub_[up];
        double theta = (x_[up] - bound) / alpha_r;
        for (int k = 0; k < m_; ++k)
        {
            double a = col[static_cast<std::size_t>(k)];
            if (a != 0.0)
                x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(k)])] -= theta * a;
        }
        x_[uq] += theta;
        x_[up] = bound;

        double wr = rho_norm;
        for (int k = 0; k < m_; ++k)
        {
            if (k == r)
                continue;
            double a = col[static_cast<std::size_t>(k)];
            if (a == 0.0)
                continue;
            double kappa = a / alpha_r;
            double w = weight_[static_cast<std::size_t>(k)] - 2.0 * kappa * tau[static_cast<std::size_t>(k)] +
                       kappa * kappa * wr;
            weight_[static_cast<std::size_t>(k)] = std::max(w, 1e-6);
        }
        weight_[static_cast<std::size_t>(r)] = std::max(wr / (alpha_r * alpha_r), 1e-6);

        head_[static_cast<std::size_t>(r)] = q;
        state_[uq] = kBasic;
        is_basic_[uq] = 1;
        d_[uq] = 0.0;
        remove_artificial(q);
        is_basic_[up] = 0;
        state_[up] = lb_[up] == ub_[up] ? kFixed : (to_lower ? kAtLower : kAtUpper);
        d_[up] = step;
        factor_.update(r, col);
        clear_pivot_row();
        ++iterations_;
    }
}

Simplex::Step Simplex::primal_step(int q, double dir, double range, std::int8_t end_state, double end_value)
{
    auto um = static_cast<std::size_t>(m_);
    auto& col = col_buf_;
    col.assign(um, 0.0);
    {
        auto c = column(q);
        for (int k = 0; k < c.size; ++k)
            col[static_cast<std::size_t>(c.index[k])] = c.value[k];
    }
    factor_.ftran(col);
    auto uq = static_cast<std::size_t>(q);

    double harris = kInf;
    for (int k = 0; k < m_; ++k)
    {
        double a = dir * col[static_cast<std::size_t>(k)];
        if (std::abs(a) <= opt_.pivot_tol)
            continue;
        auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(k)]);
        if (a > 0.0 && std::isfinite(lb_[j]))
            harris = std::min(harris, (x_[j] - lb_[j] + opt_.primal_tol) / a);
        else if (a < 0.0 && std::isfinite(ub_[j]))
            harris = std::min(harris, (ub_[j] - x_[j] + opt_.primal_tol) / -a);
    }
    if (!std::isfinite(harris) && !std::isfinite(range))
        return Step::Unbounded;
    if (std::isfinite(range) && range <= harris)
    {
        for (int k = 0; k < m_; ++k)
        {
            double a = col[static_cast<std::size_t>(k)];
            if (a != 0.0)
                x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(k)])] -= dir * range * a;
        }
        state_[uq] = end_state;
        x_[uq] = end_value;
        ++iterations_;
        return Step::Moved;
    }

    int r = -1;
    double best_alpha = 0.0;
    double theta = 0.0;
    for (int k = 0; k < m_; ++k)
    {
        double a = dir * col[static_cast<std::size_t>(k)];
        if (std::abs(a) <= opt_.pivot_tol)
            continue;
        auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(k)]);
        double ratio;
        if (a > 0.0 && std::isfinite(lb_[j]))
            ratio = (x_[j] - lb_[j]) / a;
        else if (a < 0.0 && std::isfinite(ub_[j]))
            ratio = (ub_[j] - x_[j]) / -a;
        else
            continue;
        if (ratio <= harris && std::abs(a) > best_alpha)
        {
            best_alpha = std::abs(a);
            r = k;
            theta = std::max(ratio, 0.0);
        }
    }
    if (r < 0)
        return Step::Trouble;

    auto& rho = rho_buf_;
    rho.assign(um, 0.0);
    rho[static_cast<std::size_t>(r)] = 1.0;
    factor_.btran(rho);
    pivot_row(rho);
    double alpha_rq = col[static_cast<std::size_t>(r)];
    if (std::abs(alpha_rq - alpha_[uq]) > 1e-7 * std::max(1.0, std::abs(alpha_rq)))
    {
        clear_pivot_row();
        return Step::Trouble;
    }

    int p = head_[static_cast<std::size_t>(r)];
    auto up = static_cast<std::size_t>(p);
    bool to_lower = dir * alpha_rq > 0.0;
    for (int k = 0; k < m_; ++k)
    {
        double a = col[static_cast<std::size_t>(k)];
        if (a != 0.0)
            x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(k)])] -= dir * theta * a;
    }
    x_[uq] += dir * theta;
    x_[up] = to_lower ? lb_[up] : ub_[up];

    double mult = d_[uq] / alpha_rq;
    for (int j : alpha_nz_)
    {
        auto u = static_cast<std::size_t>(j);
        if (!is_basic_[u])
            d_[u] -= mult * alpha_[u];
    }
    clear_pivot_row();

    head_[static_cast<std::size_t>(r)] = q;
    state_[uq] = kBasic;
    is_basic_[uq] = 1;
    d_[uq] = 0.0;
    remove_artificial(q);
    is_basic_[up] = 0;
    state_[up] = lb_[up] == ub_[up] ? kFixed : (to_lower ? kAtLower : kAtUpper);
    d_[up] = -mult;
    factor_.update(r, col);
    weight_[static_cast<std::size_t>(r)] = 1.0;
    ++iterations_;
    return theta < 1e-12 ? Step::Degenerate : Step::Pivoted;
}

Simplex::Phase Simplex::primal_loop()
{
    int degenerate = 0;
    int troubles = 0;
    int total = n_ + m_;
    for (;;)
    {
        if (limits_hit())
            return Phase::Limit;
        if (factor_.updates() >= opt_.refactor_interval)
        {
            refactor();
            compute_primal();
            compute_duals();
        }
        int q = -1;
        if (degenerate > 50)
        {
            for (int j = 0; j < total && q < 0; ++j)
            {
                auto u = static_cast<std::size_t>(j);
                double dj = d_[u];
                auto st = state_[u];
                if ((st == kAtLower && dj < -opt_.dual_tol) || (st == kAtUpper && dj > opt_.dual_tol) ||
                    (st == kFree && std::abs(dj) > opt_.dual_tol))
                    q = j;
            }
        }
        else
            q = price(d_.data(), state_.data(), total, opt_.dual_tol).index;
        if (q < 0)
            return Phase::Done;
        auto uq = static_cast<std::size_t>(q);
        double dir = d_[uq] < 0.0 ? 1.0 : -1.0;
        double range = ub_[uq] - lb_[uq];
        std::int8_t end_state = dir > 0.0 ? kAtUpper : kAtLower;
        Step st = primal_step(q, dir, range, end_state, dir > 0.0 ? ub_[uq] : lb_[uq]);
        if (st == Step::Unbounded || st == Step::Trouble)
        {
            if (factor_.updates() > 0 && troubles < 5)
            {
                ++troubles;
                refactor();
                compute_primal();
                compute_duals();
                continue;
            }
            if (st == Step::Trouble)
                throw Error(ErrorCode::NumericalBreakdown, "primal simplex: no admissible pivot above tolerance");
            return Phase::Unbounded;
        }
        degenerate = st == Step::Degenerate ? degenerate + 1 : 0;
    }
}

bool Simplex::release_artificial(int j)
{
    auto u = static_cast<std::size_t>(j);
    double dir = state_[u] == kAtUpper ? -1.0 : 1.0;
    remove_artificial(j);
    double target = 0.0;
    std::int8_t target_state = kFree;
    if (dir < 0.0 && std::isfinite(lb_[u]))
    {
        target = lb_[u];
        target_state = kAtLower;
    }
    else if (dir > 0.0 && std::isfinite(ub_[u]))
    {
        target = ub_[u];
        target_state = kAtUpper;
    }
    for (int attempt = 0; attempt < 2; ++attempt)
    {
        Step st = primal_step(j, dir, std::abs(x_[u] - target), target_state, target);
        if (st != Step::Trouble)
            return st != Step::Unbounded;
        refactor();
        compute_primal();
        compute_duals();
    }
    return false;
}

LpStatus Simplex::solve(std::optional<Clock::time_point> deadline, double cutoff)
{
    deadline_ = deadline;
    time_out_ = false;
    auto total = static_cast<std::size_t>(n_ + m_);
    for (std::size_t u = 0; u < total; ++u)
        if (artificial_[u])
        {
            remove_artificial(static_cast<int>(u));
            if (!is_basic_[u])
                place_nonbasic(static_cast<int>(u));
        }
    wcost_ = cost_;
    perturbed_ = false;
    refactor();
    compute_primal();
    compute_duals();

    auto limit_status = [&] { return time_out_ ? LpStatus::TimeLimit : LpStatus::IterationLimit; };
    bool perturb = opt_.perturb;
    for (int round = 0; round < 12; ++round)
    {
        if (make_dual_feasible())
            compute_primal();
        if (perturb)
        {
            perturb_costs();
            compute_duals();
            if (make_dual_feasible())
                compute_primal();
            perturb = false;
        }
        Phase ph = dual_loop(cutoff);
        if (ph == Phase::Limit)
            return limit_status();
        if (ph == Phase::Cutoff)
            return LpStatus::Cutoff;
        if (ph == Phase::Infeasible)
            return LpStatus::Infeasible;

        if (perturbed_)
        {
            wcost_ = cost_;
            perturbed_ = false;
            compute_duals();
        }
        bool dual_infeasible = false;
        for (std::size_t u = 0; u < total && !dual_infeasible; ++u)
        {
            if (is_basic_[u])
                continue;
            auto st = state_[u];
            dual_infeasible = (st == kAtLower && d_[u] < -opt_.dual_tol) || (st == kAtUpper && d_[u] > opt_.dual_tol) ||
                              (st == kFree && std::abs(d_[u]) > opt_.dual_tol);
        }
        if (dual_infeasible)
        {
            ph = primal_loop();
            if (ph == Phase::Limit)
                return limit_status();
            if (ph == Phase::Unbounded)
                return LpStatus::Unbounded;
            bool primal_ok = true;
            for (int k = 0; k < m_ && primal_ok; ++k)
                primal_ok = primal_infeasibility(k) == 0.0;
            if (!primal_ok)
                continue;
        }

        bool artificial_active = false;
        for (std::size_t u = 0; u < total; ++u)
        {
            if (!artificial_[u] || is_basic_[u])
                continue;
            bool at_upper = state_[u] == kAtUpper && !std::isfinite(real_ub_[u]);
            bool at_lower = state_[u] == kAtLower && !std::isfinite(real_lb_[u]);
            if (!at_upper && !at_lower)
            {
                remove_artificial(static_cast<int>(u));
                continue;
            }
            artificial_active = true;
            if (std::abs(d_[u]) <= opt_.dual_tol)
            {
                if (!release_artificial(static_cast<int>(u)))
                    return LpStatus::Unbounded;
                continue;
            }
            if (round >= 4)
                return LpStatus::Unbounded;
            if (at_upper)
            {
                double base = std::max(lb_[u], 0.0);
                ub_[u] = base + (ub_[u] - base) * 1e3;
            }
            else
            {
                double base = std::min(ub_[u], 0.0);
                lb_[u] = base - (base - lb_[u]) * 1e3;
            }
            place_nonbasic(static_cast<int>(u));
            compute_primal();
        }
        if (artificial_active)
            continue;
        // Confirm on a fresh factorisation; drift from long updates re-enters the loop.
        refactor();
        compute_primal();
        compute_duals();
        bool clean = true;
        for (int k = 0; k < m_ && clean; ++k)
            clean = primal_infeasibility(k) == 0.0;
        for (std::size_t u = 0; u < total && clean; ++u)
        {
            if (is_basic_[u])
                continue;
            auto st = state_[u];
            clean = !((st == kAtLower && d_[u] < -opt_.dual_tol) || (st == kAtUpper && d_[u] > opt_.dual_tol) ||
                      (st == kFree && std::abs(d_[u]) > opt_.dual_tol));
        }
        if (clean)
            return LpStatus::Optimal;
    }
    return LpStatus::IterationLimit;
}

std::vector<double> Simplex::primal() const
{
    return {x_.begin(), x_.begin() + n_};
}

double Simplex::objective() const { return current_objective(cost_); }

} // namespace hubopt::solver
