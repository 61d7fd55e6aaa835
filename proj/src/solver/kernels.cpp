#include "hubopt/solver/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

namespace hubopt::solver::kernels
{

namespace
{

std::atomic<Backend> g_backend{Backend::Auto};

constexpr int kParallelThreshold = 20000;

bool use_omp(int n)
{
    switch (g_backend.load(std::memory_order_relaxed))
    {
    case Backend::Serial: return false;
    case Backend::OpenMP: return true;
    case Backend::Auto: break;
    }
    return n >= kParallelThreshold && omp_get_max_threads() > 1;
}

inline void consider(ArgMax& best, int i, double score)
{
    if (score > best.score || (score == best.score && best.index >= 0 && i < best.index))
    {
        best.index = i;
        best.score = score;
    }
}

inline double price_score(double d, std::int8_t state, double tol)
{
    switch (state)
    {
    case kAtLower: return d < -tol ? -d : 0.0;
    case kAtUpper: return d > tol ? d : 0.0;
    case kFree: return std::abs(d) > tol ? std::abs(d) : 0.0;
    default: return 0.0;
    }
}

// Per-thread partial results are merged in thread order, so the winner is the
// same as the serial scan: highest score, lowest index among equals.
template <typename Body>
ArgMax parallel_argmax(int n, Body body)
{
    int threads = omp_get_max_threads();
    std::vector<ArgMax> partial(static_cast<std::size_t>(threads));
#pragma omp parallel num_threads(threads)
    {
        ArgMax local;
        int tid = omp_get_thread_num();
#pragma omp for schedule(static)
        for (int i = 0; i < n; ++i)
        {
            double s = body(i);
            if (s > 0.0)
                consider(local, i, s);
        }
        partial[static_cast<std::size_t>(tid)] = local;
    }
    ArgMax best;
    for (const auto& p : partial)
        if (p.index >= 0)
        {
            if (best.index < 0 || p.score > best.score || (p.score == best.score && p.index < best.index))
                best = p;
        }
    return best;
}

} // namespace

void set_backend(Backend backend) { g_backend.store(backend, std::memory_order_relaxed); }
Backend backend() { return g_backend.load(std::memory_order_relaxed); }
int max_threads() { return omp_get_max_threads(); }

namespace serial
{

void column_products(const SparseMatrix& a, const double* y, const std::int8_t* skip, double* out)
{
    for (int j = 0; j < a.cols; ++j)
    {
        if (skip && skip[j])
            continue;
        double s = 0.0;
        for (int p = a.start[static_cast<std::size_t>(j)]; p < a.start[static_cast<std::size_t>(j) + 1]; ++p)
            s += a.value[static_cast<std::size_t>(p)] * y[a.index[static_cast<std::size_t>(p)]];
        out[j] = s;
    }
}

ArgMax price(const double* d, const std::int8_t* state, int n, double tol)
{
    ArgMax best;
    for (int j = 0; j < n; ++j)
    {
        double s = price_score(d[j], state[j], tol);
        if (s > 0.0 && (best.index < 0 || s > best.score))
        {
            best.index = j;
            best.score = s;
        }
    }
    return best;
}

ArgMax chuzr(const double* infeasibility, const double* weight, int m)
{
    ArgMax best;
    for (int i = 0; i < m; ++i)
    {
        double v = infeasibility[i];
        if (v <= 0.0)
            continue;
        double s = v * v / weight[i];
        if (best.index < 0 || s > best.score)
        {
            best.index = i;
            best.score = s;
        }
    }
    return best;
}

double row_violation(const SparseMatrix& at, const double* x, const double* lower, const double* upper)
{
    double worst = 0.0;
    for (int i = 0; i < at.cols; ++i)
    {
        double act = 0.0;
        for (int p = at.start[static_cast<std::size_t>(i)]; p < at.start[static_cast<std::size_t>(i) + 1]; ++p)
            act += at.value[static_cast<std::size_t>(p)] * x[at.index[static_cast<std::size_t>(p)]];
        worst = std::max({worst, lower[i] - act, act - upper[i]});
    }
    return worst;
}

void dual_update(double* d, const double* alpha, const std::int8_t* state, int n, double t)
{
    for (int j = 0; j < n; ++j)
        if (state[j] != kBasic)
            d[j] += t * alpha[j];
}

} // namespace serial

namespace omp
{

void column_products(const SparseMatrix& a, const double* y, const std::int8_t* skip, double* out)
{
#pragma omp parallel for schedule(static)
    for (int j = 0; j < a.cols; ++j)
    {
        if (skip && skip[j])
            continue;
        double s = 0.0;
        for (int p = a.start[static_cast<std::size_t>(j)]; p < a.start[static_cast<std::size_t>(j) + 1]; ++p)
            s += a.value[static_cast<std::size_t>(p)] * y[a.index[static_cast<std::size_t>(p)]];
        out[j] = s;
    }
}

ArgMax price(const double* d, const std::int8_t* state, int n, double tol)
{
    return parallel_argmax(n, [&](int j) { return price_score(d[j], state[j], tol); });
}

ArgMax chuzr(const double* infeasibility, const double* weight, int m)
{
    return parallel_argmax(m, [&](int i) {
        double v = infeasibility[i];
        return v > 0.0 ? v * v / weight[i] : 0.0;
    });
}

double row_violation(const SparseMatrix& at, const double* x, const double* lower, const double* upper)
{
    double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
    for (int i = 0; i < at.cols; ++i)
    {
        double act = 0.0;
        for (int p = at.start[static_cast<std::size_t>(i)]; p < at.start[static_cast<std::size_t>(i) + 1]; ++p)
            act += at.value[static_cast<std::size_t>(p)] * x[at.index[static_cast<std::size_t>(p)]];
        worst = std::max({worst, lower[i] - act, act - upper[i]});
    }
    return worst;
}

void dual_update(double* d, const double* alpha, const std::int8_t* state, int n, double t)
{
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j)
        if (state[j] != kBasic)
            d[j] += t * alpha[j];
}

} // namespace omp

void column_products(const SparseMatrix& a, const double* y, const std::int8_t* skip, double* out)
{
    use_omp(a.nnz()) ? omp::column_products(a, y, skip, out) : serial::column_products(a, y, skip, out);
}

ArgMax price(const double* d, const std::int8_t* state, int n, double tol)
{
    return use_omp(n) ? omp::price(d, state, n, tol) : serial::price(d, state, n, tol);
}

ArgMax chuzr(const double* infeasibility, const double* weight, int m)
{
    return use_omp(m) ? omp::chuzr(infeasibility, weight, m) : serial::chuzr(infeasibility, weight, m);
}

double row_violation(const SparseMatrix& at, const double* x, const double* lower, const double* upper)
{
    return use_omp(at.nnz()) ? omp::row_violation(at, x, lower, upper)
                             : serial::row_violation(at, x, lower, upper);
}

void dual_update(double* d, const double* alpha, const std::int8_t* state, int n, double t)
{
    use_omp(n) ? omp::dual_update(d, alpha, state, n, t) : serial::dual_update(d, alpha, state, n, t);
}

} // namespace hubopt::solver::kernels
