// Serial reference against OpenMP variants of the simplex kernels on
// synthetic data shaped like the week-long bundled instances.

#include "hubopt/solver/kernels.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <random>

using namespace hubopt::solver;
namespace k = hubopt::solver::kernels;

namespace
{

struct Data
{
    SparseMatrix a, at;
    std::vector<double> y, d, alpha, infeas, weight, x, lower, upper, out;
    std::vector<std::int8_t> state;
};

const Data& data(int n)
{
    static std::map<int, Data> cache;
    auto [it, fresh] = cache.try_emplace(n);
    if (!fresh)
        return it->second;
    Data& g = it->second;
    int m = n;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> row(0, m - 1), st(0, 4);
    std::vector<int> ri, ci;
    std::vector<double> v;
    for (int j = 0; j < n; ++j)
        for (int e = 0; e < 3; ++e)
        {
            ri.push_back(row(rng));
            ci.push_back(j);
            v.push_back(u(rng));
        }
    g.a = csc_from_triplets(m, n, ri, ci, v);
    g.at = g.a.transposed();
    for (int i = 0; i < m; ++i)
    {
        g.y.push_back(u(rng));
        g.infeas.push_back(std::max(0.0, u(rng)));
        g.weight.push_back(1.0 + std::abs(u(rng)));
        g.lower.push_back(-0.3);
        g.upper.push_back(0.3);
    }
    for (int j = 0; j < n; ++j)
    {
        g.d.push_back(u(rng));
        g.alpha.push_back(u(rng));
        g.x.push_back(u(rng));
        g.state.push_back(static_cast<std::int8_t>(st(rng)));
    }
    g.out.resize(static_cast<std::size_t>(n));
    return g;
}

template <auto Fn>
void column_products(benchmark::State& s)
{
    auto& g = const_cast<Data&>(data(static_cast<int>(s.range(0))));
    for (auto _ : s)
    {
        Fn(g.a, g.y.data(), g.state.data(), g.out.data());
        benchmark::DoNotOptimize(g.out.data());
    }
}

template <auto Fn>
void price(benchmark::State& s)
{
    const auto& g = data(static_cast<int>(s.range(0)));
    for (auto _ : s)
        benchmark::DoNotOptimize(Fn(g.d.data(), g.state.data(), static_cast<int>(g.d.size()), 1e-9));
}

template <auto Fn>
void chuzr(benchmark::State& s)
{
    const auto& g = data(static_cast<int>(s.range(0)));
    for (auto _ : s)
        benchmark::DoNotOptimize(Fn(g.infeas.data(), g.weight.data(), static_cast<int>(g.infeas.size())));
}

template <auto Fn>
void row_violation(benchmark::State& s)
{
    const auto& g = data(static_cast<int>(s.range(0)));
    for (auto _ : s)
        benchmark::DoNotOptimize(Fn(g.at, g.x.data(), g.lower.data(), g.upper.data()));
}

template <auto Fn>
void dual_update(benchmark::State& s)
{
    auto& g = const_cast<Data&>(data(static_cast<int>(s.range(0))));
    for (auto _ : s)
    {
        Fn(g.d.data(), g.alpha.data(), g.state.data(), static_cast<int>(g.d.size()), 1e-12);
        benchmark::DoNotOptimize(g.d.data());
    }
}

} // namespace

#define HUBOPT_BENCH(name)                                                                                     \
    BENCHMARK(name<k::serial::name>)->Name(#name "/serial")->Arg(4096)->Arg(30000)->Arg(200000);               \
    BENCHMARK(name<k::omp::name>)->Name(#name "/omp")->Arg(4096)->Arg(30000)->Arg(200000)

HUBOPT_BENCH(column_products);
HUBOPT_BENCH(price);
HUBOPT_BENCH(chuzr);
HUBOPT_BENCH(row_violation);
HUBOPT_BENCH(dual_update);

BENCHMARK_MAIN();
