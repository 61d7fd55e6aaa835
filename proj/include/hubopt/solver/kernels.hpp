#pragma once

// Dense inner loops of the simplex method. Each kernel has a serial reference
// and an OpenMP variant that returns bit-identical results; argmax kernels
// break ties on the lowest index.

#include "hubopt/solver/lp.hpp"

#include <cstdint>

namespace hubopt::solver::kernels
{

enum class Backend
{
    Serial,
    OpenMP,
    /// OpenMP when more than one thread is available and the vector is long enough.
    Auto,
};

void set_backend(Backend backend);
Backend backend();

/// Nonbasic position codes used by the pricing kernels.
enum NonbasicState : std::int8_t
{
    kBasic = 0,
    kAtLower = 1,
    kAtUpper = 2,
    kFree = 3,
    kFixed = 4,
};

struct ArgMax
{
    int index = -1;
    double score = 0.0;
};

/// out[j] = y' a_j for columns with skip[j] == 0 (skip may be null).
using ColumnProductsFn = void (*)(const SparseMatrix& a, const double* y, const std::int8_t* skip, double* out);
/// Dantzig pricing: largest |d_j| among columns that can improve the objective by more than tol.
using PriceFn = ArgMax (*)(const double* d, const std::int8_t* state, int n, double tol);
/// Dual pricing: largest infeasibility^2 / weight among entries with infeasibility > 0.
using ChuzrFn = ArgMax (*)(const double* infeasibility, const double* weight, int m);
/// Largest row violation of x against [lower, upper]; `at` is the CSC form of A'.
using RowViolationFn = double (*)(const SparseMatrix& at, const double* x, const double* lower, const double* upper);
/// d[j] += t * alpha[j] for nonbasic columns (state != kBasic).
using DualUpdateFn = void (*)(double* d, const double* alpha, const std::int8_t* state, int n, double t);

namespace serial
{
void column_products(const SparseMatrix& a, const double* y, const std::int8_t* skip, double* out);
ArgMax price(const double* d, const std::int8_t* state, int n, double tol);
ArgMax chuzr(const double* infeasibility, const double* weight, int m);
double row_violation(const SparseMatrix& at, const double* x, const double* lower, const double* upper);
void dual_update(double* d, const double* alpha, const std::int8_t* state, int n, double t);
} // namespace serial

namespace omp
{
void column_products(const SparseMatrix& a, const double* y, const std::int8_t* skip, double* out);
ArgMax price(const double* d, const std::int8_t* state, int n, double tol);
ArgMax chuzr(const double* infeasibility, const double* weight, int m);
double row_violation(const SparseMatrix& at, const double* x, const double* lower, const double* upper);
void dual_update(double* d, const double* alpha, const std::int8_t* state, int n, double t);
} // namespace omp

// Dispatching entry points honouring backend().
void column_products(const SparseMatrix& a, const double* y, const std::int8_t* skip, double* out);
ArgMax price(const double* d, const std::int8_t* state, int n, double tol);
ArgMax chuzr(const double* infeasibility, const double* weight, int m);
double row_violation(const SparseMatrix& at, const double* x, const double* lower, const double* upper);
void dual_update(double* d, const double* alpha, const std::int8_t* state, int n, double t);

int max_threads();

} // namespace hubopt::solver::kernels
