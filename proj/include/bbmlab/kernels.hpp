#pragma once

#include <cstddef>
#include <span>

// Data-parallel inner loops used by the evolver, the quadratures and the
// ansatz assembly.  Every kernel exists in two forms: a plain serial
// reference (kernels::serial) and an OpenMP version (kernels::omp).  The
// dispatching wrappers pick one at runtime from set_threads().
//
// Reductions are chunked with a fixed chunk count, so the summation order
// is identical for any thread count; omp and serial results match bit for
// bit.

namespace bbmlab::kernels {

void set_threads(int n);  // n <= 1 selects the serial path
int threads();

namespace serial {
double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double dot3(std::span<const double> a, std::span<const double> b,
            std::span<const double> w);
double max_abs(std::span<const double> x);
void square(std::span<const double> in, std::span<double> out);
void mul(std::span<const double> a, std::span<const double> b,
         std::span<double> out);
// out = a*x + b*y
void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out);
// out = x + a*y + b*z  (RK stage combination)
void stage3(std::span<const double> x, double a, std::span<const double> y,
            double b, std::span<const double> z, std::span<double> out);
}  // namespace serial

namespace omp {
double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double dot3(std::span<const double> a, std::span<const double> b,
            std::span<const double> w);
double max_abs(std::span<const double> x);
void square(std::span<const double> in, std::span<double> out);
void mul(std::span<const double> a, std::span<const double> b,
         std::span<double> out);
void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out);
void stage3(std::span<const double> x, double a, std::span<const double> y,
            double b, std::span<const double> z, std::span<double> out);
}  // namespace omp

double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double dot3(std::span<const double> a, std::span<const double> b,
            std::span<const double> w);
double max_abs(std::span<const double> x);
void square(std::span<const double> in, std::span<double> out);
void mul(std::span<const double> a, std::span<const double> b,
         std::span<double> out);
void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out);
void stage3(std::span<const double> x, double a, std::span<const double> y,
            double b, std::span<const double> z, std::span<double> out);

}  // namespace bbmlab::kernels
