#include "bbmlab/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bbmlab::kernels {

namespace {
int g_threads = 1;

// Fixed chunk count keeps the reduction tree independent of the thread
// count, so results are reproducible bit for bit.
constexpr std::size_t kChunks = 256;

inline std::size_t chunk_begin(std::size_t c, std::size_t n) {
  return c * n / kChunks;
}

template <class Body>
double chunked_reduce_serial(std::size_t n, Body body) {
  double partial[kChunks];
  for (std::size_t c = 0; c < kChunks; ++c)
    partial[c] = body(chunk_begin(c, n), chunk_begin(c + 1, n));
  double total = 0.0;
  for (std::size_t c = 0; c < kChunks; ++c) total += partial[c];
  return total;
}

template <class Body>
double chunked_reduce_omp(std::size_t n, Body body) {
  double partial[kChunks];
#pragma omp parallel for schedule(static) num_threads(g_threads)
  for (long c = 0; c < (long)kChunks; ++c)
    partial[c] = body(chunk_begin(c, n), chunk_begin(c + 1, n));
  double total = 0.0;
  for (std::size_t c = 0; c < kChunks; ++c) total += partial[c];
  return total;
}
}  // namespace

void set_threads(int n) {
  g_threads = std::max(1, n);
#ifdef _OPENMP
  if (g_threads > omp_get_max_threads()) g_threads = omp_get_max_threads();
#else
  g_threads = 1;
#endif
}

int threads() { return g_threads; }

namespace serial {

double sum(std::span<const double> x) {
  return chunked_reduce_serial(x.size(), [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += x[i];
    return s;
  });
}

double dot(std::span<const double> a, std::span<const double> b) {
  return chunked_reduce_serial(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    return s;
  });
}

double dot3(std::span<const double> a, std::span<const double> b,
            std::span<const double> w) {
  return chunked_reduce_serial(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i] * w[i];
    return s;
  });
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

void square(std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * in[i];
}

void mul(std::span<const double> a, std::span<const double> b,
         std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
}

void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
}

void stage3(std::span<const double> x, double a, std::span<const double> y,
            double b, std::span<const double> z, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = x[i] + a * y[i] + b * z[i];
}

}  // namespace serial

namespace omp {

double sum(std::span<const double> x) {
  return chunked_reduce_omp(x.size(), [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += x[i];
    return s;
  });
}

double dot(std::span<const double> a, std::span<const double> b) {
  return chunked_reduce_omp(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    return s;
  });
}

double dot3(std::span<const double> a, std::span<const double> b,
            std::span<const double> w) {
  return chunked_reduce_omp(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i] * w[i];
    return s;
  });
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
#pragma omp parallel for schedule(static) num_threads(g_threads) reduction(max : m)
  for (long i = 0; i < (long)x.size(); ++i) m = std::max(m, std::abs(x[i]));
  return m;
}

void square(std::span<const double> in, std::span<double> out) {
#pragma omp parallel for schedule(static) num_threads(g_threads)
  for (long i = 0; i < (long)in.size(); ++i) out[i] = in[i] * in[i];
}

void mul(std::span<const double> a, std::span<const double> b,
         std::span<double> out) {
#pragma omp parallel for schedule(static) num_threads(g_threads)
  for (long i = 0; i < (long)a.size(); ++i) out[i] = a[i] * b[i];
}

void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out) {
#pragma omp parallel for schedule(static) num_threads(g_threads)
  for (long i = 0; i < (long)x.size(); ++i) out[i] = a * x[i] + b * y[i];
}

void stage3(std::span<const double> x, double a, std::span<const double> y,
            double b, std::span<const double> z, std::span<double> out) {
#pragma omp parallel for schedule(static) num_threads(g_threads)
  for (long i = 0; i < (long)x.size(); ++i)
    out[i] = x[i] + a * y[i] + b * z[i];
}

}  // namespace omp

#define BBM_DISPATCH(call) \
  return g_threads > 1 ? omp::call : serial::call

double sum(std::span<const double> x) { BBM_DISPATCH(sum(x)); }
double dot(std::span<const double> a, std::span<const double> b) {
  BBM_DISPATCH(dot(a, b));
}
double dot3(std::span<const double> a, std::span<const double> b,
            std::span<const double> w) {
  BBM_DISPATCH(dot3(a, b, w));
}
double max_abs(std::span<const double> x) { BBM_DISPATCH(max_abs(x)); }
void square(std::span<const double> in, std::span<double> out) {
  if (g_threads > 1)
    omp::square(in, out);
  else
    serial::square(in, out);
}
void mul(std::span<const double> a, std::span<const double> b,
         std::span<double> out) {
  if (g_threads > 1)
    omp::mul(a, b, out);
  else
    serial::mul(a, b, out);
}
void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out) {
  if (g_threads > 1)
    omp::axpby(a, x, b, y, out);
  else
    serial::axpby(a, x, b, y, out);
}
void stage3(std::span<const double> x, double a, std::span<const double> y,
            double b, std::span<const double> z, std::span<double> out) {
  if (g_threads > 1)
    omp::stage3(x, a, y, b, z, out);
  else
    serial::stage3(x, a, y, b, z, out);
}

}  // namespace bbmlab::kernels
