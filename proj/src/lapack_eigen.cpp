#include "lapack_eigen.hpp"

#include <dlfcn.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <vector>

namespace fsar::detail {

namespace {

using Dgeev = void (*)(const char*, const char*, const int*, double*, const int*, double*, double*, double*,
                       const int*, double*, const int*, double*, const int*, int*);

Dgeev load() {
  const char* flag = std::getenv("FSAR_LAPACK");
  if (flag && std::strcmp(flag, "0") == 0) return nullptr;
  // OpenBLAS picks its kernels when it is loaded. Some releases mis-detect
  // newer Xeons and return wrong eigenvalues or never finish, so pin a
  // known-good AVX2 kernel unless the user chose one. If OpenBLAS is already
  // in the process with autodetected kernels we cannot fix that; stay out.
  if (!std::getenv("OPENBLAS_CORETYPE")) {
    if (dlopen("libopenblas.so.0", RTLD_NOW | RTLD_NOLOAD)) return nullptr;
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2")) setenv("OPENBLAS_CORETYPE", "Haswell", 0);
  }
  if (!std::getenv("OPENBLAS_NUM_THREADS")) setenv("OPENBLAS_NUM_THREADS", "1", 0);
  for (const char* name : {"liblapack.so.3", "libopenblas.so.0", "liblapack.so"}) {
    void* h = dlopen(name, RTLD_NOW | RTLD_LOCAL);
    if (!h) continue;
    if (void* f = dlsym(h, "dgeev_")) return reinterpret_cast<Dgeev>(f);
  }
  return nullptr;
}

Dgeev dgeev() {
  static std::once_flag once;
  static Dgeev fn = nullptr;
  std::call_once(once, [] { fn = load(); });
  return fn;
}

// sum lambda^k against tr(A^k) for k = 1..4
bool power_sums_match(const Matrix& a, const Eigen::VectorXcd& values) {
  const double n = static_cast<double>(a.rows());
  const Matrix a2 = a * a;
  const double tr[4] = {a.trace(), a2.trace(), (a2.array() * a.transpose().array()).sum(),
                        (a2.array() * a2.transpose().array()).sum()};
  std::complex<double> s[4] = {};
  for (Index i = 0; i < values.size(); ++i) {
    std::complex<double> z = values(i);
    for (int k = 0; k < 4; ++k) {
      s[k] += z;
      z *= values(i);
    }
  }
  const double scale = std::max(1.0, a.cwiseAbs().rowwise().sum().maxCoeff());
  for (int k = 0; k < 4; ++k) {
    const double tol = 1e-8 * n * std::pow(scale, k + 1);
    if (!(std::abs(s[k].real() - tr[k]) <= tol) || !(std::abs(s[k].imag()) <= tol)) return false;
  }
  return true;
}

}  // namespace

bool lapack_eigenvalues(Matrix& a, Eigen::VectorXcd& values) {
  const Dgeev fn = dgeev();
  if (!fn || a.rows() != a.cols() || a.rows() == 0) return false;
  const int n = static_cast<int>(a.rows());
  const Matrix copy = a;
  Vector wr(n), wi(n);
  const int one = 1;
  int lwork = -1, info = 0;
  double query = 0.0, dummy = 0.0;
  fn("N", "N", &n, a.data(), &n, wr.data(), wi.data(), &dummy, &one, &dummy, &one, &query, &lwork, &info);
  if (info != 0) return false;
  lwork = std::max(static_cast<int>(query), 4 * n);
  std::vector<double> work(static_cast<std::size_t>(lwork));
  fn("N", "N", &n, a.data(), &n, wr.data(), wi.data(), &dummy, &one, &dummy, &one, work.data(), &lwork, &info);
  if (info != 0) return false;
  values.resize(n);
  for (int i = 0; i < n; ++i) values(i) = {wr(i), wi(i)};
  return power_sums_match(copy, values);
}

}  // namespace fsar::detail
