#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>

namespace rzq::detail {

// Real <-> half-complex transforms of arbitrary length, unnormalized in both
// directions (FFTW conventions). Plans are created once per length under a
// mutex; execution uses the new-array interface on thread-local aligned scratch,
// which FFTW guarantees to be thread safe.
class Fft {
 public:
  static void forward(std::span<const double> in, std::span<std::complex<double>> out) {
    const std::size_t n = in.size();
    const Plans& p = plans(n);
    Scratch& s = scratch(n);
    std::copy(in.begin(), in.end(), s.real);
    fftw_execute_dft_r2c(p.r2c, s.real, s.cplx);
    auto* c = reinterpret_cast<std::complex<double>*>(s.cplx);
    std::copy(c, c + n / 2 + 1, out.begin());
  }

  static void backward(std::span<const std::complex<double>> in, std::span<double> out) {
    const std::size_t n = out.size();
    const Plans& p = plans(n);
    Scratch& s = scratch(n);
    auto* c = reinterpret_cast<std::complex<double>*>(s.cplx);
    std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(n / 2 + 1), c);
    fftw_execute_dft_c2r(p.c2r, s.cplx, s.real);
    std::copy(s.real, s.real + n, out.begin());
  }

 private:
  struct Plans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
  };

  struct Scratch {
    std::size_t n = 0;
    double* real = nullptr;
    fftw_complex* cplx = nullptr;

    void resize(std::size_t m) {
      if (m == n) return;
      release();
      real = fftw_alloc_real(m);
      cplx = fftw_alloc_complex(m / 2 + 1);
      n = m;
    }
    void release() {
      if (real) fftw_free(real);
      if (cplx) fftw_free(cplx);
      real = nullptr;
      cplx = nullptr;
      n = 0;
    }
    Scratch() = default;
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;
    ~Scratch() { release(); }
  };

  static std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
  }

  static const Plans& plans(std::size_t n) {
    static std::unordered_map<std::size_t, Plans> cache;
    std::lock_guard lock(plan_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    double* r = fftw_alloc_real(n);
    fftw_complex* c = fftw_alloc_complex(n / 2 + 1);
    Plans p;
    const int len = static_cast<int>(n);
    p.r2c = fftw_plan_dft_r2c_1d(len, r, c, FFTW_ESTIMATE);
    p.c2r = fftw_plan_dft_c2r_1d(len, c, r, FFTW_ESTIMATE);
    fftw_free(r);
    fftw_free(c);
    return cache.emplace(n, p).first->second;
  }

  // One buffer pair per thread per length in use; sweeps alternate between the
  // base grid and its 3/2-padded companion, so a tiny map is enough.
  static Scratch& scratch(std::size_t n) {
    thread_local std::unordered_map<std::size_t, std::unique_ptr<Scratch>> buffers;
    auto& slot = buffers[n];
    if (!slot) {
      slot = std::make_unique<Scratch>();
      slot->resize(n);
    }
    return *slot;
  }
};

}  // namespace rzq::detail
