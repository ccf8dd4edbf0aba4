#include "mkop/fft.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace mkop {

namespace {

std::mutex plan_mutex;

fftw_plan get_plan(int n, int sign) {
  static std::map<std::pair<int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_pair(n, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cplx> buf(n);
  fftw_plan p = fftw_plan_dft_1d(
      n, reinterpret_cast<fftw_complex*>(buf.data()),
      reinterpret_cast<fftw_complex*>(buf.data()), sign,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw std::runtime_error("fftw plan creation failed");
  cache.emplace(key, p);
  return p;
}

}  // namespace

void fft_inplace(cplx* data, int n, bool forward) {
  fftw_plan p = get_plan(n, forward ? FFTW_FORWARD : FFTW_BACKWARD);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                   reinterpret_cast<fftw_complex*>(data));
}

}  // namespace mkop
