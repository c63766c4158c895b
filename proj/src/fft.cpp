#include "slicerx/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace slicerx {

namespace {

// Plan creation is not thread-safe in FFTW; execution on distinct arrays is.
// Plans are cached per (size, direction) and created with FFTW_ESTIMATE so the
// algorithm choice (and hence the exact rounding) is stable run to run.
std::mutex g_plan_mutex;

fftw_plan plan_for(std::size_t n, int sign) {
    static std::map<std::pair<std::size_t, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    fftw_complex* in = fftw_alloc_complex(n);
    fftw_complex* out = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    cache.emplace(key, p);
    return p;
}

std::vector<std::complex<double>> transform(const std::vector<std::complex<double>>& x, int sign) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("fft: empty input");
    fftw_plan p = plan_for(n, sign);
    fftw_complex* in = fftw_alloc_complex(n);
    fftw_complex* out = fftw_alloc_complex(n);
    std::memcpy(in, x.data(), n * sizeof(fftw_complex));
    fftw_execute_dft(p, in, out);
    std::vector<std::complex<double>> y(n);
    std::memcpy(y.data(), out, n * sizeof(fftw_complex));
    fftw_free(in);
    fftw_free(out);
    return y;
}

}  // namespace

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x) {
    return transform(x, FFTW_FORWARD);
}

std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x) {
    auto y = transform(x, FFTW_BACKWARD);
    const double inv = 1.0 / static_cast<double>(x.size());
    for (auto& v : y) v *= inv;
    return y;
}

double bin_frequency(std::size_t k, std::size_t n, double fs) {
    const auto half = (n + 1) / 2;  // first negative bin
    const double idx = k < half ? static_cast<double>(k)
                                : static_cast<double>(k) - static_cast<double>(n);
    return idx * fs / static_cast<double>(n);
}

}  // namespace slicerx
