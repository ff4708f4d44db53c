#include "anderson/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace anderson {

namespace {

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

// Plans are cached by (shape, sign); FFTW_UNALIGNED makes them valid for
// any array passed to fftw_execute_dft.
fftw_plan cached_plan(const std::vector<int>& dims, int sign, fftw_complex* proto) {
    static std::map<std::pair<std::vector<int>, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto key = std::make_pair(dims, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()),
                                   const_cast<int*>(dims.data()), proto, proto,
                                   sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw std::runtime_error("Fft::transform: fftw plan creation failed");
    cache.emplace(std::move(key), plan);
    return plan;
}

} // namespace

void Fft::transform(std::vector<std::complex<double>>& data,
                    const std::vector<std::int64_t>& shape, int sign) {
    std::int64_t total = 1;
    for (auto s : shape) total *= s;
    if (total != static_cast<std::int64_t>(data.size()))
        throw std::invalid_argument("Fft::transform: shape does not match data size");

    std::vector<int> dims(shape.begin(), shape.end());
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan = cached_plan(dims, sign, ptr);
    fftw_execute_dft(plan, ptr, ptr);
}

} // namespace anderson
