#include "silt/fourier.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace silt {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

EvenSpectrumInverter::EvenSpectrumInverter(std::size_t points) : n_(points) {
    if (points < 2 || points % 2 != 0) throw std::invalid_argument("EvenSpectrumInverter needs an even point count");
    std::lock_guard lock(planner_mutex());
    real_ = fftw_alloc_real(n_);
    auto* c = fftw_alloc_complex(n_ / 2 + 1);
    complex_ = c;
    plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), c, real_, FFTW_ESTIMATE);
    if (plan_ == nullptr) throw std::runtime_error("fftw planning failed");
}

EvenSpectrumInverter::~EvenSpectrumInverter() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    fftw_free(real_);
    fftw_free(complex_);
}

std::vector<double> EvenSpectrumInverter::invert(const std::vector<double>& half_spectrum) {
    if (half_spectrum.size() != n_ / 2 + 1) throw std::invalid_argument("spectrum length must be N/2 + 1");
    auto* c = static_cast<fftw_complex*>(complex_);
    for (std::size_t j = 0; j < half_spectrum.size(); ++j) {
        c[j][0] = half_spectrum[j];
        c[j][1] = 0.0;
    }
    fftw_execute(static_cast<fftw_plan>(plan_));
    std::vector<double> out(real_, real_ + n_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (double& v : out) v *= scale;
    return out;
}

}  // namespace silt
