#pragma once

#include <cstddef>
#include <vector>

namespace silt {

/// Inverse DFT of a real, even spectrum sampled at t_j = 2 pi j / N.
///
/// Given F_j for j = 0..N/2, returns g[x] = (1/N) sum_j F_j e^{i t_j x} for
/// x = 0..N-1, read cyclically (g[N - x] is the value at -x). Plans are
/// created with FFTW_ESTIMATE so repeated runs give identical bits.
class EvenSpectrumInverter {
public:
    explicit EvenSpectrumInverter(std::size_t points);
    ~EvenSpectrumInverter();
    EvenSpectrumInverter(const EvenSpectrumInverter&) = delete;
    EvenSpectrumInverter& operator=(const EvenSpectrumInverter&) = delete;

    std::size_t points() const { return n_; }
    std::vector<double> invert(const std::vector<double>& half_spectrum);

private:
    std::size_t n_;
    void* plan_ = nullptr;
    double* real_ = nullptr;
    void* complex_ = nullptr;
};

}  // namespace silt
