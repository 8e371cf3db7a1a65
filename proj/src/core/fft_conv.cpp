#include "glkm/core/fft_conv.hpp"

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

namespace glkm::fft {

namespace {

// FFTW plan creation is not thread-safe; executions on caller-owned buffers
// are. Plans are cached per (h,w) and created with FFTW_UNALIGNED so they can
// run on std::vector storage via the new-array interface.
struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::mutex g_plan_mutex;
std::map<std::pair<int, int>, PlanPair> g_plans;

PlanPair get_plans(int h, int w) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto it = g_plans.find({h, w});
    if (it != g_plans.end()) return it->second;
    const int wc = w / 2 + 1;
    std::vector<double> real((std::size_t)h * w);
    std::vector<std::complex<double>> cplx((std::size_t)h * wc);
    PlanPair p;
    p.fwd = fftw_plan_dft_r2c_2d(h, w, real.data(),
                                 reinterpret_cast<fftw_complex*>(cplx.data()),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft_c2r_2d(h, w, reinterpret_cast<fftw_complex*>(cplx.data()),
                                 real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    g_plans[{h, w}] = p;
    return p;
}

void spectrum_of_kernel(const float* k, int kh, int kw, int h, int w,
                        const PlanPair& plans, std::vector<std::complex<double>>& ks) {
    const int cy = kh / 2, cx = kw / 2;
    std::vector<double> pad((std::size_t)h * w, 0.0);
    for (int u = 0; u < kh; ++u)
        for (int v = 0; v < kw; ++v) {
            const int a = ((u - cy) % h + h) % h;
            const int b = ((v - cx) % w + w) % w;
            pad[(std::size_t)a * w + b] += k[(std::size_t)u * kw + v];
        }
    const int wc = w / 2 + 1;
    ks.assign((std::size_t)h * wc, {});
    fftw_execute_dft_r2c(plans.fwd, pad.data(), reinterpret_cast<fftw_complex*>(ks.data()));
}

} // namespace

void conv_circular(const float* x, int c, int h, int w, const float* k, int kh, int kw,
                   float* y) {
    const PlanPair plans = get_plans(h, w);
    const int wc = w / 2 + 1;
    std::vector<std::complex<double>> ks;
    spectrum_of_kernel(k, kh, kw, h, w, plans, ks);

    std::vector<double> real((std::size_t)h * w);
    std::vector<std::complex<double>> xs((std::size_t)h * wc);
    const double inv_n = 1.0 / ((double)h * w);
    for (int ch = 0; ch < c; ++ch) {
        const float* xc = x + (std::size_t)ch * h * w;
        for (std::size_t i = 0; i < real.size(); ++i) real[i] = xc[i];
        fftw_execute_dft_r2c(plans.fwd, real.data(),
                             reinterpret_cast<fftw_complex*>(xs.data()));
        for (std::size_t i = 0; i < xs.size(); ++i) xs[i] *= ks[i];
        fftw_execute_dft_c2r(plans.bwd, reinterpret_cast<fftw_complex*>(xs.data()),
                             real.data());
        float* yc = y + (std::size_t)ch * h * w;
        for (std::size_t i = 0; i < real.size(); ++i) yc[i] = (float)(real[i] * inv_n);
    }
}

void xcorr_circular(const float* a, const float* b, int h, int w, float* out) {
    const PlanPair plans = get_plans(h, w);
    const int wc = w / 2 + 1;
    std::vector<double> real((std::size_t)h * w);
    std::vector<std::complex<double>> as((std::size_t)h * wc), bs((std::size_t)h * wc);
    for (std::size_t i = 0; i < real.size(); ++i) real[i] = a[i];
    fftw_execute_dft_r2c(plans.fwd, real.data(), reinterpret_cast<fftw_complex*>(as.data()));
    for (std::size_t i = 0; i < real.size(); ++i) real[i] = b[i];
    fftw_execute_dft_r2c(plans.fwd, real.data(), reinterpret_cast<fftw_complex*>(bs.data()));
    // corr[d] = sum_i a[i] b[i+d]  ->  IFFT(conj(A) .* B)
    for (std::size_t i = 0; i < as.size(); ++i) as[i] = std::conj(as[i]) * bs[i];
    fftw_execute_dft_c2r(plans.bwd, reinterpret_cast<fftw_complex*>(as.data()), real.data());
    const double inv_n = 1.0 / ((double)h * w);
    for (std::size_t i = 0; i < real.size(); ++i) out[i] = (float)(real[i] * inv_n);
}

} // namespace glkm::fft
