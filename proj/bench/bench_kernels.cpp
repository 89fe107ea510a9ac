// Benchmarks the OpenMP/SIMD kernels against the serial reference
// implementations on shapes taken from the real networks, reporting
// throughput, speedup, and the largest element difference between the
// two routes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <omp.h>

#include "cnn/gemm.hpp"
#include "cnn/layers.hpp"
#include "cnn/model.hpp"
#include "cnn/ref.hpp"
#include "cnn/rng.hpp"
#include "cnn/tensor.hpp"

namespace {

cnn::Tensor random_tensor(std::vector<int> shape, cnn::Rng& rng,
                          double scale = 1.0) {
    cnn::Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = scale * (2.0 * rng.uniform() - 1.0);
    return t;
}

double max_abs_diff(const cnn::Tensor& a, const cnn::Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Runs fn repeatedly until ~0.5 s has elapsed and returns seconds/call.
double time_call(const std::function<void()>& fn) {
    fn();  // warm-up
    int reps = 1;
    double elapsed = 0.0;
    for (;;) {
        const double start = omp_get_wtime();
        for (int i = 0; i < reps; ++i) fn();
        elapsed = omp_get_wtime() - start;
        if (elapsed > 0.5) break;
        reps *= 2;
    }
    return elapsed / reps;
}

void report(const char* name, double flops, double serial_s, double parallel_s,
            double diff) {
    std::printf("%-28s serial %8.1f ms %7.2f GF/s | parallel %8.1f ms "
                "%7.2f GF/s | speedup %5.2fx | max|diff| %.3g\n",
                name, 1e3 * serial_s, flops / serial_s / 1e9, 1e3 * parallel_s,
                flops / parallel_s / 1e9, serial_s / parallel_s, diff);
}

void bench_gemm(cnn::Rng& rng) {
    // Dense-layer shape from case 1: batch 100, 9216 -> 128.
    const int m = 100, k = 9216, n = 128;
    const cnn::Tensor a = random_tensor({m, k}, rng);
    const cnn::Tensor b = random_tensor({k, n}, rng);
    const cnn::Tensor bt = random_tensor({n, k}, rng);
    cnn::Tensor c({m, n});

    const cnn::Tensor want = cnn::ref::matmul(a, b);
    const double serial_s = time_call([&] { c = cnn::ref::matmul(a, b); });
    const double parallel_s = time_call(
        [&] { cnn::kernels::gemm(a.data(), b.data(), c.data(), m, k, n); });
    cnn::kernels::gemm(a.data(), b.data(), c.data(), m, k, n);
    report("gemm 100x9216 * 9216x128", 2.0 * m * n * k, serial_s, parallel_s,
           max_abs_diff(c, want));

    cnn::Tensor c2({m, n});
    const double nt_s = time_call([&] {
        cnn::kernels::gemm_nt(a.data(), bt.data(), c2.data(), m, k, n);
    });
    cnn::Tensor want2({m, n});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int p = 0; p < k; ++p) s += a[i * k + p] * bt[j * k + p];
            want2[i * n + j] = s;
        }
    report("gemm_nt same shape", 2.0 * m * n * k, serial_s, nt_s,
           max_abs_diff(c2, want2));
}

void bench_conv(cnn::Rng& rng) {
    // Second conv of case 1: 100 x [32,26,26] -> [64,24,24], 3x3.
    const int n = 100, c = 32, h = 26, w = 26, f = 64, kh = 3, kw = 3;
    const cnn::Tensor input = random_tensor({n, c, h, w}, rng);
    const cnn::Tensor weights = random_tensor({f, c, kh, kw}, rng, 0.1);
    const cnn::Tensor bias = random_tensor({f}, rng, 0.1);

    cnn::Conv2d layer(c, f, kh, kw);
    {
        // Adopt the shared weights so both routes compute the same thing.
        auto params = layer.params();
        *params[0].value = weights;
        *params[1].value = bias;
    }

    cnn::Tensor out;
    const cnn::Tensor want = cnn::ref::conv2d_forward(input, weights, bias);
    const double serial_s = time_call(
        [&] { out = cnn::ref::conv2d_forward(input, weights, bias); });
    const double parallel_s = time_call(
        [&] { out = layer.forward(input, cnn::Mode::eval, nullptr); });
    out = layer.forward(input, cnn::Mode::eval, nullptr);
    const double flops = 2.0 * n * f * (h - kh + 1) * (w - kw + 1) * c * kh * kw;
    report("conv 100x32x26x26 -> 64f", flops, serial_s, parallel_s,
           max_abs_diff(out, want));
}

void bench_maxpool(cnn::Rng& rng) {
    const int n = 100, c = 64, h = 24, w = 24;
    const cnn::Tensor input = random_tensor({n, c, h, w}, rng);
    cnn::MaxPool layer(2);
    cnn::Tensor out;
    const cnn::Tensor want = cnn::ref::maxpool_forward(input, 2);
    const double serial_s =
        time_call([&] { out = cnn::ref::maxpool_forward(input, 2); });
    const double parallel_s = time_call(
        [&] { out = layer.forward(input, cnn::Mode::eval, nullptr); });
    out = layer.forward(input, cnn::Mode::eval, nullptr);
    report("maxpool2 100x64x24x24", static_cast<double>(input.size()),
           serial_s, parallel_s, max_abs_diff(out, want));
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    cnn::Rng rng(42);
    bench_gemm(rng);
    bench_conv(rng);
    bench_maxpool(rng);
    return 0;
}
