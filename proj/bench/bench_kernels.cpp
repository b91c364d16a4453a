// Serial reference vs OpenMP kernels on problem sizes typical of the scenarios.
//
//   bench_kernels [repeats]
//
// Prints best-of-N wall time per kernel and path, the speed-up and the largest
// difference between the two results.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>

#include "wgqed/kernels.hpp"

using namespace wgqed::kernels;

namespace {

double best_of(int repeats, const std::function<void()>& body) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        body();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void report(const char* name, double ref, double par, double diff) {
    std::printf("%-20s reference %9.4f s   parallel %9.4f s   speed-up %5.2fx   max |diff| %.2e\n", name, ref, par,
                ref / par, diff);
}

} // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
    std::printf("OpenMP threads: %d, repeats: %d\n", omp_get_max_threads(), repeats);

    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const std::size_t modes = 2000;
    std::vector<cplx> weights(modes);
    std::vector<double> freqs(modes);
    for (std::size_t j = 0; j < modes; ++j) {
        weights[j] = {uni(rng), uni(rng)};
        freqs[j] = 40.0 * uni(rng);
    }

    {
        const std::size_t count = 4000;
        std::vector<cplx> ref(count), par(count), dref(count), dpar(count);
        const double tr = best_of(repeats, [&] {
            fourier_synthesis(weights, freqs, -20.0, 0.01, count, ref, dref, Exec::reference);
        });
        const double tp = best_of(repeats, [&] {
            fourier_synthesis(weights, freqs, -20.0, 0.01, count, par, dpar, Exec::parallel);
        });
        report("fourier_synthesis", tr, tp, std::max(max_diff(ref, par), max_diff(dref, dpar)));
    }

    {
        const std::size_t steps = 4000;
        std::vector<cplx> source(2 * steps + 1);
        for (std::size_t m = 0; m < source.size(); ++m) {
            const double t = -20.0 + 0.005 * static_cast<double>(m);
            source[m] = std::exp(-t * t / 20.0) * std::polar(1.0, 0.3 * t);
        }
        FieldAccumulation ref, par;
        const double tr = best_of(repeats, [&] {
            ref = accumulate_field(source, freqs, 0.5, 0.02, -20.0, 0.01, steps, 0, Exec::reference);
        });
        const double tp = best_of(repeats, [&] {
            par = accumulate_field(source, freqs, 0.5, 0.02, -20.0, 0.01, steps, 0, Exec::parallel);
        });
        report("accumulate_field", tr, tp, max_diff(ref.final_field, par.final_field));
    }

    {
        ChainSystem sys;
        sys.detuning = freqs;
        sys.coupling = 0.3;
        sys.dk = 0.02;
        ChainState init;
        init.a3 = 1.0;
        init.field.assign(modes, cplx{});
        const std::size_t steps = 3000;
        const std::vector<cplx> drive(2 * steps + 1, cplx{});
        ChainHistory ref, par;
        const double tr = best_of(repeats, [&] {
            ref = propagate_chain(sys, init, 0.0, 0.005, steps, drive, 0, Exec::reference);
        });
        const double tp = best_of(repeats, [&] {
            par = propagate_chain(sys, init, 0.0, 0.005, steps, drive, 0, Exec::parallel);
        });
        report("propagate_chain", tr, tp, std::max(max_diff(ref.a3, par.a3), max_diff(ref.final_field, par.final_field)));
    }
    return 0;
}
