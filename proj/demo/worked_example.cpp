// Decodes the 6x6 four-coefficient example and prints the bins of the first
// stage, the peeling order and the recovered spectrum.

#include <cstdio>

#include "ffast2d.hpp"

int main() {
    using namespace ffast2d;
    const Dims dims(6, 6);
    SparseSpectrum truth(dims);
    truth.set({1, 3}, 7.0);
    truth.set({2, 0}, 3.0);
    truth.set({2, 3}, 5.0);
    truth.set({4, 0}, 1.0);

    const Instance inst = make_instance(truth);
    const FfastPlan plan = build_plan(dims, {4, 9}, Regime::VerySparse);

    const FrontendOutput bins = run_frontend(inst.source, plan);
    for (const BinObservation& obs : bins.stages[0]) {
        std::printf("stage 0 bin (%llu,%llu):", static_cast<unsigned long long>(obs.i), static_cast<unsigned long long>(obs.j));
        for (const Complex& y : obs.values) std::printf("  %+.4f%+.4fi", y.real(), y.imag());
        std::printf("\n");
    }

    const DecodeReport report = decode(inst.source, plan);
    std::printf("status %s after %zu rounds, %llu samples of %llu\n", to_string(report.status), report.peel_iterations,
                static_cast<unsigned long long>(report.samples_touched), static_cast<unsigned long long>(dims.n()));
    for (const Coord& c : report.recovery_order) {
        std::printf("peeled X[%llu][%llu] = %.6f\n", static_cast<unsigned long long>(c.u),
                    static_cast<unsigned long long>(c.v), report.spectrum.at(c).real());
    }
    return report.success() ? 0 : 1;
}
