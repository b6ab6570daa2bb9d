// Sweeps the current-voltage characteristic I = sigma0(u) (delta + V^2)^((p-2)/2) V
// for a few exponents and prints a gnuplot-ready CSV to stdout.

#include <cstdio>

#include "thermistor/constitutive.hpp"

using namespace thermistor;

int main() {
    const double deltas[] = {1.0, 0.1, 0.01};
    const double ps[] = {1.5, 2.0, 3.0};

    std::printf("p,delta,V,I\n");
    for (double p : ps)
        for (double delta : deltas) {
            ConstitutiveSpec spec;
            spec.p = p;
            spec.delta = delta;
            spec.sigma0 = BoundedProfile::constant(1.0);
            for (int i = 0; i <= 50; ++i) {
                const double V = 2.0 * i / 50.0;
                std::printf("%g,%g,%.17g,%.17g\n", p, delta, V,
                            iv_characteristic(spec, 0.0, V));
            }
        }
    return 0;
}
