// Decomposes the indicator of one cell and prints every atom with its
// verification report. The smallest example where all the pieces show up.

#include <cstdio>

#include "bvatoms/bvatoms.hpp"

using namespace bvatoms;

int main() {
    CellSet cell(GridSpec::square(4));
    cell.insert({1, 2, 0});
    const auto dec = decompose(cell.indicator(), Mode::exact());

    std::printf("|Du| = %g, C' = %.6g, atoms = %zu\n", dec.summary.tv, dec.cprime, dec.entries.size());
    for (const auto& e : dec.entries) {
        const Atom& a = e.atom;
        const auto r = verify_atom(dec.spec, a);
        std::printf("\natom l=%d  Q=(level %d, %d %d)  S=[%g,%g]x[%g,%g]  lambda=%.6g\n", a.axis, a.cube.level,
                    a.cube.coords[0], a.cube.coords[1], a.support.lo[0], a.support.lo[0] + a.support.side,
                    a.support.lo[1], a.support.lo[1] + a.support.side, e.lambda);
        for (const auto& fw : a.faces)
            std::printf("  face axis %d lower (%d,%d)  weight %+.6g\n", fw.face.axis, fw.face.lower[0], fw.face.lower[1],
                        fw.weight);
        std::printf("  mass %.6g  signed mass %g  heat sup %.6g / budget %.6g  -> %s\n", r.mass, r.signed_mass,
                    r.heat_sup, r.heat_budget, r.all_ok() ? "ok" : "FAILED");
    }
    const auto b = l1_budget(dec);
    std::printf("\nsum|lambda| = %.6g, ratio = %.6g, reconstruction residual = %g\n", b.sum_abs_lambda, b.ratio,
                dec.summary.reconstruction_residual);
    return 0;
}
