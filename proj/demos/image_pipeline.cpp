// End-to-end run on a grey image: read (or synthesise) a PGM, decompose it
// exactly, verify a sample of atoms and print a short report.
//
//   demo_image_pipeline [image.pgm] [threads]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "bvatoms/bvatoms.hpp"

using namespace bvatoms;

int main(int argc, char** argv) {
    try {
        GridFunction u = [&] {
            if (argc > 1) return read_grid_file(argv[1]);
            CorpusParams p;
            p.size = 128;
            p.levels = 255;
            p.noise = 2.0;
            return generate_item(CorpusKind::smooth_bumps, 7, 0, p);
        }();
        const unsigned threads = argc > 2 ? static_cast<unsigned>(std::atoi(argv[2])) : 1;
        std::printf("grid %d x %d, h = %g, |Du| = %.6g\n", u.spec().extent[0], u.spec().extent[1], u.spec().h,
                    total_variation(u));

        const auto t0 = std::chrono::steady_clock::now();
        const auto dec = decompose(u, Mode::exact(), {}, {threads, true});
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const Summary& s = dec.summary;
        std::printf("%zu layers, %zu atoms in %.2f s\n", dec.layers.size(), s.atoms, secs);
        std::printf("max boxing constant %.4g, C' %.4g\n", s.max_boxing_constant, dec.cprime);
        std::printf("sum|lambda| / |Du| = %.4g (closed overcount %.4g)\n", s.ratio, s.closed_overcount);
        std::printf("reconstruction residual %.3g\n", s.reconstruction_residual);

        // Every 50th atom through the heat check.
        std::size_t checked = 0, ok = 0;
        double worst = 0.0;
        for (std::size_t i = 0; i < dec.entries.size(); i += 50) {
            const auto r = verify_atom(dec.spec, dec.entries[i].atom);
            ++checked;
            ok += r.all_ok();
            worst = std::max(worst, r.heat_margin);
        }
        std::printf("verified %zu atoms: %zu pass, worst heat margin %.3f\n", checked, ok, worst);
        return ok == checked ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
