// SPDX-License-Identifier: Apache-2.0
//
// nadirsm: soil moisture retrieval for nadir-looking wideband radar through crop canopy
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Serial reference vs OpenMP kernel timings: full-grid search and CHM smoothing.
// Usage: nadirsm_bench [repeats]

#include "nadirsm/canopy_rt.hpp"
#include "nadirsm/ground_rt.hpp"
#include "nadirsm/lidar_canopy.hpp"
#include "nadirsm/retrieval.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

using namespace nadirsm;

namespace
{
    template <class F>
    double best_of(int repeats, F &&f)
    {
        double best = 1e300;
        for (int i = 0; i < repeats; ++i)
        {
            const auto t0 = std::chrono::steady_clock::now();
            f();
            best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        return best;
    }

    void report(const char *name, double serial, double parallel, bool same)
    {
        std::printf("%-16s serial %9.4f s  parallel %9.4f s  speedup %5.2fx  %s\n", name, serial, parallel,
                    serial / parallel, same ? "identical" : "MISMATCH");
    }
}

int main(int argc, char **argv)
{
    const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
    std::printf("threads: %d\n", omp_get_max_threads());

    CanopyDescriptor canopy;
    canopy.crop_kind = CropKind::soybean;
    canopy.height = 0.8;
    canopy.leaf_density = 1000.0;
    canopy.leaf_geometry = {0.04, 0.0002, ComplexPermittivity(15.0, 4.5)};
    const SearchConfig cfg;
    const auto grid = FrequencyGrid::default_band();
    SoilDescriptor soil;
    soil.permittivity = ComplexPermittivity::from_loss_tangent(14.0, cfg.soil_loss_tangent);
    const RcsSpectrum m = scene_rcs(canopy, soil, ViewGeometry{}, grid);
    const ForwardTable table = build_forward_table(grid.frequencies(), canopy, soil, ViewGeometry{}, cfg);
    const auto target = residual_domain(m.values, table.mode);

    GridMin a, b;
    const double gs = best_of(repeats, [&] { a = grid_search_serial(table, target); });
    const double gp = best_of(repeats, [&] { b = grid_search_parallel(table, target); });
    report("grid_search", gs, gp, a.soil == b.soil && a.canopy == b.canopy && a.residual == b.residual);

    CanopyHeightModel chm;
    chm.nx = 500;
    chm.ny = 500;
    chm.z.resize(chm.nx * chm.ny);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (double &z : chm.z)
        z = u(rng);
    CanopyHeightModel x = chm, y = chm;
    const double ss = best_of(repeats, [&] {
        x = chm;
        gaussian_smooth_serial(x);
    });
    const double sp = best_of(repeats, [&] {
        y = chm;
        gaussian_smooth_parallel(y);
    });
    report("gaussian_smooth", ss, sp, x.z == y.z);
    return 0;
}
