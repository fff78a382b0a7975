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

// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include "fixtures.hpp"

#include "nadirsm/commands.hpp"
#include "nadirsm/error.hpp"
#include "nadirsm/ground_rt.hpp"
#include "nadirsm/io.hpp"
#include "nadirsm/lidar_canopy.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>

using namespace nadirsm;
namespace fs = std::filesystem;

namespace
{
    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    int failures = 0;

    double seconds_since(std::chrono::steady_clock::time_point t0)
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    void criterion(int n, const char *name, const std::function<Outcome()> &body)
    {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = body();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass)
            ++failures;
        std::printf("criterion %2d %s  %s: %s [%.1f s]\n", n, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }

    std::string fmt(const char *pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0)
    {
        char buf[256];
        std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
        return buf;
    }

    fs::path scratch_dir(const std::string &name)
    {
        const fs::path dir = fs::temp_directory_path() / ("nadirsm_acceptance_" + name);
        fs::remove_all(dir);
        fs::create_directories(dir);
        return dir;
    }

    // 20 scenes over VWC 3-26%: 7 bare, 7 corn-like, 6 soybean-like
    struct SceneCase
    {
        std::string kind;
        double vwc;
    };

    std::vector<SceneCase> scene_cases()
    {
        std::vector<SceneCase> out;
        const char *kinds[] = {"bare", "corn", "soybean"};
        for (std::size_t i = 0; i < 20; ++i)
            out.push_back({kinds[i % 3], 0.03 + 0.23 * double(i) / 19.0});
        return out;
    }

    CanopyDescriptor canopy_of(const std::string &kind)
    {
        if (kind == "corn")
            return test::corn_canopy();
        if (kind == "soybean")
            return test::soybean_canopy();
        return {};
    }

    // Monte Carlo mean absolute VWC error under 1 dB multiplicative spectrum noise
    double mc_error(const RcsSpectrum &clean, const CanopyDescriptor &canopy, const Scene &scene,
                    const SearchConfig &cfg, double truth, std::size_t draws, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        const ViewGeometry view = test::view_for(clean, scene);
        double sum = 0.0;
        for (std::size_t k = 0; k < draws; ++k)
            sum += std::abs(retrieve(test::perturb(clean, rng), canopy, scene.soil, view, cfg).vwc.vwc() - truth);
        return sum / double(draws);
    }
}

int main(int argc, char **argv)
{
    // Runtime budgets are single-threaded
    omp_set_num_threads(1);
    const std::string property_binary = argc > 1 ? argv[1] : "";

    std::printf("nadirsm acceptance suite\n");
    const CalibrationFactor cal = test::calibration();

    criterion(1, "plate calibration round-trip", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto c = derive_calibration(test::plate_scans(0.9, 7), 0.9, FrequencyGrid::default_band());
        const auto m = ground_rcs_from_scan(simulate_plate_scan(0.9, 7.3, test::settings(42)), c);
        double worst = 0.0;
        std::size_t bins = 0;
        for (std::size_t i = 0; i < m.grid.size(); ++i)
        {
            if (m.grid[i] < 300e6 || m.grid[i] > 800e6)
                continue;
            worst = std::max(worst, std::abs(to_db(m.values[i] / plate_rcs(0.9, m.grid[i]))));
            ++bins;
        }
        const double dt = seconds_since(t0);
        const bool covered = c.valid_low <= 300e6 && c.valid_high >= 800e6;
        return Outcome{covered && worst <= 1.0 && dt < 10.0,
                       fmt("worst |error| %.3g dB over %.0f bins in 300-800 MHz (limit 1 dB), %.2f s (limit 10 s)",
                           worst, double(bins), dt)};
    });

    criterion(2, "coherent dominance below 2 deg", [&] {
        double margin = INFINITY;
        for (double vwc : {0.03, 0.1, 0.2, 0.3})
        {
            SoilDescriptor soil;
            soil.permittivity = test::soil_eps(vwc);
            const ViewGeometry view;
            const double area = effective_area(view);
            for (int k = 0; k < 200; ++k)
            {
                const double theta = deg2rad(0.01 * k);
                const double coh = coherent_rcs(soil, 550e6, theta, area);
                const double inc = incoherent_rcs(soil, 550e6, theta, area);
                margin = std::min(margin, to_db(coh) - to_db(inc));
            }
        }
        return Outcome{margin >= 10.0, fmt("smallest coherent/incoherent margin %.1f dB for theta_i in [0, 2) deg, "
                                           "VWC 3-30%% (limit 10 dB)",
                                           margin)};
    });

    // Shared by criteria 3 and 4: spectra produced through the file-level commands
    std::vector<RcsSpectrum> spectra;
    criterion(3, "end-to-end noiseless inversion", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const fs::path dir = scratch_dir("e2e");
        const cli::RunConfig cfg;
        io::write_canopy(dir / "corn.canopy.txt", test::corn_canopy());
        io::write_canopy(dir / "soybean.canopy.txt", test::soybean_canopy());
        io::write_text_atomic(dir / "plate.scene", "kind=plate\nname=plate\nplate_side_m=0.9\n"
                                                   "ranges_m=6,6.5,7,7.5,8,8.5,9\n");
        const auto plates = cli::cmd_simulate(cfg, dir / "plate.scene", dir);
        const auto cal_file = cli::cmd_calibrate(cfg, plates.scans, 0.9, {}, dir);

        const auto cases = scene_cases();
        std::size_t ok = 0;
        double worst_steps = 0.0;
        for (std::size_t i = 0; i < cases.size(); ++i)
        {
            const std::string name = "scene" + std::to_string(i);
            const std::string canopy = cases[i].kind == "bare" ? "none" : cases[i].kind + ".canopy.txt";
            io::write_text_atomic(dir / (name + ".scene"), "kind=ground\nname=" + name + "\nvwc=" +
                                                               io::format_double(cases[i].vwc) +
                                                               "\naltitudes_m=6\ncanopy_file=" + canopy + "\n");
            const auto sim = cli::cmd_simulate(cfg, dir / (name + ".scene"), dir);
            const auto rcs = cli::cmd_rcs(cfg, sim.scans, cal_file, dir);
            std::optional<fs::path> canopy_path;
            if (cases[i].kind != "bare")
                canopy_path = dir / canopy;
            const auto report = cli::cmd_retrieve(cfg, rcs, canopy_path, dir);
            const auto result = io::result_from_keys(io::KeyValues::load(report[0]));
            const double truth = io::KeyValues::load(sim.truth).number("vwc");
            const double steps = std::abs(result.vwc.vwc() - truth) / vwc_grid_step(truth, cfg.search);
            worst_steps = std::max(worst_steps, steps);
            ok += steps <= 1.0;
            spectra.push_back(io::read_rcs(rcs[0]));
        }
        fs::remove_all(dir);
        const double dt = seconds_since(t0);
        return Outcome{ok == cases.size() && dt < 300.0,
                       fmt("%.0f/%.0f scenes within one grid step, worst %.2f steps, %.1f s (limit 300 s)", double(ok),
                           double(cases.size()), worst_steps, dt)};
    });

    criterion(4, "noise robustness", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        if (spectra.size() != scene_cases().size())
            return Outcome{false, "needs the spectra from criterion 3"};
        const SearchConfig cfg;
        double worst = 0.0;
        double sum = 0.0;
        std::size_t n = 0;
        const auto cases = scene_cases();
        for (std::size_t i = 0; i < cases.size(); ++i)
        {
            if (cases[i].kind == "bare")
                continue;
            const CanopyDescriptor canopy = canopy_of(cases[i].kind);
            const Scene scene = test::make_scene(cases[i].vwc, canopy);
            const double e = mc_error(spectra[i], canopy, scene, cfg, cases[i].vwc, 100, 1000 + i);
            worst = std::max(worst, e);
            sum += e;
            ++n;
        }
        const double dt = seconds_since(t0);
        // the limit applies to the mean over draws and canopied scenes; the worst scene is reported too
        const double mean = sum / double(n);
        return Outcome{mean <= 0.02 && dt < 900.0,
                       fmt("mean |VWC error| over %.0f canopied scenes x 100 draws %.4f (limit 0.02), worst scene "
                           "%.4f, %.0f s (limit 900 s)",
                           double(n), mean, worst, dt)};
    });

    criterion(5, "altitude consistency", [&] {
        const SearchConfig cfg;
        double worst = 0.0;
        for (const std::string kind : {"bare", "corn", "soybean"})
            for (double vwc : {0.08, 0.2})
            {
                std::vector<RcsSpectrum> pair;
                Scene scene;
                for (double alt : {6.0, 8.0})
                {
                    scene = test::make_scene(vwc, canopy_of(kind), alt);
                    pair.push_back(test::measure(scene, cal));
                }
                const auto rows = sweep_altitude(pair, canopy_of(kind), scene.soil, scene.view, cfg);
                worst = std::max(worst, std::abs(rows[0].vwc - rows[1].vwc));
            }
        return Outcome{worst < 0.015, fmt("largest 6 m vs 8 m VWC difference %.4f (limit 0.015)", worst)};
    });

    criterion(6, "bandwidth ablation direction", [&] {
        const SearchConfig cfg;
        bool direction = true;
        double canopied_full = 0.0, canopied_top = 0.0, bare_gap = 0.0;
        for (const std::string kind : {"bare", "corn", "soybean"})
            for (double vwc : {0.05, 0.12, 0.2, 0.26})
            {
                const CanopyDescriptor canopy = canopy_of(kind);
                const Scene scene = test::make_scene(vwc, canopy);
                const RcsSpectrum m = test::measure(scene, cal);
                const auto rows = sweep_bandwidth(m, canopy, scene.soil, test::view_for(m, scene), cfg,
                                                  default_bandwidth_cases(m), vwc);
                const double full_err = rows[0].vwc_error;
                const double top_err = rows[1].vwc_error;
                if (kind == "bare")
                    bare_gap = std::max(bare_gap, std::abs(full_err - top_err));
                else
                {
                    direction = direction && full_err <= top_err;
                    canopied_full = std::max(canopied_full, full_err);
                    canopied_top = std::max(canopied_top, top_err);
                }
            }
        return Outcome{direction && bare_gap < 0.005,
                       std::string("canopied: full band no worse than top 100 MHz in every scene: ") +
                           (direction ? "yes" : "no") +
                           fmt(" (worst %.4f vs %.4f); bare gap %.4f (limit 0.005)", canopied_full, canopied_top,
                               bare_gap)};
    });

    criterion(7, "canopy ablation direction", [&] {
        const SearchConfig cfg;
        const CanopyDescriptor canopy = test::dense_wet_canopy();
        double worst_ratio = INFINITY;
        double attenuation = 0.0;
        for (double vwc : {0.08, 0.2})
        {
            const Scene scene = test::make_scene(vwc, canopy);
            const RcsSpectrum m = test::measure(scene, cal);
            const auto rows = sweep_canopy_ablation(m, canopy, scene.soil, test::view_for(m, scene), cfg, vwc);
            const double on = rows[0].canopy_modeling ? rows[0].vwc_error : rows[1].vwc_error;
            const double off = rows[0].canopy_modeling ? rows[1].vwc_error : rows[0].vwc_error;
            // one grid step floors the enabled error so a perfect fit cannot inflate the ratio
            worst_ratio = std::min(worst_ratio, off / std::max(on, vwc_grid_step(vwc, cfg)));
            const double t = transmissivity(canopy, 550e6, scene.view.effective_beamwidth);
            attenuation = -to_db(t * t);
        }
        return Outcome{worst_ratio >= 2.0,
                       fmt("error(off) / max(error(on), grid step) >= %.1f (limit 2), two-way loss %.1f dB at 550 MHz",
                           worst_ratio, attenuation)};
    });

    criterion(8, "effective-beamwidth sweep minimum", [&] {
        const SearchConfig cfg;
        double worst = 0.0;
        for (const std::string kind : {"bare", "corn"})
        {
            const Scene scene = test::make_scene(0.18, canopy_of(kind));
            const RcsSpectrum m = test::measure(scene, cal);
            const auto theta = default_beamwidth_range(scene.soil.scattering_beamwidth);
            const auto rows =
                sweep_effective_beamwidth(m, canopy_of(kind), scene.soil, test::view_for(m, scene), cfg, theta, 0.18);
            const double best = rad2deg(rows[beamwidth_minimum(rows)].effective_beamwidth);
            worst = std::max(worst, std::abs(best - 2.0));
        }
        return Outcome{worst <= 0.25, fmt("sweep minimum at most %.2f deg from 2 deg (limit 0.25)", worst)};
    });

    criterion(9, "LiDAR suite", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        double e_spacing = 0.0, e_height = 0.0, e_density = 0.0, e_lai = 0.0;
        for (const CropFieldSpec &spec : test::crop_tiles())
        {
            const SyntheticCrop crop = generate_crop_tile(spec);
            const auto est = extract_structure(crop.cloud, spec.tile, synthetic_allometry(spec));
            const auto rel = [](double a, double b) { return std::abs(a - b) / b; };
            e_spacing = std::max(e_spacing, rel(est.rows.spacing, crop.truth.row_spacing));
            e_height = std::max(e_height, rel(est.mean_height, crop.truth.mean_height));
            e_density = std::max(e_density, rel(est.plant_density, crop.truth.plant_density));
            e_lai = std::max(e_lai, rel(est.lai, crop.truth.lai));
        }
        const double dt = seconds_since(t0);
        return Outcome{e_spacing <= 0.05 && e_height <= 0.05 && e_density <= 0.15 && e_lai <= 0.15 && dt < 120.0,
                       fmt("worst relative errors: spacing %.3f (0.05), height %.3f (0.05), density %.3f (0.15), ",
                           e_spacing, e_height, e_density) +
                           fmt("LAI %.3f (0.15); 5 tiles in %.1f s (limit 120 s)", e_lai, dt)};
    });

    criterion(10, "property suites", [&] {
        if (property_binary.empty())
            return Outcome{false, "property test binary not given"};
        const auto t0 = std::chrono::steady_clock::now();
        const std::string cmd = "\"" + property_binary + "\" --minimal > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        const double dt = seconds_since(t0);
        return Outcome{rc == 0 && dt < 120.0,
                       fmt("property binary exit status %.0f, %.1f s (limit 120 s)", double(rc), dt)};
    });

    criterion(11, "grid-search runtime budget", [&] {
        const SearchConfig cfg;
        const Scene scene = test::make_scene(0.2, test::corn_canopy());
        RcsSpectrum m = scene_rcs(scene.canopy, scene.soil, scene.view, FrequencyGrid::default_band());
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = retrieve(m, scene.canopy, scene.soil, scene.view, cfg);
        const double dt = seconds_since(t0);
        return Outcome{dt < 60.0 && r.fit.size() == 100,
                       fmt("%.0f x %.0f cells, %.0f bins, one thread: %.2f s (limit 60 s)", double(cfg.soil_count),
                           double(cfg.canopy_count), double(r.fit.size()), dt)};
    });

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
