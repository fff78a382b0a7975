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

#include "fixtures.hpp"

#include "nadirsm/error.hpp"
#include "nadirsm/retrieval.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nadirsm;

namespace
{
    RcsSpectrum forward(const CanopyDescriptor &canopy, double eps_s, double eps_c, const SearchConfig &cfg,
                        const ViewGeometry &view = {})
    {
        SoilDescriptor soil;
        soil.permittivity = ComplexPermittivity::from_loss_tangent(eps_s, cfg.soil_loss_tangent);
        const CanopyDescriptor c =
            canopy.empty() ? canopy : canopy.with_permittivity(ComplexPermittivity::from_loss_tangent(eps_c, cfg.canopy_loss_tangent));
        return scene_rcs(c, soil, view, FrequencyGrid::default_band());
    }
}

TEST_SUITE("retrieval")
{
    TEST_CASE("forward then invert recovers both permittivities")
    {
        const SearchConfig cfg;
        const auto soil_grid = cfg.soil_grid();
        const auto canopy_grid = cfg.canopy_grid();
        for (const CanopyDescriptor &canopy : {test::corn_canopy(), test::soybean_canopy()})
            for (auto [si, ci] : {std::pair<std::size_t, std::size_t>{60, 180}, {250, 120}, {400, 300}})
            {
                const auto r = retrieve(forward(canopy, soil_grid[si], canopy_grid[ci], cfg), canopy, SoilDescriptor{},
                                        ViewGeometry{}, cfg);
                CHECK(std::abs(double(r.soil_index) - double(si)) <= 1.0);
                CHECK(std::abs(double(r.canopy_index) - double(ci)) <= 1.0);
                CHECK(r.vwc.vwc() == doctest::Approx(topp_vwc(r.eps_soil.real_part()).vwc()));
                CHECK(r.residual >= 0.0);
                CHECK_FALSE(r.soil_at_boundary);
                CHECK(r.fit.size() == 100);
            }
    }

    TEST_CASE("bare soil leaves the canopy permittivity inert")
    {
        SearchConfig cfg;
        const auto m = forward({}, 11.3, 1.0, cfg);
        const auto r = retrieve(m, {}, SoilDescriptor{}, ViewGeometry{}, cfg);
        CHECK(r.canopy_inert);

        // independent single-variable fit
        const auto grid = cfg.soil_grid();
        double best = INFINITY;
        std::size_t best_i = 0;
        const double area = effective_area(ViewGeometry{});
        for (std::size_t i = 0; i < grid.size(); ++i)
        {
            SoilDescriptor soil;
            soil.permittivity = ComplexPermittivity::from_loss_tangent(grid[i], cfg.soil_loss_tangent);
            double res = 0.0;
            for (std::size_t j = 0; j < m.grid.size(); ++j)
            {
                const double d = coherent_rcs(soil, m.grid[j], deg2rad(2.0), area) - m.values[j];
                res += d * d;
            }
            if (res < best)
            {
                best = res;
                best_i = i;
            }
        }
        CHECK(r.soil_index == best_i);

        // modeling switched off on a canopy descriptor behaves the same way
        cfg.canopy_modeling_enabled = false;
        CHECK(retrieve(m, test::corn_canopy(), SoilDescriptor{}, ViewGeometry{}, cfg).canopy_inert);
    }

    TEST_CASE("1 dB noise on the corn scene keeps the VWC error within 2%")
    {
        const SearchConfig cfg;
        const auto cal = test::calibration();
        const Scene scene = test::make_scene(0.15, test::corn_canopy());
        const auto clean = test::measure(scene, cal);
        const ViewGeometry view = test::view_for(clean, scene);
        std::mt19937_64 rng(11);
        double sum = 0.0;
        for (int k = 0; k < 100; ++k)
            sum += std::abs(retrieve(test::perturb(clean, rng), scene.canopy, scene.soil, view, cfg).vwc.vwc() - 0.15);
        CHECK(sum / 100.0 <= 0.02);
    }

    TEST_CASE("retrieved VWC is monotone in the true permittivity")
    {
        const SearchConfig cfg;
        double prev = -1.0;
        for (double e = 3.0; e <= 35.0; e += 2.0)
        {
            const double v = retrieve(forward(test::soybean_canopy(), e, 12.0, cfg), test::soybean_canopy(),
                                      SoilDescriptor{}, ViewGeometry{}, cfg)
                                 .vwc.vwc();
            CHECK(v >= prev);
            prev = v;
        }
    }

    TEST_CASE("disabling canopy modeling never helps on a canopied scene")
    {
        const SearchConfig cfg;
        const auto cal = test::calibration();
        for (double vwc : {0.06, 0.2})
        {
            const Scene scene = test::make_scene(vwc, test::corn_canopy());
            const auto m = test::measure(scene, cal);
            const auto rows = sweep_canopy_ablation(m, scene.canopy, scene.soil, test::view_for(m, scene), cfg, vwc);
            REQUIRE(rows.size() == 2);
            const double on = rows[0].canopy_modeling ? rows[0].vwc_error : rows[1].vwc_error;
            const double off = rows[0].canopy_modeling ? rows[1].vwc_error : rows[0].vwc_error;
            CHECK(off >= on);
        }
    }

    TEST_CASE("roughness calibration through the measurement chain")
    {
        const SearchConfig cfg;
        const auto cal = test::calibration();
        Scene scene = test::make_scene(0.18, {});
        scene.soil.roughness_height = 0.012;
        const auto m = test::measure(scene, cal);
        const auto fit = calibrate_roughness(m, SoilMoisture(0.18), scene.soil, test::view_for(m, scene), cfg);
        CHECK(std::abs(fit.roughness_height - 0.012) <= 0.001);
    }

    TEST_CASE("roughness calibration on forward-model scenes")
    {
        // truth on a grid permittivity, so the generating height reproduces the spectrum exactly
        const SearchConfig cfg;
        const double eps = cfg.soil_grid()[180];
        const SoilMoisture vwc = topp_vwc(eps);
        const auto recover = [&](double s, double altitude) {
            SoilDescriptor soil;
            soil.permittivity = ComplexPermittivity::from_loss_tangent(eps, cfg.soil_loss_tangent);
            soil.roughness_height = s;
            ViewGeometry view;
            view.altitude = altitude;
            const auto m = scene_rcs({}, soil, view, FrequencyGrid::default_band());
            return calibrate_roughness(m, vwc, soil, view, cfg).roughness_height;
        };
        CHECK(std::abs(recover(0.012, 6.0) - 0.012) <= 0.001);
        CHECK(recover(0.0, 6.0) <= roughness_scan_step);
        for (double s : {0.004, 0.012, 0.025})
            CHECK(recover(s, 6.0) == recover(s, 8.0));
    }

    TEST_CASE("effective-beamwidth sweep")
    {
        const SearchConfig cfg;
        const auto cal = test::calibration();
        const Scene scene = test::make_scene(0.18, test::soybean_canopy());
        const auto m = test::measure(scene, cal);
        const ViewGeometry view = test::view_for(m, scene);
        const auto theta = default_beamwidth_range(scene.soil.scattering_beamwidth);
        CHECK(rad2deg(theta.front()) == doctest::Approx(0.5));
        CHECK(rad2deg(theta.back()) < 5.0);
        const auto rows = sweep_effective_beamwidth(m, scene.canopy, scene.soil, view, cfg, theta, 0.18);
        const double best = rad2deg(rows[beamwidth_minimum(rows)].effective_beamwidth);
        CHECK(std::abs(best - 2.0) <= 0.25);

        // error grows once the candidate moves well past the generating beamwidth
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (rad2deg(rows[i - 1].effective_beamwidth) >= 2.5)
                CHECK(rows[i].vwc_error >= rows[i - 1].vwc_error);
    }

    TEST_CASE("beamwidth sweep stays finite up to 10 degrees")
    {
        const SearchConfig cfg;
        Scene scene = test::make_scene(0.12, {});
        scene.soil.scattering_beamwidth = deg2rad(12.0);
        const auto m = scene_rcs({}, scene.soil, scene.view, FrequencyGrid::default_band());
        std::vector<double> theta;
        for (double d = 0.5; d <= 10.0 + 1e-9; d += 0.25)
            theta.push_back(deg2rad(d));
        for (const auto &row : sweep_effective_beamwidth(m, {}, scene.soil, scene.view, cfg, theta, 0.12))
        {
            CHECK(std::isfinite(row.vwc));
            CHECK(std::isfinite(row.vwc_error));
        }
    }

    TEST_CASE("bandwidth sweep")
    {
        const SearchConfig cfg;
        const auto cal = test::calibration();
        const Scene scene = test::make_scene(0.2, test::corn_canopy());
        const auto m = test::measure(scene, cal);
        const auto bands = default_bandwidth_cases(m);
        REQUIRE(bands.size() == 2);
        CHECK(bands[1].second == m.grid.frequencies().back());
        CHECK(bands[1].second - bands[1].first == doctest::Approx(100e6));
        const auto rows = sweep_bandwidth(m, scene.canopy, scene.soil, test::view_for(m, scene), cfg, bands, 0.2);
        CHECK(rows[0].vwc_error <= rows[1].vwc_error);
        CHECK(rows[0].bins > rows[1].bins);

        // a single-frequency band still yields a result
        const double f = m.grid[40];
        const auto one = sweep_bandwidth(m, scene.canopy, scene.soil, test::view_for(m, scene), cfg, {{f, f}}, 0.2);
        CHECK(one[0].bins == 1);
        SearchConfig single = cfg;
        single.sub_band = std::pair{f, f};
        const auto r = retrieve(m, scene.canopy, scene.soil, test::view_for(m, scene), single);
        CHECK(r.fit.size() == 1);
        CHECK(std::isfinite(r.vwc.vwc()));
    }

    TEST_CASE("bare-soil band choice barely matters")
    {
        const SearchConfig cfg;
        const auto cal = test::calibration();
        const Scene scene = test::make_scene(0.14, {});
        const auto m = test::measure(scene, cal);
        const auto rows =
            sweep_bandwidth(m, {}, scene.soil, test::view_for(m, scene), cfg, default_bandwidth_cases(m), 0.14);
        CHECK(std::abs(rows[0].vwc_error - rows[1].vwc_error) < 0.005);
    }

    TEST_CASE("altitude sweep")
    {
        const SearchConfig cfg;
        const auto cal = test::calibration();
        std::vector<RcsSpectrum> spectra;
        Scene scene;
        for (double alt : {6.0, 8.0})
        {
            scene = test::make_scene(0.22, test::soybean_canopy(), alt);
            spectra.push_back(test::measure(scene, cal));
        }
        const auto rows = sweep_altitude(spectra, scene.canopy, scene.soil, scene.view, cfg);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].altitude == doctest::Approx(6.0).epsilon(1e-3));
        CHECK(rows[1].altitude == doctest::Approx(8.0).epsilon(1e-3));
        CHECK(std::abs(rows[0].vwc - rows[1].vwc) < 0.015);

        const auto same = sweep_altitude({spectra[0], spectra[0]}, scene.canopy, scene.soil, scene.view, cfg);
        CHECK(same[0].vwc == same[1].vwc);

        RcsSpectrum no_range = spectra[0];
        no_range.range_m.reset();
        CHECK_THROWS_AS(sweep_altitude({no_range}, scene.canopy, scene.soil, scene.view, cfg), InputError);
    }

    TEST_CASE("determinism")
    {
        const SearchConfig cfg;
        const auto m = forward(test::corn_canopy(), 9.0, 14.0, cfg);
        const auto a = retrieve(m, test::corn_canopy(), SoilDescriptor{}, ViewGeometry{}, cfg);
        const auto b = retrieve(m, test::corn_canopy(), SoilDescriptor{}, ViewGeometry{}, cfg);
        CHECK(a.soil_index == b.soil_index);
        CHECK(a.canopy_index == b.canopy_index);
        CHECK(a.residual == b.residual);
    }

    TEST_CASE("boundary flags and input errors")
    {
        const SearchConfig cfg;
        // far wetter than the grid allows
        const auto wet = forward({}, 60.0, 1.0, cfg);
        const auto r = retrieve(wet, {}, SoilDescriptor{}, ViewGeometry{}, cfg);
        CHECK(r.soil_at_boundary);
        CHECK(r.soil_index == cfg.soil_count - 1);

        RcsSpectrum zero = wet;
        std::fill(zero.values.begin(), zero.values.end(), 0.0);
        CHECK_THROWS_AS(retrieve(zero, {}, SoilDescriptor{}, ViewGeometry{}, cfg), InputError);

        SearchConfig outside = cfg;
        outside.sub_band = std::pair{950e6, 990e6};
        CHECK_THROWS_AS(retrieve(wet, {}, SoilDescriptor{}, ViewGeometry{}, outside), InputError);

        SearchConfig bad = cfg;
        bad.soil_count = 0;
        CHECK_THROWS_AS(bad.validate(), InputError);
    }

    TEST_CASE("grid step")
    {
        const SearchConfig cfg;
        const double step = vwc_grid_step(0.2, cfg);
        const double de = (cfg.soil_high - cfg.soil_low) / double(cfg.soil_count - 1);
        const double e = topp_permittivity(SoilMoisture(0.2));
        CHECK(step == doctest::Approx(topp_vwc(e + de).vwc() - topp_vwc(e).vwc()).epsilon(0.05));
    }
}
