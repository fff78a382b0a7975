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
#include "nadirsm/radar_dsp.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace nadirsm;

namespace
{
    std::size_t argmax(const std::vector<double> &v)
    {
        return std::size_t(std::max_element(v.begin(), v.end()) - v.begin());
    }

    SynthesisConfig quiet()
    {
        SynthesisConfig c;
        c.duration = 60e-9;
        return c;
    }

    // Direct DFT magnitude of a sampled pulse, dt * |sum x[n] exp(-i 2 pi f n dt)|
    double dft_magnitude(const std::vector<double> &x, double dt, double f)
    {
        std::complex<double> acc = 0.0;
        for (std::size_t n = 0; n < x.size(); ++n)
            acc += x[n] * std::polar(1.0, -2.0 * pi * f * double(n) * dt);
        return dt * std::abs(acc);
    }
}

TEST_SUITE("radar-dsp")
{
    TEST_CASE("ricker pulse")
    {
        const double fc = 550e6;
        CHECK(ricker(fc, 0.0) == 1.0);
        const double t0 = 1.0 / (pi * fc * std::sqrt(2.0));
        CHECK(std::abs(ricker(fc, t0)) < 1e-12);
        CHECK(std::abs(ricker(fc, -t0)) < 1e-12);
        CHECK(ricker(fc, 0.9 * t0) > 0.0);
        CHECK(ricker(fc, 1.1 * t0) < 0.0);

        // sampled pulse spectrum peaks at fc
        const double dt = 1.0 / 14e9;
        std::vector<double> x;
        for (int n = -200; n <= 200; ++n)
            x.push_back(ricker(fc, n * dt));
        double best_f = 0.0, best = 0.0;
        for (double f = 100e6; f <= 1200e6; f += 1e6)
        {
            const double m = dft_magnitude(x, dt, f);
            if (m > best)
            {
                best = m;
                best_f = f;
            }
        }
        CHECK(best_f == doctest::Approx(fc).epsilon(0.005));
        CHECK(ricker_spectrum(fc, fc) > ricker_spectrum(fc, 0.99 * fc));
        CHECK(ricker_spectrum(fc, fc) > ricker_spectrum(fc, 1.01 * fc));
        // analytic transform against the sampled one
        CHECK(dft_magnitude(x, dt, 400e6) == doctest::Approx(ricker_spectrum(fc, 400e6)).epsilon(1e-6));
    }

    TEST_CASE("synthesized traces")
    {
        const auto cfg = quiet();
        const double delay = 37.3e-9;
        const AScan one = synthesize_ascan({Echo{delay, 1.0, {}}}, cfg);
        const auto env = envelope(one.samples);
        CHECK(std::abs(double(argmax(env)) - delay * cfg.sample_rate) <= 1.0);

        const AScan two = synthesize_ascan({Echo{20e-9, 1.0, {}}, Echo{40e-9, 0.6, {}}}, cfg);
        const auto env2 = envelope(two.samples);
        const auto mid = std::size_t(30e-9 * cfg.sample_rate);
        const auto first = argmax(std::vector<double>(env2.begin(), env2.begin() + std::ptrdiff_t(mid)));
        const auto second = mid + argmax(std::vector<double>(env2.begin() + std::ptrdiff_t(mid), env2.end()));
        CHECK(std::abs(double(first) - 20e-9 * cfg.sample_rate) <= 1.0);
        CHECK(std::abs(double(second) - 40e-9 * cfg.sample_rate) <= 1.0);
        CHECK(env2[(first + second) / 2] < 0.05 * env2[second]);

        const AScan silent = synthesize_ascan({Echo{20e-9, 0.0, {}}}, cfg);
        CHECK(std::all_of(silent.samples.begin(), silent.samples.end(), [](double s) { return s == 0.0; }));

        CHECK_THROWS_AS(synthesize_ascan({Echo{70e-9, 1.0, {}}}, cfg), InputError);
    }

    TEST_CASE("ground gating")
    {
        const auto cfg = quiet();
        const double range = 6.0;
        const double delay = 2.0 * range / speed_of_light;
        AScan scan = synthesize_ascan({Echo{delay, 1.0, {}}}, cfg);
        scan.altitude_est = range;
        const GatedSegment seg = isolate_ground_return(scan);
        const double center = seg.gate_start + 0.5 * seg.gate_length;
        CHECK(std::abs(center - delay) * cfg.sample_rate <= 1.0);
        CHECK(std::abs(seg.peak_time - delay) * cfg.sample_rate <= 1.0);
        CHECK(seg.gate_length == doctest::Approx(3.0 / 550e6).epsilon(0.01));
        CHECK(segment_range(seg) == doctest::Approx(range).epsilon(1e-4));

        // weaker canopy clutter 0.3 m earlier still lies in the search interval
        AScan cluttered = synthesize_ascan({Echo{delay - 0.6 / speed_of_light, 0.4, {}}, Echo{delay, 1.0, {}}}, cfg);
        cluttered.altitude_est = range;
        CHECK(std::abs(isolate_ground_return(cluttered).peak_time - delay) * cfg.sample_rate <= 1.0);

        AScan off = scan;
        off.altitude_est = range + 0.1;
        const GatedSegment seg_off = isolate_ground_return(off);
        CHECK(seg_off.start_index == seg.start_index);
        CHECK(seg_off.samples == seg.samples);

        SynthesisConfig noisy = cfg;
        noisy.noise_level = 0.01;
        AScan empty = synthesize_ascan({}, noisy);
        empty.altitude_est = range;
        CHECK_THROWS_AS(isolate_ground_return(empty), NoPeakFound);
    }

    TEST_CASE("channel response")
    {
        auto cfg = quiet();
        const double delay = 40e-9;
        AScan scan = synthesize_ascan({Echo{delay, 1.0, {}}}, cfg);
        scan.altitude_est = delay * speed_of_light / 2.0;
        GateConfig plain;
        plain.taper = false;
        const GatedSegment seg = isolate_ground_return(scan, plain);
        const auto grid = FrequencyGrid::linear(300e6, 800e6, 51);
        const auto resp = channel_response(seg, grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(std::abs(resp.values[i]) == doctest::Approx(ricker_spectrum(550e6, grid[i])).epsilon(1e-3));

        GatedSegment zero = seg;
        std::fill(zero.samples.begin(), zero.samples.end(), 0.0);
        for (const auto &g : channel_response(zero, grid).values)
            CHECK(std::abs(g) == 0.0);

        GatedSegment shifted = seg;
        shifted.gate_start += 5e-9;
        shifted.start_index += 70;
        const auto moved = channel_response(shifted, grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(std::abs(moved.values[i]) == doctest::Approx(std::abs(resp.values[i])).epsilon(1e-12));
    }

    TEST_CASE("plate reference")
    {
        // 4 pi l^4 f^2 / c^2
        const double c = 299792458.0;
        CHECK(plate_rcs(0.9, 500e6) == doctest::Approx(4.0 * pi * std::pow(0.9, 4) * 500e6 * 500e6 / (c * c)));
        CHECK(plate_rcs(0.9, 500e6) == doctest::Approx(22.93).epsilon(1e-3));
        CHECK(plate_rcs(0.9, 1000e6) == doctest::Approx(4.0 * plate_rcs(0.9, 500e6)));
        CHECK(plate_rcs(1.8, 500e6) == doctest::Approx(16.0 * plate_rcs(0.9, 500e6)));
        CHECK_THROWS_AS(plate_rcs(0.0, 500e6), InputError);
    }

    TEST_CASE("calibration round-trip on a single plate scan")
    {
        const auto grid = FrequencyGrid::default_band();
        const PlateScan ps = test::plate_scans(0.9, 1).front();
        const auto cal = derive_calibration({ps}, 0.9, grid);
        CHECK(cal.scan_count == 1);
        CHECK(cal.valid_low <= 300e6);
        CHECK(cal.valid_high >= 800e6);
        const GatedSegment seg = isolate_return(ps.scan, ps.range);
        const auto m = measured_rcs(channel_response(seg, cal.valid_grid()), ps.range, cal);
        for (std::size_t i = 0; i < m.grid.size(); ++i)
            CHECK(m.values[i] == doctest::Approx(plate_rcs(0.9, m.grid[i])).epsilon(1e-6));

        // halving |G| quarters the RCS
        auto half = channel_response(seg, cal.valid_grid());
        for (auto &g : half.values)
            g *= 0.5;
        const auto q = measured_rcs(half, ps.range, cal);
        for (std::size_t i = 0; i < q.grid.size(); ++i)
            CHECK(q.values[i] == doctest::Approx(0.25 * m.values[i]).epsilon(1e-12));

        // frequencies outside the calibrated band are rejected
        ChannelResponse wide{FrequencyGrid({100e6}), {1.0}};
        CHECK_THROWS_AS(measured_rcs(wide, 6.0, cal), InputError);
    }

    TEST_CASE("multi-range calibration agrees with a single range")
    {
        const auto grid = FrequencyGrid::default_band();
        const auto scans = test::plate_scans(0.9, 7);
        const auto all = derive_calibration(scans, 0.9, grid);
        const auto single = derive_calibration({scans[3]}, 0.9, grid);
        CHECK(all.scan_count == 7);
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (grid[i] >= all.valid_low && grid[i] <= all.valid_high)
                CHECK(all.values[i] == doctest::Approx(single.values[i]).epsilon(1e-3));
    }

    TEST_CASE("calibration transfers to a new range within 1 dB")
    {
        const auto cal = test::calibration();
        const auto m = ground_rcs_from_scan(simulate_plate_scan(0.9, 7.7, test::settings(9)), cal);
        for (std::size_t i = 0; i < m.grid.size(); ++i)
            if (m.grid[i] >= 300e6 && m.grid[i] <= 800e6)
                CHECK(std::abs(to_db(m.values[i] / plate_rcs(0.9, m.grid[i]))) < 1.0);
    }

    TEST_CASE("calibrated scene spectrum matches the forward model")
    {
        const auto cal = test::calibration();
        for (const CanopyDescriptor &canopy : {CanopyDescriptor{}, test::corn_canopy()})
        {
            const Scene scene = test::make_scene(0.17, canopy);
            const auto m = test::measure(scene, cal);
            const auto truth = scene_rcs(scene.canopy, scene.soil, scene.view, m.grid);
            for (std::size_t i = 0; i < m.grid.size(); ++i)
                CHECK(std::abs(to_db(m.values[i] / truth.values[i])) < 0.5);
        }
    }

    TEST_CASE("measured RCS is invariant to an overall gain present in both scans")
    {
        const auto grid = FrequencyGrid::default_band();
        auto plates = test::plate_scans(0.9, 3);
        const Scene scene = test::make_scene(0.2, test::soybean_canopy());
        AScan ground = simulate_scene_scan(scene, test::settings());
        const auto base = ground_rcs_from_scan(ground, derive_calibration(plates, 0.9, grid));
        for (auto &p : plates)
            for (double &s : p.scan.samples)
                s *= 3.5;
        for (double &s : ground.samples)
            s *= 3.5;
        const auto scaled = ground_rcs_from_scan(ground, derive_calibration(plates, 0.9, grid));
        for (std::size_t i = 0; i < base.grid.size(); ++i)
            CHECK(scaled.values[i] == doctest::Approx(base.values[i]).epsilon(1e-9));
    }

    TEST_CASE("A-scan validation")
    {
        AScan a;
        CHECK_THROWS_AS(a.validate(), InputError);
        a.samples = {0.0, 1.0};
        a.sample_rate = 1e9;
        CHECK_THROWS_AS(a.validate(), InputError);
    }
}
