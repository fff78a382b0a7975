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

#ifndef NADIRSM_TEST_FIXTURES_HPP
#define NADIRSM_TEST_FIXTURES_HPP

#include "nadirsm/canopy_rt.hpp"
#include "nadirsm/crop_synth.hpp"
#include "nadirsm/radar_dsp.hpp"
#include "nadirsm/retrieval.hpp"
#include "nadirsm/synth.hpp"

#include <cstdint>
#include <random>
#include <vector>

// Shared scenes and helpers for the unit and acceptance suites

namespace nadirsm::test
{
    inline const ComplexPermittivity vegetation_eps{15.0, 4.5};

    // Mature corn: stalks plus elongated leaves
    CanopyDescriptor corn_canopy(const ComplexPermittivity &eps = vegetation_eps);

    // Soybean: small disks only
    CanopyDescriptor soybean_canopy(const ComplexPermittivity &eps = vegetation_eps);

    // Dense, wet soybean-like layer with strong attenuation
    CanopyDescriptor dense_wet_canopy();

    ComplexPermittivity soil_eps(double vwc, double loss_tangent = 0.15);

    Scene make_scene(double vwc, const CanopyDescriptor &canopy, double altitude = 6.0);

    ScanSettings settings(std::uint64_t seed = 1, double noise = 0.0);

    // Plate scans at 7 ranges evenly spread over 6-9 m
    std::vector<PlateScan> plate_scans(double side = 0.9, std::size_t n = 7, double noise = 0.0,
                                       std::uint64_t seed = 100);

    CalibrationFactor calibration(const FrequencyGrid &grid = FrequencyGrid::default_band());

    // Scan, gate and calibrate one scene
    RcsSpectrum measure(const Scene &scene, const CalibrationFactor &cal, std::uint64_t seed = 1);

    // Geometry the scene was built with, altitude taken from the measured range
    ViewGeometry view_for(const RcsSpectrum &spectrum, const Scene &scene);

    // 1 dB (sd) log-normal multiplicative noise on every bin
    RcsSpectrum perturb(const RcsSpectrum &s, std::mt19937_64 &rng, double sd_db = 1.0);

    // LiDAR tiles with known structure
    std::vector<CropFieldSpec> crop_tiles();
}

#endif
