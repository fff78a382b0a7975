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

#ifndef NADIRSM_SYNTH_HPP
#define NADIRSM_SYNTH_HPP

#include "nadirsm/canopy_rt.hpp"
#include "nadirsm/ground_rt.hpp"
#include "nadirsm/radar_dsp.hpp"

#include <functional>

// Synthetic radar scenes. A target with backscatter amplitude a(f), |a|^2 = sigma(f), at range R
// produces the echo spectrum
//     E(f) = W(f) H(f) a(f) f_ref / (i f) / R^2
// where W is the Ricker spectrum and H the hardware response. f^2 R^4 |E|^2 is proportional to
// sigma, so a calibrated pipeline recovers sigma exactly in the noiseless limit. The phase of a(f)
// matters for the pulse shape: a flat reflector has a real amplitude, a plate in physical optics
// i sqrt(sigma). Both keep the echo compact in time.

namespace nadirsm
{
    // Smooth zero-phase response with a mild ripple, standing in for antennas and receiver
    std::complex<double> default_hardware_response(double f_hz);

    struct HardwareModel
    {
        Shaping response = default_hardware_response;
        double reference_frequency = default_center_frequency; // [Hz]
        double coupling_gain = 0.5;     // direct antenna-to-antenna pulse, 0 disables it
        double coupling_delay = 1.0e-9; // [s]
    };

    struct ScanSettings
    {
        SynthesisConfig synthesis;
        HardwareModel hardware;
    };

    using Amplitude = std::function<std::complex<double>(double f_hz)>;

    // Echo of a point-like target with the given backscatter amplitude
    Echo target_echo(double range, Amplitude amplitude, const HardwareModel &hw);

    // Broadside plate at `range` plus a weak ground return one meter behind it
    AScan simulate_plate_scan(double plate_side, double range, const ScanSettings &settings);

    struct Scene
    {
        SoilDescriptor soil;
        CanopyDescriptor canopy;
        ViewGeometry view;
        double canopy_top_rcs = 0.02; // flat clutter from the canopy top [m^2]
    };

    // Nadir scan over the scene: direct coupling, canopy-top clutter and the ground return
    // shaped by scene_rcs_at. The trace is lengthened when the ground lies beyond its end.
    AScan simulate_scene_scan(const Scene &scene, const ScanSettings &settings);
}

#endif
