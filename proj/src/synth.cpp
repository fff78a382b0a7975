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

#include "nadirsm/synth.hpp"
#include "nadirsm/error.hpp"

#include <cmath>

namespace nadirsm
{
    std::complex<double> default_hardware_response(double f_hz)
    {
        const double ripple = 1.0 + 0.25 * std::cos(2.0 * pi * f_hz * 0.5e-9);
        const double x = f_hz / 1.5e9;
        return ripple * std::exp(-x * x);
    }

    Echo target_echo(double range, Amplitude amplitude, const HardwareModel &hw)
    {
        if (!(range > 0.0))
            throw InputError("target range must be > 0");
        const double r2 = range * range;
        const Shaping response = hw.response;
        const double f_ref = hw.reference_frequency;
        Echo e;
        e.delay = 2.0 * range / speed_of_light;
        e.shaping = [=](double f) {
            const std::complex<double> receiver = f_ref / std::complex<double>(0.0, f);
            return response(f) * amplitude(f) * receiver / r2;
        };
        return e;
    }

    namespace
    {
        SynthesisConfig long_enough(SynthesisConfig cfg, double max_range)
        {
            const double need = 2.0 * (max_range + 1.5) / speed_of_light;
            cfg.duration = std::max(cfg.duration, need);
            return cfg;
        }

        void add_coupling(std::vector<Echo> &echoes, const HardwareModel &hw)
        {
            if (hw.coupling_gain == 0.0)
                return;
            Echo e;
            e.delay = hw.coupling_delay;
            e.gain = hw.coupling_gain;
            e.shaping = hw.response;
            echoes.push_back(std::move(e));
        }
    }

    AScan simulate_plate_scan(double plate_side, double range, const ScanSettings &settings)
    {
        if (!(plate_side > 0.0))
            throw InputError("plate side must be > 0");
        std::vector<Echo> echoes;
        add_coupling(echoes, settings.hardware);
        echoes.push_back(target_echo(range, [plate_side](double f) {
                                         return std::complex<double>(0.0, std::sqrt(plate_rcs(plate_side, f)));
                                     },
                                     settings.hardware));
        echoes.push_back(target_echo(range + 1.0, [](double) { return std::complex<double>(1.0); }, settings.hardware));

        AScan scan = synthesize_ascan(echoes, long_enough(settings.synthesis, range + 1.0));
        scan.altitude_est = range;
        return scan;
    }

    AScan simulate_scene_scan(const Scene &scene, const ScanSettings &settings)
    {
        scene.view.validate();
        scene.soil.validate();
        scene.canopy.validate();
        const double range = scene.view.altitude;

        std::vector<Echo> echoes;
        add_coupling(echoes, settings.hardware);
        if (scene.canopy.height > 0.0 && !scene.canopy.empty() && scene.canopy_top_rcs > 0.0)
        {
            const double top = scene.canopy_top_rcs;
            echoes.push_back(target_echo(range - scene.canopy.height, [top](double) { return std::complex<double>(std::sqrt(top)); },
                                         settings.hardware));
        }
        const Scene s = scene;
        echoes.push_back(target_echo(
            range, [s](double f) { return std::complex<double>(std::sqrt(scene_rcs_at(s.canopy, s.soil, s.view, f))); }, settings.hardware));

        AScan scan = synthesize_ascan(echoes, long_enough(settings.synthesis, range));
        scan.altitude_est = range;
        return scan;
    }
}
