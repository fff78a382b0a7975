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

#ifndef NADIRSM_GROUND_RT_HPP
#define NADIRSM_GROUND_RT_HPP

#include "nadirsm/canopy_rt.hpp"
#include "nadirsm/em_core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nadirsm
{
    inline constexpr double default_scattering_beamwidth = deg2rad(5.0);
    inline constexpr double default_effective_beamwidth = deg2rad(2.0);
    inline constexpr double default_halfpower_beamwidth = deg2rad(60.0);

    struct SoilDescriptor
    {
        ComplexPermittivity permittivity;
        double roughness_height = 0.01;                            // s [m]
        double scattering_beamwidth = default_scattering_beamwidth; // beta_c [rad]
        std::optional<double> correlation_length;                  // [m], incoherent term only; default 10 s

        void validate() const;
        double effective_correlation_length() const;
    };

    struct ViewGeometry
    {
        double altitude = 6.0;                                        // R [m]
        double effective_beamwidth = default_effective_beamwidth;     // theta_e [rad]
        double antenna_halfpower_beamwidth = default_halfpower_beamwidth; // [rad]

        void validate() const;
    };

    // Radar cross section per frequency, linear m^2
    struct RcsSpectrum
    {
        FrequencyGrid grid;
        std::vector<double> values;
        std::optional<double> range_m; // range the spectrum was measured or simulated at
        std::string location;

        void validate() const;
        std::vector<double> dbsm() const;
    };

    // Kirchhoff coherent term: A Gamma / beta_c^2 exp(-16 pi^2 s^2 f^2 / c^2) exp(-theta^2 / beta_c^2)
    double coherent_rcs(const SoilDescriptor &soil, double f_hz, double theta_i, double area);

    // exp(-16 pi^2 s^2 f^2 / c^2)
    double roughness_attenuation(double roughness_height, double f_hz);

    // First-order small-perturbation backscatter (HH) with an exponential correlation function,
    // times the area. Throws ValidityError when k s >= 0.3.
    double incoherent_rcs(const SoilDescriptor &soil, double f_hz, double theta_i, double area);

    // pi (R tan(theta_e / 2))^2
    double effective_area(const ViewGeometry &view);

    // Upsilon^2(theta_e, f) * sigma_coh(theta_e, f) at one frequency
    double scene_rcs_at(const CanopyDescriptor &canopy, const SoilDescriptor &soil, const ViewGeometry &view,
                        double f_hz);

    // scene_rcs_at over the grid
    RcsSpectrum scene_rcs(const CanopyDescriptor &canopy, const SoilDescriptor &soil, const ViewGeometry &view,
                          const FrequencyGrid &grid);

    struct IncidenceRow
    {
        double theta_i;        // [rad]
        double coherent;       // [m^2]
        double incoherent;     // [m^2]
    };

    // Both ground terms over a range of incidence angles at one frequency, each attenuated by the
    // two-way canopy transmissivity at that angle. Area fixed by the view geometry.
    std::vector<IncidenceRow> rcs_vs_incidence(const SoilDescriptor &soil, const CanopyDescriptor &canopy,
                                               const ViewGeometry &view, double f_hz,
                                               const std::vector<double> &theta_range);
}

#endif
