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

#include "nadirsm/ground_rt.hpp"
#include "nadirsm/error.hpp"

#include <cmath>

namespace nadirsm
{
    void SoilDescriptor::validate() const
    {
        if (!(roughness_height >= 0.0))
            throw InputError("roughness height must be >= 0");
        if (!(scattering_beamwidth > 0.0))
            throw InputError("scattering beamwidth must be > 0");
        if (correlation_length && !(*correlation_length > 0.0))
            throw InputError("correlation length must be > 0");
    }

    double SoilDescriptor::effective_correlation_length() const
    {
        return correlation_length ? *correlation_length : 10.0 * roughness_height;
    }

    void ViewGeometry::validate() const
    {
        if (!(altitude > 0.0))
            throw InputError("altitude must be > 0");
        if (!(antenna_halfpower_beamwidth > 0.0))
            throw InputError("antenna half-power beamwidth must be > 0");
        if (!(effective_beamwidth > 0.0) || effective_beamwidth > antenna_halfpower_beamwidth)
            throw InputError("effective beamwidth must lie in (0, half-power beamwidth]");
    }

    void RcsSpectrum::validate() const
    {
        if (values.size() != grid.size())
            throw InputError("RCS spectrum length does not match its frequency grid");
        for (double v : values)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw InputError("RCS values must be finite and non-negative");
    }

    std::vector<double> RcsSpectrum::dbsm() const
    {
        std::vector<double> out(values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            out[i] = to_db(values[i]);
        return out;
    }

    double roughness_attenuation(double roughness_height, double f_hz)
    {
        const double a = 4.0 * pi * roughness_height * f_hz / speed_of_light;
        return std::exp(-a * a);
    }

    double coherent_rcs(const SoilDescriptor &soil, double f_hz, double theta_i, double area)
    {
        soil.validate();
        if (!(area > 0.0))
            throw InputError("illuminated area must be > 0");
        const double beta2 = soil.scattering_beamwidth * soil.scattering_beamwidth;
        const double gamma = fresnel_reflectivity(soil.permittivity);
        // decaying angular lobe; the growing exponent would contradict the specular-lobe physics
        return area * gamma / beta2 * roughness_attenuation(soil.roughness_height, f_hz) *
               std::exp(-theta_i * theta_i / beta2);
    }

    double incoherent_rcs(const SoilDescriptor &soil, double f_hz, double theta_i, double area)
    {
        soil.validate();
        if (!(area > 0.0))
            throw InputError("illuminated area must be > 0");
        const double s = soil.roughness_height;
        if (s == 0.0)
            return 0.0;
        const double k = wavenumber(f_hz);
        if (k * s >= 0.3)
            throw ValidityError("small-perturbation model needs k s < 0.3, got " + std::to_string(k * s));

        const double l = soil.effective_correlation_length();
        const double cos_t = std::cos(theta_i);
        const double sin_t = std::sin(theta_i);

        // horizontal Fresnel amplitude coefficient
        const std::complex<double> root = std::sqrt(soil.permittivity.value() - sin_t * sin_t);
        const double r_h = std::norm((cos_t - root) / (cos_t + root));

        // exponential correlation: W(K) = l^2 / (1 + (K l)^2)^(3/2)
        const double kl = 2.0 * k * sin_t * l;
        const double spectrum = l * l / std::pow(1.0 + kl * kl, 1.5);

        const double k2 = k * k;
        const double sigma0 = 8.0 * k2 * k2 * s * s * std::pow(cos_t, 4) * r_h * spectrum;
        return sigma0 * area;
    }

    double effective_area(const ViewGeometry &view)
    {
        view.validate();
        const double r = view.altitude * std::tan(0.5 * view.effective_beamwidth);
        return pi * r * r;
    }

    double scene_rcs_at(const CanopyDescriptor &canopy, const SoilDescriptor &soil, const ViewGeometry &view,
                        double f_hz)
    {
        const double theta = view.effective_beamwidth;
        const double sigma = coherent_rcs(soil, f_hz, theta, effective_area(view));
        if (canopy.empty())
            return sigma;
        const double t = transmissivity(canopy, f_hz, theta);
        return t * t * sigma;
    }

    RcsSpectrum scene_rcs(const CanopyDescriptor &canopy, const SoilDescriptor &soil, const ViewGeometry &view,
                          const FrequencyGrid &grid)
    {
        canopy.validate();
        soil.validate();
        RcsSpectrum out{grid, std::vector<double>(grid.size()), view.altitude, {}};
        for (std::size_t i = 0; i < grid.size(); ++i)
            out.values[i] = scene_rcs_at(canopy, soil, view, grid[i]);
        return out;
    }

    std::vector<IncidenceRow> rcs_vs_incidence(const SoilDescriptor &soil, const CanopyDescriptor &canopy,
                                               const ViewGeometry &view, double f_hz,
                                               const std::vector<double> &theta_range)
    {
        const double area = effective_area(view);
        std::vector<IncidenceRow> rows;
        rows.reserve(theta_range.size());
        for (double theta : theta_range)
        {
            const double t = transmissivity(canopy, f_hz, theta);
            rows.push_back({theta, t * t * coherent_rcs(soil, f_hz, theta, area),
                            t * t * incoherent_rcs(soil, f_hz, theta, area)});
        }
        return rows;
    }
}
