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

#include "nadirsm/em_core.hpp"
#include "nadirsm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nadirsm
{
    ComplexPermittivity::ComplexPermittivity(double real_part, double imag_part)
        : re_(real_part), im_(imag_part)
    {
        if (!std::isfinite(real_part) || !std::isfinite(imag_part))
            throw InputError("permittivity must be finite");
        if (real_part < 1.0)
            throw InputError("permittivity real part must be >= 1, got " + std::to_string(real_part));
        if (imag_part < 0.0)
            throw InputError("permittivity loss component must be >= 0, got " + std::to_string(imag_part));
    }

    ComplexPermittivity ComplexPermittivity::from_loss_tangent(double real_part, double loss_tangent)
    {
        return {real_part, real_part * loss_tangent};
    }

    std::complex<double> ComplexPermittivity::refractive_index() const
    {
        // std::sqrt takes the branch cut along the negative real axis, so Im >= 0 for Im(eps) >= 0
        return std::sqrt(value());
    }

    FrequencyGrid::FrequencyGrid(std::vector<double> frequencies_hz, double band_low_hz, double band_high_hz)
        : f_(std::move(frequencies_hz)), lo_(band_low_hz), hi_(band_high_hz)
    {
        if (f_.empty())
            throw InputError("frequency grid is empty");
        if (!(lo_ > 0.0) || !(hi_ >= lo_))
            throw InputError("frequency band limits must satisfy 0 < low <= high");
        for (std::size_t i = 0; i < f_.size(); ++i)
        {
            if (f_[i] < lo_ || f_[i] > hi_)
                throw InputError("frequency " + std::to_string(f_[i]) + " Hz outside band");
            if (i > 0 && !(f_[i] > f_[i - 1]))
                throw InputError("frequency grid must be strictly increasing");
        }
    }

    FrequencyGrid::FrequencyGrid(std::vector<double> frequencies_hz)
        : FrequencyGrid(frequencies_hz, frequencies_hz.empty() ? 1.0 : frequencies_hz.front(),
                        frequencies_hz.empty() ? 1.0 : frequencies_hz.back())
    {
    }

    FrequencyGrid FrequencyGrid::linear(double low_hz, double high_hz, std::size_t n)
    {
        if (n == 0)
            throw InputError("frequency grid needs at least one point");
        std::vector<double> f(n);
        if (n == 1)
            f[0] = 0.5 * (low_hz + high_hz);
        else
            for (std::size_t i = 0; i < n; ++i)
                f[i] = low_hz + (high_hz - low_hz) * double(i) / double(n - 1);
        // pin the end points against rounding
        if (n > 1)
            f.back() = high_hz;
        return {std::move(f), low_hz, high_hz};
    }

    FrequencyGrid FrequencyGrid::default_band()
    {
        return linear(200e6, 900e6, 100);
    }

    FrequencyGrid FrequencyGrid::sub_band(double low_hz, double high_hz) const
    {
        std::vector<double> kept;
        for (double f : f_)
            if (f >= low_hz && f <= high_hz)
                kept.push_back(f);
        if (kept.empty())
            throw InputError("empty frequency sub-band [" + std::to_string(low_hz) + ", " +
                             std::to_string(high_hz) + "] Hz");
        return {std::move(kept), std::max(lo_, low_hz), std::min(hi_, high_hz)};
    }

    SoilMoisture::SoilMoisture(double vwc) : vwc_(vwc)
    {
        if (!(vwc >= 0.0 && vwc <= 1.0))
            throw InputError("volumetric water content must lie in [0, 1], got " + std::to_string(vwc));
    }

    double fresnel_reflectivity(const ComplexPermittivity &eps_soil)
    {
        const std::complex<double> n = eps_soil.refractive_index();
        return std::norm((1.0 - n) / (1.0 + n));
    }

    SoilMoisture topp_vwc(double eps_real, const ToppCoefficients &coef)
    {
        if (!(eps_real >= 1.0))
            throw InputError("Topp conversion needs permittivity >= 1");
        return SoilMoisture(std::clamp(coef.evaluate(eps_real), 0.0, 1.0));
    }

    double topp_permittivity(SoilMoisture vwc, const ToppCoefficients &coef)
    {
        double lo = topp_bracket_low;
        double hi = topp_bracket_high;
        const double target = vwc.vwc();
        if (target > coef.evaluate(hi))
            throw NoSolution("no permittivity in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                             "] maps to vwc " + std::to_string(target));
        if (target <= coef.evaluate(lo))
            return lo;

        // the polynomial is increasing on the bracket, so plain bisection converges
        for (int it = 0; it < 200; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            if (coef.evaluate(mid) < target)
                lo = mid;
            else
                hi = mid;
            if (hi - lo < 1e-12)
                break;
        }
        return 0.5 * (lo + hi);
    }

    double wavenumber(double f_hz)
    {
        return 2.0 * pi * f_hz / speed_of_light;
    }

    double to_db(double linear) { return 10.0 * std::log10(linear); }
    double from_db(double db) { return std::pow(10.0, db / 10.0); }
}
