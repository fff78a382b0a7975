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

#ifndef NADIRSM_EM_CORE_HPP
#define NADIRSM_EM_CORE_HPP

#include <complex>
#include <numbers>
#include <span>
#include <vector>

namespace nadirsm
{
    inline constexpr double speed_of_light = 299792458.0; // [m/s]
    inline constexpr double pi = std::numbers::pi;

    inline constexpr double deg2rad(double deg) { return deg * pi / 180.0; }
    inline constexpr double rad2deg(double rad) { return rad * 180.0 / pi; }

    // Relative permittivity eps = real_part + i * imag_part.
    // The loss component is stored as a positive magnitude; invariants are checked on construction.
    class ComplexPermittivity
    {
    public:
        ComplexPermittivity() = default; // vacuum
        ComplexPermittivity(double real_part, double imag_part = 0.0);

        // Lossy medium described by a fixed loss tangent, imag = tan_delta * real
        static ComplexPermittivity from_loss_tangent(double real_part, double loss_tangent);

        double real_part() const { return re_; }
        double imag_part() const { return im_; }
        std::complex<double> value() const { return {re_, im_}; }

        // Principal square root; the imaginary part is non-negative for lossy media
        std::complex<double> refractive_index() const;

        bool operator==(const ComplexPermittivity &) const = default;

    private:
        double re_ = 1.0;
        double im_ = 0.0;
    };

    // Strictly increasing list of frequencies inside [band_low, band_high]
    class FrequencyGrid
    {
    public:
        FrequencyGrid(std::vector<double> frequencies_hz, double band_low_hz, double band_high_hz);
        explicit FrequencyGrid(std::vector<double> frequencies_hz); // band = [front, back]

        // n evenly spaced points covering [low, high] inclusive (n = 1 gives the band center)
        static FrequencyGrid linear(double low_hz, double high_hz, std::size_t n);

        // Default radar band: 100 points over 200-900 MHz
        static FrequencyGrid default_band();

        std::span<const double> frequencies() const { return f_; }
        std::size_t size() const { return f_.size(); }
        double operator[](std::size_t i) const { return f_[i]; }
        double band_low() const { return lo_; }
        double band_high() const { return hi_; }

        // Points with low <= f <= high; throws InputError if none remain
        FrequencyGrid sub_band(double low_hz, double high_hz) const;

        bool operator==(const FrequencyGrid &) const = default;

    private:
        std::vector<double> f_;
        double lo_ = 0.0;
        double hi_ = 0.0;
    };

    class SoilMoisture
    {
    public:
        explicit SoilMoisture(double vwc);
        double vwc() const { return vwc_; }

    private:
        double vwc_;
    };

    // Cubic moisture-permittivity polynomial vwc = a0 + a1 e + a2 e^2 + a3 e^3.
    // Defaults are the generic mineral-soil fit of Topp et al. (1980).
    struct ToppCoefficients
    {
        double a0 = -5.3e-2;
        double a1 = 2.92e-2;
        double a2 = -5.5e-4;
        double a3 = 4.3e-6;

        double evaluate(double eps_real) const { return a0 + eps_real * (a1 + eps_real * (a2 + eps_real * a3)); }
    };

    // Bracket used when inverting the Topp polynomial
    inline constexpr double topp_bracket_low = 1.5;
    inline constexpr double topp_bracket_high = 50.0;

    // Power reflectivity at normal incidence, |(1 - sqrt(eps)) / (1 + sqrt(eps))|^2
    double fresnel_reflectivity(const ComplexPermittivity &eps_soil);

    // Clamped to [0, 1]; negative polynomial values below the calibration range map to 0
    SoilMoisture topp_vwc(double eps_real, const ToppCoefficients &coef = {});

    // Bisection on [topp_bracket_low, topp_bracket_high] to |topp_vwc(eps) - vwc| <= 1e-6.
    // Throws NoSolution when vwc lies above the polynomial's value at the bracket top.
    double topp_permittivity(SoilMoisture vwc, const ToppCoefficients &coef = {});

    // k = 2 pi f / c  [rad/m]
    double wavenumber(double f_hz);

    // Linear power <-> dB
    double to_db(double linear);
    double from_db(double db);
}

#endif
