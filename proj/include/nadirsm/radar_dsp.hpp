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

#ifndef NADIRSM_RADAR_DSP_HPP
#define NADIRSM_RADAR_DSP_HPP

#include "nadirsm/em_core.hpp"
#include "nadirsm/ground_rt.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nadirsm
{
    inline constexpr double default_sample_rate = 14e9;       // [Hz]
    inline constexpr double default_center_frequency = 550e6; // Ricker center [Hz]

    // One time-domain radar trace ("A-scan")
    struct AScan
    {
        std::vector<double> samples;
        double sample_rate = default_sample_rate; // [Hz]
        double altitude_est = 0.0;                // rough range to the target, +-0.1 m [m]
        std::string location;

        void validate(double band_high_hz = 900e6) const;
        double duration() const { return double(samples.size()) / sample_rate; }
    };

    struct GatedSegment
    {
        std::vector<double> samples; // tapered window
        double sample_rate = default_sample_rate;
        std::size_t start_index = 0; // first sample of the gate in the parent scan
        double gate_start = 0.0;     // [s]
        double gate_length = 0.0;    // [s]
        double peak_time = 0.0;      // envelope maximum, sub-sample refined [s]
    };

    struct ChannelResponse
    {
        FrequencyGrid grid;
        std::vector<std::complex<double>> values;
    };

    struct CalibrationFactor
    {
        FrequencyGrid grid;
        std::vector<double> values; // C(f)
        double plate_side = 0.0;    // [m]
        std::vector<double> reference_ranges;
        std::size_t scan_count = 0;
        double valid_low = 0.0;  // valid sub-band [Hz]
        double valid_high = 0.0;

        void validate() const;
        FrequencyGrid valid_grid() const { return grid.sub_band(valid_low, valid_high); }
        double at(double f_hz) const; // exact grid lookup, throws if f is not a grid point
    };

    struct GateConfig
    {
        double center_frequency = default_center_frequency;
        double search_half_width = 0.5; // [m] of range around the altitude estimate
        double window_periods = 1.5;    // half-window in units of 1 / f_c; gate = 2 * 1.5 / f_c
        double taper_fraction = 0.1;    // raised-cosine taper over this fraction of the gate
        bool taper = true;
        double noise_factor = 3.0;      // peak must exceed this multiple of the noise floor
    };

    // r(t) = (1 - 2 pi^2 fc^2 t^2) exp(-pi^2 fc^2 t^2)
    double ricker(double center_f_hz, double t);

    // Continuous Fourier transform of ricker(): (2 / sqrt(pi)) f^2 / fc^3 exp(-f^2 / fc^2)
    double ricker_spectrum(double center_f_hz, double f_hz);

    using Shaping = std::function<std::complex<double>(double f_hz)>;

    struct Echo
    {
        double delay = 0.0; // [s]
        double gain = 1.0;
        Shaping shaping;    // optional spectral shaping on top of the Ricker pulse
    };

    struct SynthesisConfig
    {
        double sample_rate = default_sample_rate;
        double duration = 80e-9; // [s]
        double center_frequency = default_center_frequency;
        double noise_level = 0.0; // RMS of additive white noise
        std::uint64_t seed = 1;
    };

    // Superposition of delayed, scaled, shaped Ricker pulses plus white noise. Pulses are
    // synthesized in the frequency domain, so fractional delays are exact.
    AScan synthesize_ascan(const std::vector<Echo> &echoes, const SynthesisConfig &cfg);

    // |analytic signal|, quadrature part from a 513-tap windowed FIR Hilbert transformer
    std::vector<double> envelope(std::span<const double> samples);

    // Gate around the dominant envelope peak inside [2 (R - w) / c, 2 (R + w) / c], R = scan.altitude_est
    GatedSegment isolate_ground_return(const AScan &scan, const GateConfig &cfg = {});
    GatedSegment isolate_return(const AScan &scan, double range_estimate, const GateConfig &cfg = {});

    // Range implied by the gated peak time, c t / 2
    double segment_range(const GatedSegment &segment);

    // G(f) = dt * sum_n g[n] exp(-i 2 pi f n dt); phase referenced to the gate start.
    // Equivalent to sampling the transform of the infinitely zero-padded segment.
    ChannelResponse channel_response(const GatedSegment &segment, const FrequencyGrid &grid);

    // Broadside square plate: 4 pi l^4 / lambda^2
    double plate_rcs(double side, double f_hz);

    struct PlateScan
    {
        AScan scan;
        double range = 0.0; // known plate range r_r [m]
    };

    // C(f) = f^2 r_r^4 |G_r(f)|^2 / sigma_r averaged over scans; the valid sub-band is the
    // contiguous run around the spectral peak where every scan keeps |G_r| above 5% of its peak.
    CalibrationFactor derive_calibration(const std::vector<PlateScan> &plate_scans, double plate_side,
                                         const FrequencyGrid &grid, const GateConfig &cfg = {},
                                         double valid_threshold = 0.05);

    // sigma_m(f) = f^2 R^4 |G(f)|^2 / C(f). Every response frequency must be a calibration grid
    // point inside the valid sub-band.
    RcsSpectrum measured_rcs(const ChannelResponse &resp, double range, const CalibrationFactor &cal);

    // Gate, transform and calibrate one ground scan over the calibration's valid band.
    // The range in the radar equation comes from the gated time of flight.
    RcsSpectrum ground_rcs_from_scan(const AScan &scan, const CalibrationFactor &cal, const GateConfig &cfg = {});
}

#endif
