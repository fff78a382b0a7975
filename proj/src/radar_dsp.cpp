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

#include "nadirsm/radar_dsp.hpp"
#include "nadirsm/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>

namespace nadirsm
{
    namespace
    {
        // The FFTW planner is not re-entrant
        std::mutex &planner_mutex()
        {
            static std::mutex m;
            return m;
        }

        struct FftwBuffer
        {
            explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)), size(n)
            {
                if (!data)
                    throw std::bad_alloc();
                std::fill_n(reinterpret_cast<double *>(data), 2 * n, 0.0);
            }
            ~FftwBuffer() { fftw_free(data); }
            FftwBuffer(const FftwBuffer &) = delete;
            FftwBuffer &operator=(const FftwBuffer &) = delete;

            std::complex<double> *as_complex() { return reinterpret_cast<std::complex<double> *>(data); }

            fftw_complex *data;
            std::size_t size;
        };

        class Plan
        {
        public:
            explicit Plan(fftw_plan p) : p_(p)
            {
                if (!p_)
                    throw ValidityError("FFTW planning failed");
            }
            ~Plan()
            {
                std::lock_guard lock(planner_mutex());
                fftw_destroy_plan(p_);
            }
            Plan(const Plan &) = delete;
            Plan &operator=(const Plan &) = delete;
            void execute() const { fftw_execute(p_); }

        private:
            fftw_plan p_;
        };

        Plan make_dft(FftwBuffer &in, FftwBuffer &out, int sign)
        {
            std::lock_guard lock(planner_mutex());
            return Plan(fftw_plan_dft_1d(int(in.size), in.data, out.data, sign, FFTW_ESTIMATE));
        }

        std::size_t next_pow2(std::size_t n)
        {
            std::size_t p = 1;
            while (p < n)
                p <<= 1;
            return p;
        }

        double median(std::vector<double> v)
        {
            if (v.empty())
                return 0.0;
            const auto mid = v.begin() + std::ptrdiff_t(v.size() / 2);
            std::nth_element(v.begin(), mid, v.end());
            return *mid;
        }
    }

    void AScan::validate(double band_high_hz) const
    {
        if (samples.empty())
            throw InputError("A-scan has no samples");
        if (!(sample_rate > 2.0 * band_high_hz))
            throw InputError("A-scan sample rate " + std::to_string(sample_rate) + " Hz is below Nyquist for " +
                             std::to_string(band_high_hz) + " Hz");
    }

    void CalibrationFactor::validate() const
    {
        if (values.size() != grid.size())
            throw InputError("calibration length does not match its grid");
        if (!(valid_low <= valid_high))
            throw InputError("calibration valid band is inverted");
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (grid[i] >= valid_low && grid[i] <= valid_high && !(values[i] > 0.0))
                throw InputError("calibration factor must be positive on the valid band");
    }

    double CalibrationFactor::at(double f_hz) const
    {
        const auto f = grid.frequencies();
        const auto it = std::lower_bound(f.begin(), f.end(), f_hz);
        if (it == f.end() || *it != f_hz)
            throw InputError("frequency " + std::to_string(f_hz) + " Hz is not on the calibration grid");
        return values[std::size_t(it - f.begin())];
    }

    double ricker(double center_f_hz, double t)
    {
        const double a = pi * center_f_hz * t;
        const double a2 = a * a;
        return (1.0 - 2.0 * a2) * std::exp(-a2);
    }

    double ricker_spectrum(double center_f_hz, double f_hz)
    {
        const double x = f_hz / center_f_hz;
        return 2.0 / std::sqrt(pi) * x * x / center_f_hz * std::exp(-x * x);
    }

    AScan synthesize_ascan(const std::vector<Echo> &echoes, const SynthesisConfig &cfg)
    {
        if (!(cfg.sample_rate > 0.0) || !(cfg.duration > 0.0))
            throw InputError("synthesis needs positive sample rate and duration");
        if (!(cfg.noise_level >= 0.0))
            throw InputError("noise level must be >= 0");
        const auto n = std::size_t(std::llround(cfg.duration * cfg.sample_rate));
        if (n == 0)
            throw InputError("synthesis duration shorter than one sample");
        for (const Echo &e : echoes)
            if (!(e.delay >= 0.0) || !(e.delay < cfg.duration))
                throw InputError("echo delay " + std::to_string(e.delay) + " s outside [0, duration)");

        const double dt = 1.0 / cfg.sample_rate;
        // pad so pulse tails near either end do not wrap around
        const auto pad = std::size_t(std::ceil(8.0 / cfg.center_frequency * cfg.sample_rate));
        const std::size_t nfft = next_pow2(n + 2 * pad);
        const double df = 1.0 / (double(nfft) * dt);

        FftwBuffer spec(nfft), time(nfft);
        std::complex<double> *x = spec.as_complex();
        // Hermitian spectrum; synthesis starts `pad` samples early so the trace begins at t = 0
        const double t0 = double(pad) * dt;
        for (std::size_t k = 1; k < nfft / 2; ++k)
        {
            const double f = double(k) * df;
            const double w = ricker_spectrum(cfg.center_frequency, f);
            if (w < 1e-14 / cfg.center_frequency)
                continue;
            std::complex<double> acc = 0.0;
            for (const Echo &e : echoes)
            {
                if (e.gain == 0.0)
                    continue;
                std::complex<double> shaped = e.gain * w;
                if (e.shaping)
                    shaped *= e.shaping(f);
                acc += shaped * std::polar(1.0, -2.0 * pi * f * (e.delay + t0));
            }
            x[k] = acc;
            x[nfft - k] = std::conj(acc);
        }

        Plan plan = make_dft(spec, time, FFTW_BACKWARD);
        plan.execute();

        AScan scan;
        scan.sample_rate = cfg.sample_rate;
        scan.samples.resize(n);
        const std::complex<double> *y = time.as_complex();
        for (std::size_t i = 0; i < n; ++i)
            scan.samples[i] = df * y[i + pad].real();

        if (cfg.noise_level > 0.0)
        {
            std::mt19937_64 rng(cfg.seed);
            std::normal_distribution<double> noise(0.0, cfg.noise_level);
            for (double &s : scan.samples)
                s += noise(rng);
        }
        return scan;
    }

    std::vector<double> envelope(std::span<const double> samples)
    {
        // Windowed FIR Hilbert transformer, zero outside the trace. Unlike a whole-trace FFT the
        // result does not depend on the trace length, so padding a scan shifts its envelope exactly.
        constexpr std::ptrdiff_t half = 256;
        static const std::vector<double> taps = [] {
            std::vector<double> h(half + 1, 0.0);
            for (std::ptrdiff_t k = 1; k <= half; k += 2)
            {
                const double x = pi * double(k + half) / double(half);
                const double blackman = 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
                h[std::size_t(k)] = 2.0 / (pi * double(k)) * blackman;
            }
            return h;
        }();

        const auto n = std::ptrdiff_t(samples.size());
        std::vector<double> env(samples.size());
        for (std::ptrdiff_t i = 0; i < n; ++i)
        {
            double q = 0.0;
            for (std::ptrdiff_t k = 1; k <= half; k += 2)
            {
                const double before = i - k >= 0 ? samples[std::size_t(i - k)] : 0.0;
                const double after = i + k < n ? samples[std::size_t(i + k)] : 0.0;
                q += taps[std::size_t(k)] * (before - after);
            }
            env[std::size_t(i)] = std::hypot(samples[std::size_t(i)], q);
        }
        return env;
    }

    GatedSegment isolate_ground_return(const AScan &scan, const GateConfig &cfg)
    {
        return isolate_return(scan, scan.altitude_est, cfg);
    }

    GatedSegment isolate_return(const AScan &scan, double range_estimate, const GateConfig &cfg)
    {
        scan.validate();
        if (!(range_estimate > 0.0))
            throw InputError("range estimate must be > 0");

        const double fs = scan.sample_rate;
        const std::size_t n = scan.samples.size();
        const std::vector<double> env = envelope(scan.samples);

        const auto to_index = [&](double range) {
            const double t = 2.0 * range / speed_of_light;
            return std::ptrdiff_t(std::llround(t * fs));
        };
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, to_index(range_estimate - cfg.search_half_width));
        const std::ptrdiff_t hi =
            std::min<std::ptrdiff_t>(std::ptrdiff_t(n) - 1, to_index(range_estimate + cfg.search_half_width));
        if (lo > hi)
            throw NoPeakFound("search interval lies outside the trace");

        const auto peak_it = std::max_element(env.begin() + lo, env.begin() + hi + 1);
        const auto peak = std::size_t(peak_it - env.begin());
        // noise floor: RMS of a Rayleigh envelope, estimated robustly from its median
        const double floor = median(env) / std::sqrt(std::log(2.0));
        if (!(*peak_it > cfg.noise_factor * floor) || *peak_it == 0.0)
            throw NoPeakFound("no envelope peak above " + std::to_string(cfg.noise_factor) +
                              "x the noise floor near range " + std::to_string(range_estimate) + " m");

        const auto len = std::size_t(std::llround(2.0 * cfg.window_periods / cfg.center_frequency * fs));
        if (len < 4)
            throw InputError("gate shorter than four samples");
        if (peak < len / 2 || peak - len / 2 + len > n)
            throw NoPeakFound("gate around the peak extends beyond the trace");
        const std::size_t start = peak - len / 2;

        GatedSegment seg;
        seg.sample_rate = fs;
        seg.start_index = start;
        seg.gate_start = double(start) / fs;
        seg.gate_length = double(len) / fs;
        seg.samples.assign(scan.samples.begin() + std::ptrdiff_t(start),
                           scan.samples.begin() + std::ptrdiff_t(start + len));

        // sub-sample peak from a parabola through the log envelope (exact for a Gaussian envelope)
        double offset = 0.0;
        if (peak > 0 && peak + 1 < n && env[peak - 1] > 0.0 && env[peak + 1] > 0.0)
        {
            const double a = std::log(env[peak - 1]);
            const double b = std::log(env[peak]);
            const double c = std::log(env[peak + 1]);
            const double denom = a - 2.0 * b + c;
            if (denom < 0.0)
                offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
        }
        seg.peak_time = (double(peak) + offset) / fs;

        if (cfg.taper)
        {
            const auto nt = std::size_t(std::llround(0.5 * cfg.taper_fraction * double(len)));
            for (std::size_t i = 0; i < nt; ++i)
            {
                const double w = 0.5 * (1.0 - std::cos(pi * (double(i) + 0.5) / double(nt)));
                seg.samples[i] *= w;
                seg.samples[len - 1 - i] *= w;
            }
        }
        return seg;
    }

    double segment_range(const GatedSegment &segment)
    {
        return 0.5 * speed_of_light * segment.peak_time;
    }

    ChannelResponse channel_response(const GatedSegment &segment, const FrequencyGrid &grid)
    {
        const double fs = segment.sample_rate;
        if (grid.band_high() > 0.5 * fs)
            throw InputError("frequency grid exceeds the Nyquist frequency of the segment");
        const double dt = 1.0 / fs;
        ChannelResponse out{grid, std::vector<std::complex<double>>(grid.size())};
        for (std::size_t i = 0; i < grid.size(); ++i)
        {
            const double w = -2.0 * pi * grid[i] * dt;
            std::complex<double> acc = 0.0;
            for (std::size_t m = 0; m < segment.samples.size(); ++m)
                acc += segment.samples[m] * std::polar(1.0, w * double(m));
            out.values[i] = dt * acc;
        }
        return out;
    }

    double plate_rcs(double side, double f_hz)
    {
        if (!(side > 0.0))
            throw InputError("plate side must be > 0");
        const double lambda = speed_of_light / f_hz;
        const double l2 = side * side;
        return 4.0 * pi * l2 * l2 / (lambda * lambda);
    }

    CalibrationFactor derive_calibration(const std::vector<PlateScan> &plate_scans, double plate_side,
                                         const FrequencyGrid &grid, const GateConfig &cfg, double valid_threshold)
    {
        if (plate_scans.empty())
            throw InputError("calibration needs at least one plate scan");
        if (!(plate_side > 0.0))
            throw InputError("plate side must be > 0");

        const std::size_t m = grid.size();
        std::vector<double> sum(m, 0.0);
        std::vector<bool> valid(m, true);
        std::vector<double> mean_mag(m, 0.0);

        CalibrationFactor cal{grid, {}, plate_side, {}, plate_scans.size(), 0.0, 0.0};
        for (const PlateScan &ps : plate_scans)
        {
            if (!(ps.range > 0.0))
                throw InputError("plate range must be > 0");
            const GatedSegment seg = isolate_return(ps.scan, ps.range, cfg);
            const ChannelResponse resp = channel_response(seg, grid);

            double peak = 0.0;
            for (const auto &g : resp.values)
                peak = std::max(peak, std::abs(g));
            const double r4 = std::pow(ps.range, 4);
            for (std::size_t i = 0; i < m; ++i)
            {
                const double f = grid[i];
                const double g2 = std::norm(resp.values[i]);
                sum[i] += f * f * r4 * g2 / plate_rcs(plate_side, f);
                mean_mag[i] += std::abs(resp.values[i]);
                if (!(std::abs(resp.values[i]) > valid_threshold * peak))
                    valid[i] = false;
            }
            cal.reference_ranges.push_back(ps.range);
        }

        cal.values.resize(m);
        for (std::size_t i = 0; i < m; ++i)
            cal.values[i] = sum[i] / double(plate_scans.size());

        // contiguous valid run containing the strongest mean response
        const auto top = std::size_t(std::max_element(mean_mag.begin(), mean_mag.end()) - mean_mag.begin());
        if (!valid[top])
            throw NoPeakFound("plate spectrum has no valid band");
        std::size_t a = top, b = top;
        while (a > 0 && valid[a - 1])
            --a;
        while (b + 1 < m && valid[b + 1])
            ++b;
        cal.valid_low = grid[a];
        cal.valid_high = grid[b];
        cal.validate();
        return cal;
    }

    RcsSpectrum measured_rcs(const ChannelResponse &resp, double range, const CalibrationFactor &cal)
    {
        if (!(range > 0.0))
            throw InputError("range must be > 0");
        if (resp.values.size() != resp.grid.size())
            throw InputError("channel response length does not match its grid");
        const double r4 = std::pow(range, 4);
        RcsSpectrum out{resp.grid, std::vector<double>(resp.grid.size()), range, {}};
        for (std::size_t i = 0; i < resp.grid.size(); ++i)
        {
            const double f = resp.grid[i];
            if (f < cal.valid_low || f > cal.valid_high)
                throw InputError("frequency " + std::to_string(f) + " Hz outside the calibrated band");
            out.values[i] = f * f * r4 * std::norm(resp.values[i]) / cal.at(f);
        }
        return out;
    }

    RcsSpectrum ground_rcs_from_scan(const AScan &scan, const CalibrationFactor &cal, const GateConfig &cfg)
    {
        const GatedSegment seg = isolate_ground_return(scan, cfg);
        RcsSpectrum out = measured_rcs(channel_response(seg, cal.valid_grid()), segment_range(seg), cal);
        out.location = scan.location;
        return out;
    }
}
