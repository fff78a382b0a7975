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

#include "nadirsm/retrieval.hpp"
#include "nadirsm/error.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <limits>

namespace nadirsm
{
    namespace
    {
        std::vector<double> even_grid(double lo, double hi, std::size_t n)
        {
            std::vector<double> g(n);
            for (std::size_t i = 0; i < n; ++i)
                g[i] = n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1);
            if (n > 1)
                g.back() = hi;
            return g;
        }

        void check_axis(const char *name, double lo, double hi, std::size_t n)
        {
            const std::string axis(name);
            if (n == 0)
                throw InputError(axis + " grid must have at least one value");
            if (!(lo >= 1.0))
                throw InputError(axis + " grid must start at permittivity >= 1");
            if (n > 1 && !(hi > lo))
                throw InputError(axis + " grid must be strictly increasing");
        }

        bool canopy_searched(const CanopyDescriptor &structure, const SearchConfig &cfg)
        {
            return cfg.canopy_modeling_enabled && !structure.empty() && structure.height > 0.0;
        }
    }

    void SearchConfig::validate() const
    {
        check_axis("soil", soil_low, soil_high, soil_count);
        check_axis("canopy", canopy_low, canopy_high, canopy_count);
        if (!(soil_loss_tangent >= 0.0) || !(canopy_loss_tangent >= 0.0))
            throw InputError("loss tangents must be >= 0");
        if (sub_band && !(sub_band->first <= sub_band->second))
            throw InputError("sub-band limits are inverted");
    }

    std::vector<double> SearchConfig::soil_grid() const
    {
        return even_grid(soil_low, soil_high, soil_count);
    }

    std::vector<double> SearchConfig::canopy_grid() const
    {
        return even_grid(canopy_low, canopy_high, canopy_count);
    }

    double ForwardTable::model(std::size_t s, std::size_t c, std::size_t j) const
    {
        const double a = soil[s * n_freq + j];
        const double b = canopy[c * n_freq + j];
        return mode == ResidualMode::linear ? a * b : a + b;
    }

    ForwardTable build_forward_table(std::span<const double> freqs, const CanopyDescriptor &structure,
                                     const SoilDescriptor &soil_template, const ViewGeometry &view,
                                     const SearchConfig &cfg)
    {
        cfg.validate();
        view.validate();
        if (freqs.empty())
            throw InputError("no frequencies to fit");

        const bool db = cfg.residual_mode == ResidualMode::db;
        const double theta = view.effective_beamwidth;
        const double area = effective_area(view);
        const std::vector<double> soil_eps = cfg.soil_grid();

        ForwardTable t;
        t.mode = cfg.residual_mode;
        t.n_freq = freqs.size();
        t.n_soil = soil_eps.size();
        t.soil.resize(t.n_soil * t.n_freq);
        for (std::size_t s = 0; s < t.n_soil; ++s)
        {
            SoilDescriptor soil = soil_template;
            soil.permittivity = ComplexPermittivity::from_loss_tangent(soil_eps[s], cfg.soil_loss_tangent);
            for (std::size_t j = 0; j < t.n_freq; ++j)
            {
                const double sigma = coherent_rcs(soil, freqs[j], theta, area);
                t.soil[s * t.n_freq + j] = db ? to_db(sigma) : sigma;
            }
        }

        if (!canopy_searched(structure, cfg))
        {
            t.n_canopy = 1;
            t.canopy.assign(t.n_freq, db ? 0.0 : 1.0);
            return t;
        }

        const std::vector<double> canopy_eps = cfg.canopy_grid();
        t.n_canopy = canopy_eps.size();
        t.canopy.resize(t.n_canopy * t.n_freq);
        const ExtinctionModel model(structure, theta);
        const double path = structure.height / std::cos(theta);
        (void)transmissivity_from_extinction(0.0, structure.height, theta); // rejects grazing angles

        std::exception_ptr failure;
#pragma omp parallel for schedule(static)
        for (std::size_t c = 0; c < t.n_canopy; ++c)
        {
            try
            {
                const auto eps = ComplexPermittivity::from_loss_tangent(canopy_eps[c], cfg.canopy_loss_tangent);
                for (std::size_t j = 0; j < t.n_freq; ++j)
                {
                    const double tau = model.kappa(eps, freqs[j]) * path;
                    // two-way power: exp(-2 tau); the dB form avoids underflow for opaque canopies
                    t.canopy[c * t.n_freq + j] = db ? -20.0 * tau / std::log(10.0) : std::exp(-2.0 * tau);
                }
            }
            catch (...)
            {
#pragma omp critical(nadirsm_table_failure)
                if (!failure)
                    failure = std::current_exception();
            }
        }
        if (failure)
            std::rethrow_exception(failure);
        return t;
    }

    std::vector<double> residual_domain(std::span<const double> measured, ResidualMode mode)
    {
        std::vector<double> out(measured.begin(), measured.end());
        if (mode == ResidualMode::db)
            for (double &v : out)
            {
                if (!(v > 0.0))
                    throw InputError("dB residual mode needs a strictly positive measured spectrum");
                v = to_db(v);
            }
        return out;
    }

    double cell_residual(const ForwardTable &table, std::span<const double> target, std::size_t s, std::size_t c)
    {
        const double *a = table.soil.data() + s * table.n_freq;
        const double *b = table.canopy.data() + c * table.n_freq;
        double r = 0.0;
        if (table.mode == ResidualMode::linear)
            for (std::size_t j = 0; j < table.n_freq; ++j)
            {
                const double d = a[j] * b[j] - target[j];
                r += d * d;
            }
        else
            for (std::size_t j = 0; j < table.n_freq; ++j)
            {
                const double d = a[j] + b[j] - target[j];
                r += d * d;
            }
        return r;
    }

    namespace
    {
        GridMin search_block(const ForwardTable &table, std::span<const double> target, std::size_t s_begin,
                             std::size_t s_end)
        {
            GridMin best{0, 0, std::numeric_limits<double>::infinity()};
            for (std::size_t s = s_begin; s < s_end; ++s)
                for (std::size_t c = 0; c < table.n_canopy; ++c)
                {
                    const double r = cell_residual(table, target, s, c);
                    if (r < best.residual)
                        best = {s, c, r};
                }
            return best;
        }

        void check_target(const ForwardTable &table, std::span<const double> target)
        {
            if (target.size() != table.n_freq)
                throw InputError("measured spectrum length does not match the forward table");
        }
    }

    GridMin grid_search_serial(const ForwardTable &table, std::span<const double> target)
    {
        check_target(table, target);
        return search_block(table, target, 0, table.n_soil);
    }

    GridMin grid_search_parallel(const ForwardTable &table, std::span<const double> target)
    {
        check_target(table, target);
        const int max_threads = omp_get_max_threads();
        std::vector<GridMin> partial(std::size_t(max_threads), GridMin{0, 0, std::numeric_limits<double>::infinity()});

#pragma omp parallel num_threads(max_threads)
        {
            const auto id = std::size_t(omp_get_thread_num());
            const auto n = std::size_t(omp_get_num_threads());
            const std::size_t begin = table.n_soil * id / n;
            const std::size_t end = table.n_soil * (id + 1) / n;
            partial[id] = search_block(table, target, begin, end);
        }

        // blocks are ordered by soil index, so a strict comparison keeps the serial tie-break
        GridMin best = partial.front();
        for (std::size_t i = 1; i < partial.size(); ++i)
            if (partial[i].residual < best.residual)
                best = partial[i];
        return best;
    }

    RetrievalResult retrieve(const RcsSpectrum &measured, const CanopyDescriptor &structure,
                             const SoilDescriptor &soil_template, const ViewGeometry &view, const SearchConfig &cfg)
    {
        measured.validate();
        cfg.validate();
        soil_template.validate();

        const FrequencyGrid &grid = measured.grid;
        std::vector<double> freqs;
        std::vector<double> values;
        double lo = grid.band_low();
        double hi = grid.band_high();
        if (cfg.sub_band)
        {
            const double tol = 1e-6;
            if (cfg.sub_band->first < lo - tol || cfg.sub_band->second > hi + tol)
                throw InputError("sub-band lies outside the measured band");
            lo = cfg.sub_band->first;
            hi = cfg.sub_band->second;
        }
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (grid[i] >= lo && grid[i] <= hi)
            {
                freqs.push_back(grid[i]);
                values.push_back(measured.values[i]);
            }
        if (freqs.empty())
            throw InputError("empty frequency sub-band");
        bool any = false;
        for (double v : values)
            any = any || v > 0.0;
        if (!any)
            throw InputError("measured spectrum is all zero");

        const ForwardTable table = build_forward_table(freqs, structure, soil_template, view, cfg);
        const std::vector<double> target = residual_domain(values, cfg.residual_mode);
        const GridMin best = grid_search_parallel(table, target);

        const std::vector<double> soil_eps = cfg.soil_grid();
        RetrievalResult r;
        r.canopy_inert = !canopy_searched(structure, cfg);
        r.soil_index = best.soil;
        r.canopy_index = best.canopy;
        r.eps_soil = ComplexPermittivity::from_loss_tangent(soil_eps[best.soil], cfg.soil_loss_tangent);
        if (!r.canopy_inert)
            r.eps_canopy = ComplexPermittivity::from_loss_tangent(cfg.canopy_grid()[best.canopy], cfg.canopy_loss_tangent);
        r.vwc = topp_vwc(r.eps_soil.real_part(), cfg.topp);
        r.residual = best.residual;
        r.residual_mode = cfg.residual_mode;
        r.soil_at_boundary = table.n_soil > 1 && (best.soil == 0 || best.soil + 1 == table.n_soil);
        r.canopy_at_boundary = !r.canopy_inert && table.n_canopy > 1 &&
                               (best.canopy == 0 || best.canopy + 1 == table.n_canopy);
        r.fit.reserve(freqs.size());
        for (std::size_t j = 0; j < freqs.size(); ++j)
        {
            const double m = table.model(best.soil, best.canopy, j);
            r.fit.push_back({freqs[j], cfg.residual_mode == ResidualMode::db ? from_db(m) : m, values[j]});
        }
        return r;
    }

    double vwc_grid_step(double vwc, const SearchConfig &cfg)
    {
        const double eps = topp_permittivity(SoilMoisture(vwc), cfg.topp);
        const double step = cfg.soil_count > 1 ? (cfg.soil_high - cfg.soil_low) / double(cfg.soil_count - 1) : 0.0;
        const double up = cfg.topp.evaluate(eps + step) - vwc;
        const double down = vwc - cfg.topp.evaluate(std::max(eps - step, 1.0));
        return std::max(std::abs(up), std::abs(down));
    }

    RoughnessFit calibrate_roughness(const RcsSpectrum &bare_rcs, SoilMoisture known_vwc,
                                     const SoilDescriptor &soil_template, const ViewGeometry &view,
                                     const SearchConfig &cfg)
    {
        SearchConfig bare_cfg = cfg;
        bare_cfg.canopy_modeling_enabled = false;
        const CanopyDescriptor none;
        const auto steps = std::size_t(std::llround(roughness_scan_max / roughness_scan_step));
        const double tie = 1e-12;

        std::vector<RoughnessFit> fits;
        fits.reserve(steps + 1);
        for (std::size_t i = 0; i <= steps; ++i)
        {
            SoilDescriptor soil = soil_template;
            soil.roughness_height = double(i) * roughness_scan_step;
            const RetrievalResult r = retrieve(bare_rcs, none, soil, view, bare_cfg);
            fits.push_back({soil.roughness_height, r.vwc.vwc(), std::abs(r.vwc.vwc() - known_vwc.vwc()), r.residual,
                            true});
        }

        RoughnessFit best = fits.front();
        for (const RoughnessFit &f : fits)
        {
            if (f.vwc_error < best.vwc_error - tie ||
                (std::abs(f.vwc_error - best.vwc_error) <= tie && f.residual < best.residual))
                best = f;
        }
        std::size_t sharing = 0;
        for (const RoughnessFit &f : fits)
            if (std::abs(f.vwc_error - best.vwc_error) <= tie)
                ++sharing;
        best.unique = sharing == 1;
        return best;
    }

    std::vector<double> default_beamwidth_range(double scattering_beamwidth)
    {
        std::vector<double> out;
        const double step = deg2rad(0.05);
        for (std::size_t i = 0;; ++i)
        {
            const double theta = deg2rad(0.5) + double(i) * step;
            if (theta >= scattering_beamwidth - 1e-12)
                break;
            out.push_back(theta);
        }
        return out;
    }

    std::vector<BeamwidthRow> sweep_effective_beamwidth(const RcsSpectrum &measured, const CanopyDescriptor &structure,
                                                        const SoilDescriptor &soil_template, const ViewGeometry &view,
                                                        const SearchConfig &cfg, std::span<const double> theta_e,
                                                        double true_vwc)
    {
        std::vector<BeamwidthRow> rows;
        rows.reserve(theta_e.size());
        for (double theta : theta_e)
        {
            ViewGeometry v = view;
            v.effective_beamwidth = theta;
            const double vwc = retrieve(measured, structure, soil_template, v, cfg).vwc.vwc();
            rows.push_back({theta, vwc, std::abs(vwc - true_vwc)});
        }
        return rows;
    }

    std::size_t beamwidth_minimum(const std::vector<BeamwidthRow> &rows)
    {
        if (rows.empty())
            throw InputError("empty beamwidth sweep");
        std::size_t best = 0;
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (rows[i].vwc_error < rows[best].vwc_error)
                best = i;
        return best;
    }

    std::vector<std::pair<double, double>> default_bandwidth_cases(const RcsSpectrum &measured, double width)
    {
        const auto f = measured.grid.frequencies();
        if (!(width > 0.0))
            throw InputError("sub-band width must be > 0");
        return {{f.front(), f.back()}, {std::max(f.front(), f.back() - width), f.back()}};
    }

    std::vector<BandRow> sweep_bandwidth(const RcsSpectrum &measured, const CanopyDescriptor &structure,
                                         const SoilDescriptor &soil_template, const ViewGeometry &view,
                                         const SearchConfig &cfg, const std::vector<std::pair<double, double>> &bands,
                                         double true_vwc)
    {
        std::vector<BandRow> rows;
        rows.reserve(bands.size());
        for (const auto &band : bands)
        {
            SearchConfig c = cfg;
            c.sub_band = band;
            const RetrievalResult r = retrieve(measured, structure, soil_template, view, c);
            const double vwc = r.vwc.vwc();
            rows.push_back({band.first, band.second, r.fit.size(), vwc, std::abs(vwc - true_vwc)});
        }
        return rows;
    }

    std::vector<AltitudeRow> sweep_altitude(const std::vector<RcsSpectrum> &measured, const CanopyDescriptor &structure,
                                            const SoilDescriptor &soil_template, const ViewGeometry &view,
                                            const SearchConfig &cfg)
    {
        std::vector<AltitudeRow> rows;
        rows.reserve(measured.size());
        for (const RcsSpectrum &m : measured)
        {
            if (!m.range_m)
                throw InputError("altitude sweep needs spectra carrying their range");
            ViewGeometry v = view;
            v.altitude = *m.range_m;
            rows.push_back({v.altitude, retrieve(m, structure, soil_template, v, cfg).vwc.vwc()});
        }
        return rows;
    }

    std::vector<AblationRow> sweep_canopy_ablation(const RcsSpectrum &measured, const CanopyDescriptor &structure,
                                                   const SoilDescriptor &soil_template, const ViewGeometry &view,
                                                   const SearchConfig &cfg, double true_vwc)
    {
        std::vector<AblationRow> rows;
        for (bool enabled : {true, false})
        {
            SearchConfig c = cfg;
            c.canopy_modeling_enabled = enabled;
            const double vwc = retrieve(measured, structure, soil_template, view, c).vwc.vwc();
            rows.push_back({enabled, vwc, std::abs(vwc - true_vwc)});
        }
        return rows;
    }
}
