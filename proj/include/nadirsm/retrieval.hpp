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

#ifndef NADIRSM_RETRIEVAL_HPP
#define NADIRSM_RETRIEVAL_HPP

#include "nadirsm/canopy_rt.hpp"
#include "nadirsm/em_core.hpp"
#include "nadirsm/ground_rt.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace nadirsm
{
    enum class ResidualMode
    {
        linear, // squared error in m^2
        db      // squared error in dBsm
    };

    struct SearchConfig
    {
        double soil_low = 2.0;
        double soil_high = 40.0;
        std::size_t soil_count = 500;
        double canopy_low = 1.5;
        double canopy_high = 40.0;
        std::size_t canopy_count = 500;
        double soil_loss_tangent = 0.15;   // eps'' = tan_delta * eps'
        double canopy_loss_tangent = 0.30;
        std::optional<std::pair<double, double>> sub_band; // [Hz]
        bool canopy_modeling_enabled = true;
        ResidualMode residual_mode = ResidualMode::linear;
        ToppCoefficients topp;

        void validate() const;
        std::vector<double> soil_grid() const;   // real parts, evenly spaced
        std::vector<double> canopy_grid() const;
    };

    // Precomputed forward model on the search grid. The scene RCS at cell (s, c) and frequency j
    // factors into soil[s][j] * canopy[c][j] (linear mode) or soil[s][j] + canopy[c][j] (dB mode).
    struct ForwardTable
    {
        std::size_t n_soil = 0;
        std::size_t n_canopy = 0;
        std::size_t n_freq = 0;
        ResidualMode mode = ResidualMode::linear;
        std::vector<double> soil;   // n_soil x n_freq: coherent ground RCS
        std::vector<double> canopy; // n_canopy x n_freq: two-way power transmissivity

        double model(std::size_t s, std::size_t c, std::size_t j) const;
    };

    // Forward table for the given frequencies. With canopy modeling disabled or an empty canopy
    // the canopy dimension collapses to a single all-pass row.
    ForwardTable build_forward_table(std::span<const double> freqs, const CanopyDescriptor &structure,
                                     const SoilDescriptor &soil_template, const ViewGeometry &view,
                                     const SearchConfig &cfg);

    // Measured values in the table's residual domain
    std::vector<double> residual_domain(std::span<const double> measured, ResidualMode mode);

    struct GridMin
    {
        std::size_t soil = 0;
        std::size_t canopy = 0;
        double residual = 0.0;
    };

    double cell_residual(const ForwardTable &table, std::span<const double> target, std::size_t s, std::size_t c);

    // Exhaustive minimum over every cell, ties to the lowest soil index then lowest canopy index.
    // The parallel kernel splits the soil axis into ordered blocks and merges them in order, so
    // both return the same cell and the same residual bits.
    GridMin grid_search_serial(const ForwardTable &table, std::span<const double> target);
    GridMin grid_search_parallel(const ForwardTable &table, std::span<const double> target);

    struct FitPoint
    {
        double frequency; // [Hz]
        double simulated; // [m^2]
        double measured;  // [m^2]
    };

    struct RetrievalResult
    {
        ComplexPermittivity eps_soil;
        ComplexPermittivity eps_canopy;
        SoilMoisture vwc{0.0};
        double residual = 0.0;
        ResidualMode residual_mode = ResidualMode::linear;
        std::vector<FitPoint> fit;
        std::size_t soil_index = 0;
        std::size_t canopy_index = 0;
        bool soil_at_boundary = false;
        bool canopy_at_boundary = false;
        bool canopy_inert = false; // canopy dimension not searched
    };

    // Joint grid search. `structure` supplies geometry and densities; its permittivities are
    // replaced by candidates. `soil_template` supplies roughness and beta_c.
    RetrievalResult retrieve(const RcsSpectrum &measured, const CanopyDescriptor &structure,
                             const SoilDescriptor &soil_template, const ViewGeometry &view, const SearchConfig &cfg);

    // VWC change for one soil grid step around `vwc` (largest of the two neighbouring steps)
    double vwc_grid_step(double vwc, const SearchConfig &cfg);

    struct RoughnessFit
    {
        double roughness_height = 0.0; // [m]
        double vwc = 0.0;
        double vwc_error = 0.0;
        double residual = 0.0;
        bool unique = true; // false when several heights share the smallest VWC error
    };

    inline constexpr double roughness_scan_max = 0.05;   // [m]
    inline constexpr double roughness_scan_step = 0.0005; // [m]

    // Scans s over [0, 5] cm in 0.5 mm steps with canopy modeling off; keeps the height whose
    // retrieved VWC is closest to the known value, ties broken by the smaller residual.
    RoughnessFit calibrate_roughness(const RcsSpectrum &bare_rcs, SoilMoisture known_vwc,
                                     const SoilDescriptor &soil_template, const ViewGeometry &view,
                                     const SearchConfig &cfg);

    struct BeamwidthRow
    {
        double effective_beamwidth; // [rad]
        double vwc;
        double vwc_error;
    };

    // Sweep range for the effective beamwidth: [0.5 deg, beta_c) in 0.05 deg steps. Above beta_c
    // the nadir ring leaves the specular lobe and the RCS model stops being monotone in theta_e.
    std::vector<double> default_beamwidth_range(double scattering_beamwidth);

    std::vector<BeamwidthRow> sweep_effective_beamwidth(const RcsSpectrum &measured, const CanopyDescriptor &structure,
                                                        const SoilDescriptor &soil_template, const ViewGeometry &view,
                                                        const SearchConfig &cfg, std::span<const double> theta_e,
                                                        double true_vwc);

    // Index of the smallest error; first one on ties
    std::size_t beamwidth_minimum(const std::vector<BeamwidthRow> &rows);

    struct BandRow
    {
        double low;  // [Hz]
        double high; // [Hz]
        std::size_t bins;
        double vwc;
        double vwc_error;
    };

    // Full measured band and its top `width` Hz
    std::vector<std::pair<double, double>> default_bandwidth_cases(const RcsSpectrum &measured, double width = 100e6);

    std::vector<BandRow> sweep_bandwidth(const RcsSpectrum &measured, const CanopyDescriptor &structure,
                                         const SoilDescriptor &soil_template, const ViewGeometry &view,
                                         const SearchConfig &cfg, const std::vector<std::pair<double, double>> &bands,
                                         double true_vwc);

    struct AltitudeRow
    {
        double altitude; // [m]
        double vwc;
    };

    // One retrieval per measured spectrum, each with the view altitude set to the spectrum's range
    std::vector<AltitudeRow> sweep_altitude(const std::vector<RcsSpectrum> &measured, const CanopyDescriptor &structure,
                                            const SoilDescriptor &soil_template, const ViewGeometry &view,
                                            const SearchConfig &cfg);

    struct AblationRow
    {
        bool canopy_modeling;
        double vwc;
        double vwc_error;
    };

    std::vector<AblationRow> sweep_canopy_ablation(const RcsSpectrum &measured, const CanopyDescriptor &structure,
                                                   const SoilDescriptor &soil_template, const ViewGeometry &view,
                                                   const SearchConfig &cfg, double true_vwc);
}

#endif
