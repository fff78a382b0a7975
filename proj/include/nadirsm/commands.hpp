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

#ifndef NADIRSM_COMMANDS_HPP
#define NADIRSM_COMMANDS_HPP

#include "nadirsm/canopy_rt.hpp"
#include "nadirsm/ground_rt.hpp"
#include "nadirsm/io.hpp"
#include "nadirsm/lidar_canopy.hpp"
#include "nadirsm/retrieval.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

// File-to-file workflows behind the command-line tool. Each command reads its inputs, runs the
// library, and writes its outputs atomically into the output directory.

namespace nadirsm::cli
{
    namespace fs = std::filesystem;

    inline constexpr const char *output_dir_env = "NADIRSM_OUTPUT_DIR";

    struct RunConfig
    {
        double band_low = 200e6;  // [Hz]
        double band_high = 900e6; // [Hz]
        std::size_t bins = 100;
        double center_frequency = 550e6; // Ricker [Hz]
        double sample_rate = 14e9;       // [Hz]
        SearchConfig search;
        SoilDescriptor soil;  // roughness, beta_c, correlation length; permittivity unused
        ViewGeometry view;    // effective and half-power beamwidth; altitude is a fallback
        std::optional<fs::path> canopy_file;
        std::optional<fs::path> calibration_file;
        fs::path output_dir = ".";
        std::uint64_t seed = 1;

        FrequencyGrid grid() const;
        void validate() const;

        static RunConfig from_keys(const io::KeyValues &kv, const fs::path &base_dir);
        // Relative paths resolve against the config file's directory; referenced files must exist
        static RunConfig load(const fs::path &path);
        io::KeyValues to_keys() const;
    };

    // The environment variable wins over the flag, which wins over the config
    fs::path resolve_output_dir(const RunConfig &cfg, const std::optional<fs::path> &flag);

    // Base name for derived files: file name without the extension, trailing ".rcs" dropped
    std::string base_name(const fs::path &input);

    struct SimulateOutput
    {
        std::vector<fs::path> scans;
        fs::path truth;
    };

    // Scene spec (key=value): kind=ground|plate, name, location, scans_per_altitude, noise_level.
    // ground: vwc, altitudes_m, optional canopy_file (or "none"), optional canopy_permittivity,
    //         canopy_top_rcs. plate: plate_side_m, ranges_m.
    SimulateOutput cmd_simulate(const RunConfig &cfg, const fs::path &scene_file, const fs::path &out_dir);

    // Ranges default to each scan's altitude header
    fs::path cmd_calibrate(const RunConfig &cfg, const std::vector<fs::path> &scans, double plate_side,
                           const std::vector<double> &ranges, const fs::path &out_dir,
                           const std::string &name = "calibration");

    // Range in the radar equation: time of flight of the gated peak, or one known range per scan
    std::vector<fs::path> cmd_rcs(const RunConfig &cfg, const std::vector<fs::path> &scans, const fs::path &calibration,
                                  const fs::path &out_dir, const std::vector<double> &ranges = {});

    std::vector<fs::path> cmd_retrieve(const RunConfig &cfg, const std::vector<fs::path> &spectra,
                                       const std::optional<fs::path> &canopy, const fs::path &out_dir);

    struct LidarRequest
    {
        std::vector<fs::path> clouds;
        CropKind crop_kind = CropKind::corn;
        fs::path allometry;
        std::optional<Tile> tile; // default: 10 m tile anchored at the floored cloud minimum
        ComplexPermittivity canopy_permittivity{15.0, 4.5};
        LidarOptions options;
    };

    // Writes <base>.structure.txt and <base>.canopy.txt per cloud
    std::vector<fs::path> cmd_lidar(const LidarRequest &req, const fs::path &out_dir);

    enum class SweepKind
    {
        beamwidth,
        bandwidth,
        altitude,
        canopy_ablation
    };

    SweepKind sweep_kind_from_string(const std::string &s);
    std::string to_string(SweepKind kind);

    struct SweepRequest
    {
        SweepKind kind = SweepKind::beamwidth;
        std::vector<fs::path> spectra; // altitude sweeps take several, the others one
        std::optional<fs::path> canopy;
        std::optional<double> truth_vwc;
        std::optional<fs::path> truth_file; // simulate sidecar supplying the true VWC
        std::vector<double> beamwidths_deg;  // empty: default range
        double band_width = 100e6;           // top sub-band for the bandwidth sweep [Hz]
        std::string name;                    // output base name; default from the first spectrum
    };

    // Writes <name>.<kind>.csv and a matching .svg
    std::vector<fs::path> cmd_sweep(const RunConfig &cfg, const SweepRequest &req, const fs::path &out_dir);

    // RCS spectra become <base>.plot.csv in dBsm plus <base>.svg; sweep tables become <base>.svg
    std::vector<fs::path> cmd_plot(const std::vector<fs::path> &inputs, const fs::path &out_dir);

    // Minimal SVG line chart
    struct Series
    {
        std::string label;
        std::vector<double> x;
        std::vector<double> y;
    };

    std::string render_svg(const std::string &title, const std::string &x_label, const std::string &y_label,
                           const std::vector<Series> &series);
}

#endif
