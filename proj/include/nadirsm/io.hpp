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

#ifndef NADIRSM_IO_HPP
#define NADIRSM_IO_HPP

#include "nadirsm/canopy_rt.hpp"
#include "nadirsm/ground_rt.hpp"
#include "nadirsm/lidar_canopy.hpp"
#include "nadirsm/radar_dsp.hpp"
#include "nadirsm/retrieval.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Text formats. Every writer goes through write_text_atomic (temporary file + rename) and emits
// doubles with %.17g, so a write followed by a read reproduces every value bit for bit.
// Readers raise ParseError naming the file and the 1-based offending line. The layouts are
// documented in docs/formats.md.

namespace nadirsm::io
{
    std::string format_double(double v); // %.17g
    double parse_double(const std::string &text, const std::string &path, std::size_t line);
    std::vector<double> parse_double_list(const std::string &text, const std::string &path, std::size_t line);

    std::string read_text(const std::filesystem::path &path);
    void write_text_atomic(const std::filesystem::path &path, const std::string &content);

    // Ordered `key=value` lines; blank lines and lines starting with '#' are skipped.
    // Keys are unique. Whitespace around keys and values is trimmed.
    class KeyValues
    {
    public:
        KeyValues() = default;
        static KeyValues parse(const std::string &text, const std::string &path);
        static KeyValues load(const std::filesystem::path &path);

        void set(const std::string &key, const std::string &value);
        void set(const std::string &key, double value);
        void set(const std::string &key, const char *value) { set(key, std::string(value)); }
        void set_bool(const std::string &key, bool value) { set(key, value ? "true" : "false"); }

        bool has(const std::string &key) const;
        const std::string &text(const std::string &key) const;           // InputError when missing
        double number(const std::string &key) const;                     // InputError when missing
        double number_or(const std::string &key, double fallback) const;
        std::optional<double> optional_number(const std::string &key) const;
        std::vector<double> numbers(const std::string &key) const;       // comma list
        bool boolean(const std::string &key) const;
        bool boolean_or(const std::string &key, bool fallback) const;
        std::string text_or(const std::string &key, const std::string &fallback) const;

        // Rejects keys outside `known` (exact names or prefixes ending in '.')
        void expect_only(const std::vector<std::string> &known) const;

        std::string dump() const;
        const std::string &path() const { return path_; }
        const std::vector<std::pair<std::string, std::string>> &entries() const { return entries_; }

    private:
        std::size_t line_of(const std::string &key) const;

        std::string path_;
        std::vector<std::pair<std::string, std::string>> entries_;
        std::map<std::string, std::size_t> index_; // key -> entry
        std::vector<std::size_t> lines_;           // source line per entry, 0 when set in code
    };

    // A-scan: `# sample_rate_hz=`, `# altitude_m=`, `# location=` header lines, then one sample per line
    std::string format_ascan(const AScan &scan);
    AScan parse_ascan(const std::string &text, const std::string &path);
    void write_ascan(const std::filesystem::path &path, const AScan &scan);
    AScan read_ascan(const std::filesystem::path &path);

    // Calibration: provenance header lines, `frequency_hz,c_value`, then one row per grid point
    std::string format_calibration(const CalibrationFactor &cal);
    CalibrationFactor parse_calibration(const std::string &text, const std::string &path);
    void write_calibration(const std::filesystem::path &path, const CalibrationFactor &cal);
    CalibrationFactor read_calibration(const std::filesystem::path &path);

    // RCS spectrum: optional `# band_hz=`, `# range_m=`, `# location=`, then `frequency_hz,rcs_m2` rows
    std::string format_rcs(const RcsSpectrum &spectrum);
    RcsSpectrum parse_rcs(const std::string &text, const std::string &path);
    void write_rcs(const std::filesystem::path &path, const RcsSpectrum &spectrum);
    RcsSpectrum read_rcs(const std::filesystem::path &path);

    // Canopy descriptor as key=value with dotted keys named after the descriptor fields
    KeyValues canopy_to_keys(const CanopyDescriptor &canopy);
    CanopyDescriptor canopy_from_keys(const KeyValues &kv);
    void write_canopy(const std::filesystem::path &path, const CanopyDescriptor &canopy);
    CanopyDescriptor read_canopy(const std::filesystem::path &path);

    // Point cloud: `x y z` per line, optional fourth intensity column; spaces, tabs or commas
    PointCloud parse_point_cloud(const std::string &text, const std::string &path);
    PointCloud read_point_cloud(const std::filesystem::path &path);
    void write_point_cloud(const std::filesystem::path &path, const PointCloud &cloud);

    // Allometry table: header `crop_kind,leaf_area_m2,leaf_width_m,stalk_radius_m[,leaf_thickness_m]`
    std::vector<Allometry> parse_allometry(const std::string &text, const std::string &path);
    std::vector<Allometry> read_allometry(const std::filesystem::path &path);
    void write_allometry(const std::filesystem::path &path, const std::vector<Allometry> &rows);
    const Allometry &find_allometry(const std::vector<Allometry> &rows, CropKind kind);

    KeyValues structure_to_keys(const CanopyStructureEstimate &est);
    CanopyStructureEstimate structure_from_keys(const KeyValues &kv);

    KeyValues search_to_keys(const SearchConfig &cfg, const std::string &prefix = "search.");
    KeyValues result_to_keys(const RetrievalResult &result);
    RetrievalResult result_from_keys(const KeyValues &kv);

    // Delimited tables: header line, one row per entry
    struct Table
    {
        std::vector<std::string> header;
        std::vector<std::vector<double>> rows;

        std::string format() const;
        static Table parse(const std::string &text, const std::string &path);
        std::size_t column(const std::string &name) const; // InputError when absent
    };

    void write_table(const std::filesystem::path &path, const Table &table);
    Table read_table(const std::filesystem::path &path);

    Table beamwidth_table(const std::vector<BeamwidthRow> &rows);
    Table bandwidth_table(const std::vector<BandRow> &rows);
    Table altitude_table(const std::vector<AltitudeRow> &rows);
    Table ablation_table(const std::vector<AblationRow> &rows);
}

#endif
