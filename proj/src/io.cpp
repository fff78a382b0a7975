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

#include "nadirsm/io.hpp"
#include "nadirsm/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nadirsm::io
{
    namespace
    {
        std::string trim(const std::string &s)
        {
            std::size_t a = 0;
            std::size_t b = s.size();
            while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
                ++a;
            while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
                --b;
            return s.substr(a, b - a);
        }

        std::vector<std::string> split_lines(const std::string &text)
        {
            std::vector<std::string> lines;
            std::string cur;
            std::istringstream in(text);
            while (std::getline(in, cur))
            {
                if (!cur.empty() && cur.back() == '\r')
                    cur.pop_back();
                lines.push_back(cur);
            }
            return lines;
        }

        std::vector<std::string> split(const std::string &s, char sep)
        {
            std::vector<std::string> out;
            std::string cur;
            for (char ch : s)
            {
                if (ch == sep)
                {
                    out.push_back(trim(cur));
                    cur.clear();
                }
                else
                    cur.push_back(ch);
            }
            out.push_back(trim(cur));
            return out;
        }

        // Whitespace or comma separated fields
        std::vector<std::string> fields(const std::string &s)
        {
            std::vector<std::string> out;
            std::string cur;
            for (char ch : s)
            {
                if (ch == ',' || std::isspace(static_cast<unsigned char>(ch)))
                {
                    if (!cur.empty())
                        out.push_back(cur);
                    cur.clear();
                }
                else
                    cur.push_back(ch);
            }
            if (!cur.empty())
                out.push_back(cur);
            return out;
        }

        std::string join(const std::vector<double> &v)
        {
            std::string out;
            for (std::size_t i = 0; i < v.size(); ++i)
            {
                if (i)
                    out += ',';
                out += format_double(v[i]);
            }
            return out;
        }

        std::string permittivity_text(const ComplexPermittivity &eps)
        {
            return format_double(eps.real_part()) + "," + format_double(eps.imag_part());
        }

        // `# key=value` header line; returns false for any other line
        bool header_entry(const std::string &line, std::string &key, std::string &value)
        {
            if (line.empty() || line[0] != '#')
                return false;
            const std::string body = trim(line.substr(1));
            const auto eq = body.find('=');
            if (eq == std::string::npos)
                return false;
            key = trim(body.substr(0, eq));
            value = trim(body.substr(eq + 1));
            return true;
        }

        // Shared reader for `# key=value` headers followed by a two-column CSV body
        struct CsvWithHeader
        {
            std::map<std::string, std::pair<std::string, std::size_t>> header; // key -> (value, line)
            std::vector<std::pair<double, double>> rows;
        };

        CsvWithHeader parse_csv_with_header(const std::string &text, const std::string &path,
                                            const std::string &column_line, const std::vector<std::string> &known)
        {
            CsvWithHeader out;
            bool seen_columns = false;
            const auto lines = split_lines(text);
            for (std::size_t i = 0; i < lines.size(); ++i)
            {
                const std::size_t ln = i + 1;
                const std::string line = trim(lines[i]);
                if (line.empty())
                    continue;
                std::string key, value;
                if (line[0] == '#')
                {
                    if (seen_columns)
                        throw ParseError(path, ln, "header line after the data section");
                    if (!header_entry(line, key, value))
                        continue; // free comment
                    if (std::find(known.begin(), known.end(), key) == known.end())
                        throw ParseError(path, ln, "unknown header key '" + key + "'");
                    if (out.header.count(key))
                        throw ParseError(path, ln, "duplicate header key '" + key + "'");
                    out.header[key] = {value, ln};
                    continue;
                }
                if (!seen_columns)
                {
                    if (line != column_line)
                        throw ParseError(path, ln, "expected column header '" + column_line + "'");
                    seen_columns = true;
                    continue;
                }
                const auto parts = split(line, ',');
                if (parts.size() != 2)
                    throw ParseError(path, ln, "expected two comma-separated values");
                out.rows.emplace_back(parse_double(parts[0], path, ln), parse_double(parts[1], path, ln));
            }
            if (!seen_columns)
                throw ParseError(path, lines.size() + 1, "missing column header '" + column_line + "'");
            if (out.rows.empty())
                throw ParseError(path, lines.size() + 1, "no data rows");
            return out;
        }

        FrequencyGrid grid_from(const CsvWithHeader &csv, const std::string &path, const std::string &band_key)
        {
            std::vector<double> f;
            f.reserve(csv.rows.size());
            for (const auto &r : csv.rows)
                f.push_back(r.first);
            try
            {
                const auto it = csv.header.find(band_key);
                if (it == csv.header.end())
                    return FrequencyGrid(std::move(f));
                const auto band = parse_double_list(it->second.first, path, it->second.second);
                if (band.size() != 2)
                    throw ParseError(path, it->second.second, band_key + " needs two values");
                return FrequencyGrid(std::move(f), band[0], band[1]);
            }
            catch (const ParseError &)
            {
                throw;
            }
            catch (const InputError &e)
            {
                throw InputError(path + ": " + e.what());
            }
        }

        ComplexPermittivity parse_permittivity(const KeyValues &kv, const std::string &key)
        {
            const auto v = kv.numbers(key);
            if (v.size() != 2)
                throw InputError(kv.path() + ": " + key + " needs real,imag");
            return {v[0], v[1]};
        }
    }

    std::string format_double(double v)
    {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    double parse_double(const std::string &text, const std::string &path, std::size_t line)
    {
        const std::string t = trim(text);
        double v = 0.0;
        const char *first = t.data();
        const char *last = t.data() + t.size();
        if (!t.empty() && *first == '+')
            ++first;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (t.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
            throw ParseError(path, line, "not a finite number: '" + t + "'");
        return v;
    }

    std::vector<double> parse_double_list(const std::string &text, const std::string &path, std::size_t line)
    {
        std::vector<double> out;
        if (trim(text).empty())
            return out;
        for (const auto &part : split(text, ','))
            out.push_back(parse_double(part, path, line));
        return out;
    }

    std::string read_text(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw InputError("cannot open " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write_text_atomic(const std::filesystem::path &path, const std::string &content)
    {
        namespace fs = std::filesystem;
        if (path.has_parent_path())
        {
            std::error_code ec;
            fs::create_directories(path.parent_path(), ec);
            if (ec)
                throw InputError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        }
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out)
                throw InputError("cannot write " + tmp.string());
            out << content;
            out.flush();
            if (!out)
            {
                out.close();
                fs::remove(tmp);
                throw InputError("write failed for " + tmp.string());
            }
        }
        std::error_code ec;
        fs::rename(tmp, path, ec);
        if (ec)
        {
            fs::remove(tmp);
            throw InputError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
        }
    }

    // --- KeyValues ---

    KeyValues KeyValues::parse(const std::string &text, const std::string &path)
    {
        KeyValues kv;
        kv.path_ = path;
        const auto lines = split_lines(text);
        for (std::size_t i = 0; i < lines.size(); ++i)
        {
            const std::string line = trim(lines[i]);
            if (line.empty() || line[0] == '#')
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError(path, i + 1, "expected key=value");
            const std::string key = trim(line.substr(0, eq));
            if (key.empty())
                throw ParseError(path, i + 1, "empty key");
            if (kv.index_.count(key))
                throw ParseError(path, i + 1, "duplicate key '" + key + "'");
            kv.index_[key] = kv.entries_.size();
            kv.entries_.emplace_back(key, trim(line.substr(eq + 1)));
            kv.lines_.push_back(i + 1);
        }
        return kv;
    }

    KeyValues KeyValues::load(const std::filesystem::path &path)
    {
        return parse(read_text(path), path.string());
    }

    void KeyValues::set(const std::string &key, const std::string &value)
    {
        const auto it = index_.find(key);
        if (it != index_.end())
        {
            entries_[it->second].second = value;
            return;
        }
        index_[key] = entries_.size();
        entries_.emplace_back(key, value);
        lines_.push_back(0);
    }

    void KeyValues::set(const std::string &key, double value)
    {
        set(key, format_double(value));
    }

    bool KeyValues::has(const std::string &key) const
    {
        return index_.count(key) != 0;
    }

    std::size_t KeyValues::line_of(const std::string &key) const
    {
        return lines_[index_.at(key)];
    }

    const std::string &KeyValues::text(const std::string &key) const
    {
        const auto it = index_.find(key);
        if (it == index_.end())
            throw InputError((path_.empty() ? std::string("key-value input") : path_) + ": missing key '" + key + "'");
        return entries_[it->second].second;
    }

    std::string KeyValues::text_or(const std::string &key, const std::string &fallback) const
    {
        return has(key) ? text(key) : fallback;
    }

    double KeyValues::number(const std::string &key) const
    {
        const std::string &t = text(key);
        return parse_double(t, path_, line_of(key));
    }

    double KeyValues::number_or(const std::string &key, double fallback) const
    {
        return has(key) ? number(key) : fallback;
    }

    std::optional<double> KeyValues::optional_number(const std::string &key) const
    {
        if (!has(key))
            return std::nullopt;
        return number(key);
    }

    std::vector<double> KeyValues::numbers(const std::string &key) const
    {
        const std::string &t = text(key);
        return parse_double_list(t, path_, line_of(key));
    }

    bool KeyValues::boolean(const std::string &key) const
    {
        const std::string &v = text(key);
        if (v == "true" || v == "1")
            return true;
        if (v == "false" || v == "0")
            return false;
        throw ParseError(path_, line_of(key), "expected true or false for '" + key + "'");
    }

    bool KeyValues::boolean_or(const std::string &key, bool fallback) const
    {
        return has(key) ? boolean(key) : fallback;
    }

    void KeyValues::expect_only(const std::vector<std::string> &known) const
    {
        for (std::size_t i = 0; i < entries_.size(); ++i)
        {
            const std::string &key = entries_[i].first;
            const bool ok = std::any_of(known.begin(), known.end(), [&](const std::string &k) {
                return k == key || (!k.empty() && k.back() == '.' && key.rfind(k, 0) == 0);
            });
            if (!ok)
                throw ParseError(path_, lines_[i], "unknown key '" + key + "'");
        }
    }

    std::string KeyValues::dump() const
    {
        std::string out;
        for (const auto &[k, v] : entries_)
            out += k + "=" + v + "\n";
        return out;
    }

    // --- A-scan ---

    std::string format_ascan(const AScan &scan)
    {
        std::string out;
        out.reserve(scan.samples.size() * 24 + 128);
        out += "# sample_rate_hz=" + format_double(scan.sample_rate) + "\n";
        out += "# altitude_m=" + format_double(scan.altitude_est) + "\n";
        out += "# location=" + scan.location + "\n";
        for (double v : scan.samples)
        {
            out += format_double(v);
            out += '\n';
        }
        return out;
    }

    AScan parse_ascan(const std::string &text, const std::string &path)
    {
        AScan scan;
        bool have_rate = false;
        bool have_altitude = false;
        bool in_data = false;
        const auto lines = split_lines(text);
        for (std::size_t i = 0; i < lines.size(); ++i)
        {
            const std::size_t ln = i + 1;
            const std::string line = trim(lines[i]);
            if (line.empty())
                continue;
            if (line[0] == '#')
            {
                if (in_data)
                    throw ParseError(path, ln, "header line after samples");
                std::string key, value;
                if (!header_entry(line, key, value))
                    continue;
                if (key == "sample_rate_hz")
                {
                    scan.sample_rate = parse_double(value, path, ln);
                    if (!(scan.sample_rate > 0.0))
                        throw ParseError(path, ln, "sample rate must be > 0");
                    have_rate = true;
                }
                else if (key == "altitude_m")
                {
                    scan.altitude_est = parse_double(value, path, ln);
                    have_altitude = true;
                }
                else if (key == "location")
                    scan.location = value;
                else
                    throw ParseError(path, ln, "unknown header key '" + key + "'");
                continue;
            }
            in_data = true;
            const double v = parse_double(line, path, ln);
            if (!std::isfinite(v))
                throw ParseError(path, ln, "non-finite sample");
            scan.samples.push_back(v);
        }
        if (!have_rate)
            throw ParseError(path, 1, "missing '# sample_rate_hz=' header");
        if (!have_altitude)
            throw ParseError(path, 1, "missing '# altitude_m=' header");
        if (scan.samples.empty())
            throw ParseError(path, lines.size() + 1, "no samples");
        return scan;
    }

    void write_ascan(const std::filesystem::path &path, const AScan &scan)
    {
        write_text_atomic(path, format_ascan(scan));
    }

    AScan read_ascan(const std::filesystem::path &path)
    {
        return parse_ascan(read_text(path), path.string());
    }

    // --- calibration ---

    std::string format_calibration(const CalibrationFactor &cal)
    {
        std::string out;
        out += "# plate_side_m=" + format_double(cal.plate_side) + "\n";
        out += "# reference_ranges_m=" + join(cal.reference_ranges) + "\n";
        out += "# scan_count=" + std::to_string(cal.scan_count) + "\n";
        out += "# valid_band_hz=" + format_double(cal.valid_low) + "," + format_double(cal.valid_high) + "\n";
        out += "# band_hz=" + format_double(cal.grid.band_low()) + "," + format_double(cal.grid.band_high()) + "\n";
        out += "frequency_hz,c_value\n";
        for (std::size_t i = 0; i < cal.grid.size(); ++i)
            out += format_double(cal.grid[i]) + "," + format_double(cal.values[i]) + "\n";
        return out;
    }

    CalibrationFactor parse_calibration(const std::string &text, const std::string &path)
    {
        const auto csv = parse_csv_with_header(text, path, "frequency_hz,c_value",
                                               {"plate_side_m", "reference_ranges_m", "scan_count", "valid_band_hz",
                                                "band_hz"});
        const auto need = [&](const std::string &key) -> const std::pair<std::string, std::size_t> & {
            const auto it = csv.header.find(key);
            if (it == csv.header.end())
                throw ParseError(path, 1, "missing '# " + key + "=' header");
            return it->second;
        };
        CalibrationFactor cal{grid_from(csv, path, "band_hz"), {}, 0.0, {}, 0, 0.0, 0.0};
        for (const auto &r : csv.rows)
            cal.values.push_back(r.second);
        const auto &side = need("plate_side_m");
        cal.plate_side = parse_double(side.first, path, side.second);
        const auto &ranges = need("reference_ranges_m");
        cal.reference_ranges = parse_double_list(ranges.first, path, ranges.second);
        const auto &count = need("scan_count");
        const double n = parse_double(count.first, path, count.second);
        if (!(n >= 0.0) || n != std::floor(n))
            throw ParseError(path, count.second, "scan_count must be a non-negative integer");
        cal.scan_count = std::size_t(n);
        const auto &valid = need("valid_band_hz");
        const auto vb = parse_double_list(valid.first, path, valid.second);
        if (vb.size() != 2)
            throw ParseError(path, valid.second, "valid_band_hz needs two values");
        cal.valid_low = vb[0];
        cal.valid_high = vb[1];
        try
        {
            cal.validate();
        }
        catch (const InputError &e)
        {
            throw InputError(path + ": " + e.what());
        }
        return cal;
    }

    void write_calibration(const std::filesystem::path &path, const CalibrationFactor &cal)
    {
        write_text_atomic(path, format_calibration(cal));
    }

    CalibrationFactor read_calibration(const std::filesystem::path &path)
    {
        return parse_calibration(read_text(path), path.string());
    }

    // --- RCS spectrum ---

    std::string format_rcs(const RcsSpectrum &spectrum)
    {
        std::string out;
        out += "# band_hz=" + format_double(spectrum.grid.band_low()) + "," + format_double(spectrum.grid.band_high()) + "\n";
        if (spectrum.range_m)
            out += "# range_m=" + format_double(*spectrum.range_m) + "\n";
        if (!spectrum.location.empty())
            out += "# location=" + spectrum.location + "\n";
        out += "frequency_hz,rcs_m2\n";
        for (std::size_t i = 0; i < spectrum.grid.size(); ++i)
            out += format_double(spectrum.grid[i]) + "," + format_double(spectrum.values[i]) + "\n";
        return out;
    }

    RcsSpectrum parse_rcs(const std::string &text, const std::string &path)
    {
        const auto csv = parse_csv_with_header(text, path, "frequency_hz,rcs_m2", {"band_hz", "range_m", "location"});
        RcsSpectrum s{grid_from(csv, path, "band_hz"), {}, std::nullopt, {}};
        for (const auto &r : csv.rows)
            s.values.push_back(r.second);
        if (const auto it = csv.header.find("range_m"); it != csv.header.end())
            s.range_m = parse_double(it->second.first, path, it->second.second);
        if (const auto it = csv.header.find("location"); it != csv.header.end())
            s.location = it->second.first;
        for (std::size_t i = 0; i < csv.rows.size(); ++i)
            if (!(s.values[i] >= 0.0) || !std::isfinite(s.values[i]))
                throw InputError(path + ": RCS values must be finite and non-negative");
        return s;
    }

    void write_rcs(const std::filesystem::path &path, const RcsSpectrum &spectrum)
    {
        write_text_atomic(path, format_rcs(spectrum));
    }

    RcsSpectrum read_rcs(const std::filesystem::path &path)
    {
        return parse_rcs(read_text(path), path.string());
    }

    // --- canopy descriptor ---

    KeyValues canopy_to_keys(const CanopyDescriptor &c)
    {
        KeyValues kv;
        kv.set("crop_kind", to_string(c.crop_kind));
        kv.set("height", c.height);
        kv.set("stalk_density", c.stalk_density);
        kv.set("leaf_density", c.leaf_density);
        kv.set("corn_leaf_length", c.corn_leaf_length);
        kv.set("leaf_geometry.radius", c.leaf_geometry.radius);
        kv.set("leaf_geometry.thickness", c.leaf_geometry.thickness);
        kv.set("leaf_geometry.permittivity", permittivity_text(c.leaf_geometry.permittivity));
        if (c.stalk_geometry)
        {
            kv.set("stalk_geometry.radius", c.stalk_geometry->radius);
            kv.set("stalk_geometry.length", c.stalk_geometry->length);
            kv.set("stalk_geometry.permittivity", permittivity_text(c.stalk_geometry->permittivity));
        }
        switch (c.leaf_orientation.kind())
        {
        case OrientationDistribution::Kind::uniform:
            kv.set("leaf_orientation", "uniform");
            break;
        case OrientationDistribution::Kind::vertical:
            kv.set("leaf_orientation", "vertical");
            break;
        case OrientationDistribution::Kind::tabulated:
            kv.set("leaf_orientation", "tabulated");
            kv.set("leaf_orientation.n_psi", double(c.leaf_orientation.table_n_psi()));
            kv.set("leaf_orientation.n_delta", double(c.leaf_orientation.table_n_delta()));
            kv.set("leaf_orientation.density", join(c.leaf_orientation.table()));
            break;
        }
        return kv;
    }

    CanopyDescriptor canopy_from_keys(const KeyValues &kv)
    {
        kv.expect_only({"crop_kind", "height", "stalk_density", "leaf_density", "corn_leaf_length", "leaf_geometry.",
                        "stalk_geometry.", "leaf_orientation", "leaf_orientation."});
        const auto wrap = [&](auto &&fn) {
            try
            {
                return fn();
            }
            catch (const ParseError &)
            {
                throw;
            }
            catch (const InputError &e)
            {
                throw InputError(kv.path() + ": " + e.what());
            }
        };
        return wrap([&] {
            CanopyDescriptor c;
            c.crop_kind = crop_kind_from_string(kv.text_or("crop_kind", "soybean"));
            c.height = kv.number("height");
            c.stalk_density = kv.number_or("stalk_density", 0.0);
            c.leaf_density = kv.number_or("leaf_density", 0.0);
            c.corn_leaf_length = kv.number_or("corn_leaf_length", 0.0);
            // leaf geometry may be omitted for a canopy without leaves
            const bool leaves = c.leaf_density > 0.0;
            c.leaf_geometry.radius = leaves ? kv.number("leaf_geometry.radius") : kv.number_or("leaf_geometry.radius", 0.0);
            c.leaf_geometry.thickness =
                leaves ? kv.number("leaf_geometry.thickness") : kv.number_or("leaf_geometry.thickness", 0.0);
            if (leaves || kv.has("leaf_geometry.permittivity"))
                c.leaf_geometry.permittivity = parse_permittivity(kv, "leaf_geometry.permittivity");
            if (kv.has("stalk_geometry.radius") || kv.has("stalk_geometry.length"))
                c.stalk_geometry = CylinderGeometry{kv.number("stalk_geometry.radius"), kv.number("stalk_geometry.length"),
                                                    parse_permittivity(kv, "stalk_geometry.permittivity")};
            const std::string orient = kv.text_or("leaf_orientation", "uniform");
            if (orient == "uniform")
                c.leaf_orientation = OrientationDistribution::uniform();
            else if (orient == "vertical")
                c.leaf_orientation = OrientationDistribution::vertical();
            else if (orient == "tabulated")
            {
                const double np = kv.number("leaf_orientation.n_psi");
                const double nd = kv.number("leaf_orientation.n_delta");
                if (!(np >= 1.0) || !(nd >= 1.0) || np != std::floor(np) || nd != std::floor(nd))
                    throw InputError("orientation table sizes must be positive integers");
                c.leaf_orientation = OrientationDistribution::tabulated(std::size_t(np), std::size_t(nd),
                                                                        kv.numbers("leaf_orientation.density"));
            }
            else
                throw InputError("unknown leaf_orientation '" + orient + "'");
            c.validate();
            return c;
        });
    }

    void write_canopy(const std::filesystem::path &path, const CanopyDescriptor &canopy)
    {
        write_text_atomic(path, canopy_to_keys(canopy).dump());
    }

    CanopyDescriptor read_canopy(const std::filesystem::path &path)
    {
        return canopy_from_keys(KeyValues::load(path));
    }

    // --- point cloud ---

    PointCloud parse_point_cloud(const std::string &text, const std::string &path)
    {
        PointCloud cloud;
        bool any_data = false;
        std::size_t columns = 0;
        const auto lines = split_lines(text);
        for (std::size_t i = 0; i < lines.size(); ++i)
        {
            const std::size_t ln = i + 1;
            const std::string line = trim(lines[i]);
            if (line.empty() || line[0] == '#')
                continue;
            const auto f = fields(line);
            if (!any_data && !f.empty() && (f[0] == "x" || f[0] == "X"))
                continue; // column header
            if (f.size() != 3 && f.size() != 4)
                throw ParseError(path, ln, "expected 'x y z' or 'x y z intensity'");
            if (columns != 0 && f.size() != columns)
                throw ParseError(path, ln, "column count changed");
            columns = f.size();
            any_data = true;
            const Point3 p{parse_double(f[0], path, ln), parse_double(f[1], path, ln), parse_double(f[2], path, ln)};
            if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
                throw ParseError(path, ln, "non-finite coordinate");
            cloud.points.push_back(p);
            if (f.size() == 4)
                cloud.intensity.push_back(parse_double(f[3], path, ln));
        }
        cloud.tile_id = std::filesystem::path(path).stem().string();
        return cloud;
    }

    PointCloud read_point_cloud(const std::filesystem::path &path)
    {
        return parse_point_cloud(read_text(path), path.string());
    }

    void write_point_cloud(const std::filesystem::path &path, const PointCloud &cloud)
    {
        std::string out;
        out.reserve(cloud.points.size() * 64);
        const bool with_intensity = cloud.intensity.size() == cloud.points.size() && !cloud.intensity.empty();
        for (std::size_t i = 0; i < cloud.points.size(); ++i)
        {
            const Point3 &p = cloud.points[i];
            out += format_double(p.x) + " " + format_double(p.y) + " " + format_double(p.z);
            if (with_intensity)
                out += " " + format_double(cloud.intensity[i]);
            out += '\n';
        }
        write_text_atomic(path, out);
    }

    // --- allometry ---

    std::vector<Allometry> parse_allometry(const std::string &text, const std::string &path)
    {
        std::vector<Allometry> rows;
        bool header = false;
        bool with_thickness = false;
        const auto lines = split_lines(text);
        for (std::size_t i = 0; i < lines.size(); ++i)
        {
            const std::size_t ln = i + 1;
            const std::string line = trim(lines[i]);
            if (line.empty() || line[0] == '#')
                continue;
            const auto parts = split(line, ',');
            if (!header)
            {
                const std::vector<std::string> base{"crop_kind", "leaf_area_m2", "leaf_width_m", "stalk_radius_m"};
                auto extended = base;
                extended.push_back("leaf_thickness_m");
                if (parts == extended)
                    with_thickness = true;
                else if (parts != base)
                    throw ParseError(path, ln, "expected header 'crop_kind,leaf_area_m2,leaf_width_m,stalk_radius_m'");
                header = true;
                continue;
            }
            if (parts.size() != (with_thickness ? 5u : 4u))
                throw ParseError(path, ln, "wrong number of columns");
            Allometry a;
            try
            {
                a.crop_kind = crop_kind_from_string(parts[0]);
            }
            catch (const InputError &e)
            {
                throw ParseError(path, ln, e.what());
            }
            a.leaf_area = parse_double(parts[1], path, ln);
            a.leaf_width = parse_double(parts[2], path, ln);
            a.stalk_radius = parse_double(parts[3], path, ln);
            if (with_thickness)
                a.leaf_thickness = parse_double(parts[4], path, ln);
            if (!(a.leaf_area > 0.0) || !(a.leaf_width > 0.0) || !(a.stalk_radius >= 0.0) || !(a.leaf_thickness > 0.0))
                throw ParseError(path, ln, "allometry values must be positive");
            rows.push_back(a);
        }
        if (!header)
            throw ParseError(path, lines.size() + 1, "missing header");
        return rows;
    }

    std::vector<Allometry> read_allometry(const std::filesystem::path &path)
    {
        return parse_allometry(read_text(path), path.string());
    }

    void write_allometry(const std::filesystem::path &path, const std::vector<Allometry> &rows)
    {
        std::string out = "crop_kind,leaf_area_m2,leaf_width_m,stalk_radius_m,leaf_thickness_m\n";
        for (const Allometry &a : rows)
            out += to_string(a.crop_kind) + "," + format_double(a.leaf_area) + "," + format_double(a.leaf_width) + "," +
                   format_double(a.stalk_radius) + "," + format_double(a.leaf_thickness) + "\n";
        write_text_atomic(path, out);
    }

    const Allometry &find_allometry(const std::vector<Allometry> &rows, CropKind kind)
    {
        for (const Allometry &a : rows)
            if (a.crop_kind == kind)
                return a;
        throw InputError("allometry table has no row for " + to_string(kind));
    }

    // --- structure estimate ---

    KeyValues structure_to_keys(const CanopyStructureEstimate &est)
    {
        KeyValues kv;
        kv.set("crop_kind", to_string(est.crop_kind));
        kv.set("mean_height", est.mean_height);
        kv.set("plant_density", est.plant_density);
        kv.set("lai", est.lai);
        kv.set("leaf_density_area", est.leaf_density_area);
        kv.set("leaf_density_volume", est.leaf_density_volume);
        kv.set("leaf_area", est.leaf_area);
        kv.set("rows.direction", to_string(est.rows.row_direction));
        kv.set("rows.score", est.rows.score);
        kv.set("rows.spacing", est.rows.spacing);
        kv.set("rows.centerlines", join(est.rows.centerlines));
        kv.set("rows.boundaries", join(est.rows.boundaries));
        kv.set("rows.cross_extent", format_double(est.rows.cross_low) + "," + format_double(est.rows.cross_high));
        kv.set("rows.along_extent", format_double(est.rows.along_low) + "," + format_double(est.rows.along_high));
        std::vector<double> per_row(est.plants_per_row.begin(), est.plants_per_row.end());
        kv.set("plants_per_row", join(per_row));
        return kv;
    }

    CanopyStructureEstimate structure_from_keys(const KeyValues &kv)
    {
        CanopyStructureEstimate est;
        est.crop_kind = crop_kind_from_string(kv.text("crop_kind"));
        est.mean_height = kv.number("mean_height");
        est.plant_density = kv.number("plant_density");
        est.lai = kv.number("lai");
        est.leaf_density_area = kv.number("leaf_density_area");
        est.leaf_density_volume = kv.number("leaf_density_volume");
        est.leaf_area = kv.number("leaf_area");
        const std::string dir = kv.text("rows.direction");
        if (dir != "x" && dir != "y")
            throw InputError(kv.path() + ": rows.direction must be x or y");
        est.rows.row_direction = dir == "x" ? Axis::x : Axis::y;
        est.rows.score = kv.number("rows.score");
        est.rows.spacing = kv.number("rows.spacing");
        est.rows.centerlines = kv.numbers("rows.centerlines");
        est.rows.boundaries = kv.numbers("rows.boundaries");
        const auto cross = kv.numbers("rows.cross_extent");
        const auto along = kv.numbers("rows.along_extent");
        if (cross.size() != 2 || along.size() != 2)
            throw InputError(kv.path() + ": row extents need two values");
        est.rows.cross_low = cross[0];
        est.rows.cross_high = cross[1];
        est.rows.along_low = along[0];
        est.rows.along_high = along[1];
        for (double v : kv.numbers("plants_per_row"))
            est.plants_per_row.push_back(std::size_t(v));
        return est;
    }

    // --- retrieval report ---

    KeyValues search_to_keys(const SearchConfig &cfg, const std::string &prefix)
    {
        KeyValues kv;
        kv.set(prefix + "soil_low", cfg.soil_low);
        kv.set(prefix + "soil_high", cfg.soil_high);
        kv.set(prefix + "soil_count", double(cfg.soil_count));
        kv.set(prefix + "canopy_low", cfg.canopy_low);
        kv.set(prefix + "canopy_high", cfg.canopy_high);
        kv.set(prefix + "canopy_count", double(cfg.canopy_count));
        kv.set(prefix + "soil_loss_tangent", cfg.soil_loss_tangent);
        kv.set(prefix + "canopy_loss_tangent", cfg.canopy_loss_tangent);
        if (cfg.sub_band)
            kv.set(prefix + "sub_band_hz", format_double(cfg.sub_band->first) + "," + format_double(cfg.sub_band->second));
        kv.set_bool(prefix + "canopy_modeling", cfg.canopy_modeling_enabled);
        kv.set(prefix + "residual_mode", cfg.residual_mode == ResidualMode::db ? "db" : "linear");
        kv.set(prefix + "topp", join({cfg.topp.a0, cfg.topp.a1, cfg.topp.a2, cfg.topp.a3}));
        return kv;
    }

    KeyValues result_to_keys(const RetrievalResult &r)
    {
        KeyValues kv;
        kv.set("vwc", r.vwc.vwc());
        kv.set("eps_soil", permittivity_text(r.eps_soil));
        kv.set("eps_canopy", permittivity_text(r.eps_canopy));
        kv.set("residual", r.residual);
        kv.set("residual_mode", r.residual_mode == ResidualMode::db ? "db" : "linear");
        kv.set("soil_index", double(r.soil_index));
        kv.set("canopy_index", double(r.canopy_index));
        kv.set_bool("soil_at_boundary", r.soil_at_boundary);
        kv.set_bool("canopy_at_boundary", r.canopy_at_boundary);
        kv.set_bool("canopy_inert", r.canopy_inert);
        std::vector<double> f, sim, meas;
        for (const FitPoint &p : r.fit)
        {
            f.push_back(p.frequency);
            sim.push_back(p.simulated);
            meas.push_back(p.measured);
        }
        kv.set("fit.frequency_hz", join(f));
        kv.set("fit.simulated_m2", join(sim));
        kv.set("fit.measured_m2", join(meas));
        return kv;
    }

    RetrievalResult result_from_keys(const KeyValues &kv)
    {
        RetrievalResult r;
        r.vwc = SoilMoisture(kv.number("vwc"));
        r.eps_soil = parse_permittivity(kv, "eps_soil");
        r.eps_canopy = parse_permittivity(kv, "eps_canopy");
        r.residual = kv.number("residual");
        const std::string mode = kv.text("residual_mode");
        if (mode != "db" && mode != "linear")
            throw InputError(kv.path() + ": residual_mode must be linear or db");
        r.residual_mode = mode == "db" ? ResidualMode::db : ResidualMode::linear;
        r.soil_index = std::size_t(kv.number("soil_index"));
        r.canopy_index = std::size_t(kv.number("canopy_index"));
        r.soil_at_boundary = kv.boolean("soil_at_boundary");
        r.canopy_at_boundary = kv.boolean("canopy_at_boundary");
        r.canopy_inert = kv.boolean("canopy_inert");
        const auto f = kv.numbers("fit.frequency_hz");
        const auto sim = kv.numbers("fit.simulated_m2");
        const auto meas = kv.numbers("fit.measured_m2");
        if (sim.size() != f.size() || meas.size() != f.size())
            throw InputError(kv.path() + ": fit columns differ in length");
        for (std::size_t i = 0; i < f.size(); ++i)
            r.fit.push_back({f[i], sim[i], meas[i]});
        return r;
    }

    // --- tables ---

    std::string Table::format() const
    {
        std::string out;
        for (std::size_t i = 0; i < header.size(); ++i)
            out += (i ? "," : "") + header[i];
        out += '\n';
        for (const auto &row : rows)
        {
            for (std::size_t i = 0; i < row.size(); ++i)
                out += (i ? "," : "") + format_double(row[i]);
            out += '\n';
        }
        return out;
    }

    Table Table::parse(const std::string &text, const std::string &path)
    {
        Table t;
        const auto lines = split_lines(text);
        for (std::size_t i = 0; i < lines.size(); ++i)
        {
            const std::string line = trim(lines[i]);
            if (line.empty() || line[0] == '#')
                continue;
            const auto parts = split(line, ',');
            if (t.header.empty())
            {
                t.header = parts;
                continue;
            }
            if (parts.size() != t.header.size())
                throw ParseError(path, i + 1, "row has " + std::to_string(parts.size()) + " columns, header has " +
                                                  std::to_string(t.header.size()));
            std::vector<double> row;
            for (const auto &p : parts)
                row.push_back(parse_double(p, path, i + 1));
            t.rows.push_back(std::move(row));
        }
        if (t.header.empty())
            throw ParseError(path, lines.size() + 1, "missing header");
        return t;
    }

    std::size_t Table::column(const std::string &name) const
    {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw InputError("table has no column '" + name + "'");
        return std::size_t(it - header.begin());
    }

    void write_table(const std::filesystem::path &path, const Table &table)
    {
        write_text_atomic(path, table.format());
    }

    Table read_table(const std::filesystem::path &path)
    {
        return Table::parse(read_text(path), path.string());
    }

    Table beamwidth_table(const std::vector<BeamwidthRow> &rows)
    {
        Table t{{"effective_beamwidth_deg", "vwc", "vwc_error"}, {}};
        for (const auto &r : rows)
            t.rows.push_back({rad2deg(r.effective_beamwidth), r.vwc, r.vwc_error});
        return t;
    }

    Table bandwidth_table(const std::vector<BandRow> &rows)
    {
        Table t{{"band_low_hz", "band_high_hz", "bins", "vwc", "vwc_error"}, {}};
        for (const auto &r : rows)
            t.rows.push_back({r.low, r.high, double(r.bins), r.vwc, r.vwc_error});
        return t;
    }

    Table altitude_table(const std::vector<AltitudeRow> &rows)
    {
        Table t{{"altitude_m", "vwc"}, {}};
        for (const auto &r : rows)
            t.rows.push_back({r.altitude, r.vwc});
        return t;
    }

    Table ablation_table(const std::vector<AblationRow> &rows)
    {
        Table t{{"canopy_modeling", "vwc", "vwc_error"}, {}};
        for (const auto &r : rows)
            t.rows.push_back({r.canopy_modeling ? 1.0 : 0.0, r.vwc, r.vwc_error});
        return t;
    }
}
