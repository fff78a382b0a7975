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

#include "nadirsm/commands.hpp"
#include "nadirsm/error.hpp"
#include "nadirsm/radar_dsp.hpp"
#include "nadirsm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>

namespace nadirsm::cli
{
    namespace
    {
        // File-level parallelism; the first failure (in input order) is rethrown
        template <class F>
        void for_each_input(std::size_t n, F &&fn)
        {
            std::vector<std::exception_ptr> errors(n);
            const auto count = std::ptrdiff_t(n);
#pragma omp parallel for schedule(dynamic)
            for (std::ptrdiff_t i = 0; i < count; ++i)
            {
                try
                {
                    fn(std::size_t(i));
                }
                catch (...)
                {
                    errors[std::size_t(i)] = std::current_exception();
                }
            }
            for (const auto &e : errors)
                if (e)
                    std::rethrow_exception(e);
        }

        fs::path resolve(const fs::path &base, const std::string &p)
        {
            const fs::path path(p);
            return path.is_absolute() || base.empty() ? path : base / path;
        }

        void require_file(const fs::path &p, const std::string &what)
        {
            if (!fs::is_regular_file(p))
                throw InputError(what + " not found: " + p.string());
        }

        std::string join_paths(const std::vector<fs::path> &paths)
        {
            std::string out;
            for (std::size_t i = 0; i < paths.size(); ++i)
                out += (i ? "," : "") + paths[i].filename().string();
            return out;
        }

        std::string join_numbers(const std::vector<double> &v)
        {
            std::string out;
            for (std::size_t i = 0; i < v.size(); ++i)
                out += (i ? "," : "") + io::format_double(v[i]);
            return out;
        }

        GateConfig gate_config(const RunConfig &cfg)
        {
            GateConfig g;
            g.center_frequency = cfg.center_frequency;
            return g;
        }

        ScanSettings scan_settings(const RunConfig &cfg, double noise, std::uint64_t seed)
        {
            ScanSettings s;
            s.synthesis.sample_rate = cfg.sample_rate;
            s.synthesis.center_frequency = cfg.center_frequency;
            s.synthesis.noise_level = noise;
            s.synthesis.seed = seed;
            s.hardware.reference_frequency = cfg.center_frequency;
            return s;
        }

        CanopyDescriptor load_canopy(const RunConfig &cfg, const std::optional<fs::path> &flag)
        {
            if (flag)
                return io::read_canopy(*flag);
            if (cfg.canopy_file)
                return io::read_canopy(*cfg.canopy_file);
            return {};
        }

        std::string canopy_source(const RunConfig &cfg, const std::optional<fs::path> &flag)
        {
            if (flag)
                return flag->string();
            return cfg.canopy_file ? cfg.canopy_file->string() : "none";
        }

        void append(io::KeyValues &into, const io::KeyValues &from, const std::string &prefix = "")
        {
            for (const auto &[k, v] : from.entries())
                into.set(prefix + k, v);
        }

        double truth_vwc(const SweepRequest &req)
        {
            if (req.truth_vwc)
                return *req.truth_vwc;
            if (req.truth_file)
                return io::KeyValues::load(*req.truth_file).number("vwc");
            throw InputError("this sweep needs the true VWC (--truth-vwc or --truth)");
        }

        std::string escape_xml(const std::string &s)
        {
            std::string out;
            for (char ch : s)
            {
                switch (ch)
                {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                case '"': out += "&quot;"; break;
                default: out += ch;
                }
            }
            return out;
        }

        std::string fmt(const char *pattern, double v)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, pattern, v);
            return buf;
        }
    }

    // --- RunConfig ---

    FrequencyGrid RunConfig::grid() const
    {
        return FrequencyGrid::linear(band_low, band_high, bins);
    }

    void RunConfig::validate() const
    {
        if (!(band_low > 0.0) || !(band_high > band_low))
            throw InputError("band must satisfy 0 < low < high");
        if (bins == 0)
            throw InputError("bins must be >= 1");
        if (!(center_frequency > 0.0) || !(sample_rate > 2.0 * band_high))
            throw InputError("sample rate must exceed twice the band edge and the center frequency must be > 0");
        search.validate();
        soil.validate();
        view.validate();
    }

    RunConfig RunConfig::from_keys(const io::KeyValues &kv, const fs::path &base_dir)
    {
        kv.expect_only({"band_hz", "bins", "center_frequency_hz", "sample_rate_hz", "search.", "soil.", "view.",
                        "canopy_file", "calibration_file", "output_dir", "seed"});
        RunConfig c;
        if (kv.has("band_hz"))
        {
            const auto band = kv.numbers("band_hz");
            if (band.size() != 2)
                throw InputError(kv.path() + ": band_hz needs two values");
            c.band_low = band[0];
            c.band_high = band[1];
        }
        const auto count = [&](const std::string &key, std::size_t fallback) {
            if (!kv.has(key))
                return fallback;
            const double v = kv.number(key);
            if (!(v >= 1.0) || v != std::floor(v))
                throw InputError(kv.path() + ": " + key + " must be a positive integer");
            return std::size_t(v);
        };
        c.bins = count("bins", c.bins);
        c.center_frequency = kv.number_or("center_frequency_hz", c.center_frequency);
        c.sample_rate = kv.number_or("sample_rate_hz", c.sample_rate);

        SearchConfig &s = c.search;
        s.soil_low = kv.number_or("search.soil_low", s.soil_low);
        s.soil_high = kv.number_or("search.soil_high", s.soil_high);
        s.soil_count = count("search.soil_count", s.soil_count);
        s.canopy_low = kv.number_or("search.canopy_low", s.canopy_low);
        s.canopy_high = kv.number_or("search.canopy_high", s.canopy_high);
        s.canopy_count = count("search.canopy_count", s.canopy_count);
        s.soil_loss_tangent = kv.number_or("search.soil_loss_tangent", s.soil_loss_tangent);
        s.canopy_loss_tangent = kv.number_or("search.canopy_loss_tangent", s.canopy_loss_tangent);
        if (kv.has("search.sub_band_hz"))
        {
            const auto sb = kv.numbers("search.sub_band_hz");
            if (sb.size() != 2)
                throw InputError(kv.path() + ": search.sub_band_hz needs two values");
            s.sub_band = std::pair{sb[0], sb[1]};
        }
        s.canopy_modeling_enabled = kv.boolean_or("search.canopy_modeling", s.canopy_modeling_enabled);
        const std::string mode = kv.text_or("search.residual_mode", "linear");
        if (mode != "linear" && mode != "db")
            throw InputError(kv.path() + ": search.residual_mode must be linear or db");
        s.residual_mode = mode == "db" ? ResidualMode::db : ResidualMode::linear;
        if (kv.has("search.topp"))
        {
            const auto t = kv.numbers("search.topp");
            if (t.size() != 4)
                throw InputError(kv.path() + ": search.topp needs four coefficients");
            s.topp = {t[0], t[1], t[2], t[3]};
        }

        c.soil.roughness_height = kv.number_or("soil.roughness_height_m", c.soil.roughness_height);
        if (kv.has("soil.scattering_beamwidth_deg"))
            c.soil.scattering_beamwidth = deg2rad(kv.number("soil.scattering_beamwidth_deg"));
        if (kv.has("soil.correlation_length_m"))
            c.soil.correlation_length = kv.number("soil.correlation_length_m");
        c.view.altitude = kv.number_or("view.altitude_m", c.view.altitude);
        if (kv.has("view.effective_beamwidth_deg"))
            c.view.effective_beamwidth = deg2rad(kv.number("view.effective_beamwidth_deg"));
        if (kv.has("view.halfpower_beamwidth_deg"))
            c.view.antenna_halfpower_beamwidth = deg2rad(kv.number("view.halfpower_beamwidth_deg"));

        if (kv.has("canopy_file") && kv.text("canopy_file") != "none")
        {
            c.canopy_file = resolve(base_dir, kv.text("canopy_file"));
            require_file(*c.canopy_file, "canopy file");
        }
        if (kv.has("calibration_file"))
        {
            c.calibration_file = resolve(base_dir, kv.text("calibration_file"));
            require_file(*c.calibration_file, "calibration file");
        }
        if (kv.has("output_dir"))
            c.output_dir = resolve(base_dir, kv.text("output_dir"));
        if (kv.has("seed"))
        {
            const double seed = kv.number("seed");
            if (!(seed >= 0.0) || seed != std::floor(seed) || seed > 9.0e15)
                throw InputError(kv.path() + ": seed must be a non-negative integer");
            c.seed = std::uint64_t(seed);
        }
        try
        {
            c.validate();
        }
        catch (const InputError &e)
        {
            throw InputError(kv.path() + ": " + e.what());
        }
        return c;
    }

    RunConfig RunConfig::load(const fs::path &path)
    {
        return from_keys(io::KeyValues::load(path), path.parent_path());
    }

    io::KeyValues RunConfig::to_keys() const
    {
        io::KeyValues kv;
        kv.set("band_hz", io::format_double(band_low) + "," + io::format_double(band_high));
        kv.set("bins", double(bins));
        kv.set("center_frequency_hz", center_frequency);
        kv.set("sample_rate_hz", sample_rate);
        append(kv, io::search_to_keys(search));
        kv.set("soil.roughness_height_m", soil.roughness_height);
        kv.set("soil.scattering_beamwidth_deg", rad2deg(soil.scattering_beamwidth));
        if (soil.correlation_length)
            kv.set("soil.correlation_length_m", *soil.correlation_length);
        kv.set("view.altitude_m", view.altitude);
        kv.set("view.effective_beamwidth_deg", rad2deg(view.effective_beamwidth));
        kv.set("view.halfpower_beamwidth_deg", rad2deg(view.antenna_halfpower_beamwidth));
        if (canopy_file)
            kv.set("canopy_file", canopy_file->string());
        if (calibration_file)
            kv.set("calibration_file", calibration_file->string());
        kv.set("output_dir", output_dir.string());
        kv.set("seed", double(seed));
        return kv;
    }

    fs::path resolve_output_dir(const RunConfig &cfg, const std::optional<fs::path> &flag)
    {
        if (const char *env = std::getenv(output_dir_env); env && *env)
            return fs::path(env);
        if (flag)
            return *flag;
        return cfg.output_dir;
    }

    std::string base_name(const fs::path &input)
    {
        std::string stem = input.stem().string();
        const std::string suffix = ".rcs";
        if (stem.size() > suffix.size() && stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0)
            stem.resize(stem.size() - suffix.size());
        return stem;
    }

    // --- simulate ---

    SimulateOutput cmd_simulate(const RunConfig &cfg, const fs::path &scene_file, const fs::path &out_dir)
    {
        const io::KeyValues spec = io::KeyValues::load(scene_file);
        spec.expect_only({"kind", "name", "location", "scans_per_altitude", "noise_level", "vwc", "altitudes_m",
                          "canopy_file", "canopy_permittivity", "canopy_top_rcs", "plate_side_m", "ranges_m"});
        const std::string kind = spec.text("kind");
        if (kind != "ground" && kind != "plate")
            throw InputError(scene_file.string() + ": kind must be ground or plate");
        const std::string name = spec.text_or("name", scene_file.stem().string());
        const std::string location = spec.text_or("location", name);
        const double noise = spec.number_or("noise_level", 0.0);
        if (!(noise >= 0.0))
            throw InputError(scene_file.string() + ": noise_level must be >= 0");
        const double reps = spec.number_or("scans_per_altitude", 1.0);
        if (!(reps >= 1.0) || reps != std::floor(reps))
            throw InputError(scene_file.string() + ": scans_per_altitude must be a positive integer");

        io::KeyValues truth;
        truth.set("kind", kind);
        truth.set("name", name);
        truth.set("location", location);
        truth.set("noise_level", noise);
        truth.set("seed", double(cfg.seed));
        truth.set("center_frequency_hz", cfg.center_frequency);
        truth.set("sample_rate_hz", cfg.sample_rate);

        SimulateOutput out;
        std::vector<AScan> scans;
        std::uint64_t seed = cfg.seed;
        if (kind == "plate")
        {
            const double side = spec.number("plate_side_m");
            const auto ranges = spec.numbers("ranges_m");
            if (ranges.empty())
                throw InputError(scene_file.string() + ": ranges_m is empty");
            for (double r : ranges)
                for (std::size_t k = 0; k < std::size_t(reps); ++k)
                {
                    AScan s = simulate_plate_scan(side, r, scan_settings(cfg, noise, seed++));
                    s.altitude_est = r;
                    s.location = location;
                    scans.push_back(std::move(s));
                }
            truth.set("plate_side_m", side);
            truth.set("ranges_m", join_numbers(ranges));
        }
        else
        {
            const double vwc = spec.number("vwc");
            const auto altitudes = spec.has("altitudes_m") ? spec.numbers("altitudes_m")
                                                           : std::vector<double>{cfg.view.altitude};
            if (altitudes.empty())
                throw InputError(scene_file.string() + ": altitudes_m is empty");
            Scene scene;
            scene.soil = cfg.soil;
            scene.soil.permittivity =
                ComplexPermittivity::from_loss_tangent(topp_permittivity(SoilMoisture(vwc), cfg.search.topp),
                                                       cfg.search.soil_loss_tangent);
            std::optional<fs::path> canopy_path;
            if (spec.has("canopy_file"))
            {
                if (spec.text("canopy_file") != "none")
                    canopy_path = resolve(scene_file.parent_path(), spec.text("canopy_file"));
            }
            else
                canopy_path = cfg.canopy_file;
            if (canopy_path)
                scene.canopy = io::read_canopy(*canopy_path);
            if (spec.has("canopy_permittivity"))
            {
                const auto e = spec.numbers("canopy_permittivity");
                if (e.size() != 2)
                    throw InputError(scene_file.string() + ": canopy_permittivity needs real,imag");
                scene.canopy = scene.canopy.with_permittivity({e[0], e[1]});
            }
            scene.canopy_top_rcs = spec.number_or("canopy_top_rcs", scene.canopy_top_rcs);
            for (double alt : altitudes)
                for (std::size_t k = 0; k < std::size_t(reps); ++k)
                {
                    scene.view = cfg.view;
                    scene.view.altitude = alt;
                    AScan s = simulate_scene_scan(scene, scan_settings(cfg, noise, seed++));
                    s.location = location;
                    scans.push_back(std::move(s));
                }
            truth.set("vwc", vwc);
            truth.set("eps_soil", io::format_double(scene.soil.permittivity.real_part()) + "," +
                                      io::format_double(scene.soil.permittivity.imag_part()));
            truth.set("altitudes_m", join_numbers(altitudes));
            truth.set("soil.roughness_height_m", scene.soil.roughness_height);
            truth.set("soil.scattering_beamwidth_deg", rad2deg(scene.soil.scattering_beamwidth));
            truth.set("view.effective_beamwidth_deg", rad2deg(cfg.view.effective_beamwidth));
            truth.set("canopy_top_rcs", scene.canopy_top_rcs);
            truth.set("canopy_file", canopy_path ? canopy_path->string() : "none");
            if (!scene.canopy.empty())
                append(truth, io::canopy_to_keys(scene.canopy), "canopy.");
        }

        out.scans.resize(scans.size());
        for (std::size_t i = 0; i < scans.size(); ++i)
            out.scans[i] = out_dir / (name + "_" + std::to_string(i) + ".ascan");
        for_each_input(scans.size(), [&](std::size_t i) { io::write_ascan(out.scans[i], scans[i]); });
        truth.set("scans", join_paths(out.scans));
        out.truth = out_dir / (name + ".truth.txt");
        io::write_text_atomic(out.truth, truth.dump());
        return out;
    }

    // --- calibrate ---

    fs::path cmd_calibrate(const RunConfig &cfg, const std::vector<fs::path> &scans, double plate_side,
                           const std::vector<double> &ranges, const fs::path &out_dir, const std::string &name)
    {
        if (scans.empty())
            throw InputError("calibration needs at least one plate scan");
        if (!ranges.empty() && ranges.size() != scans.size())
            throw InputError("give one range per plate scan");
        std::vector<PlateScan> plates(scans.size());
        for_each_input(scans.size(), [&](std::size_t i) {
            plates[i].scan = io::read_ascan(scans[i]);
            plates[i].range = ranges.empty() ? plates[i].scan.altitude_est : ranges[i];
        });
        const CalibrationFactor cal = derive_calibration(plates, plate_side, cfg.grid(), gate_config(cfg));
        const fs::path path = out_dir / (name + ".cal.csv");
        io::write_calibration(path, cal);
        return path;
    }

    // --- rcs ---

    std::vector<fs::path> cmd_rcs(const RunConfig &cfg, const std::vector<fs::path> &scans, const fs::path &calibration,
                                  const fs::path &out_dir, const std::vector<double> &ranges)
    {
        if (!ranges.empty() && ranges.size() != scans.size())
            throw InputError("give one range per scan");
        const CalibrationFactor cal = io::read_calibration(calibration);
        std::vector<fs::path> out(scans.size());
        for_each_input(scans.size(), [&](std::size_t i) {
            const AScan scan = io::read_ascan(scans[i]);
            const auto known_range = [&] {
                const GatedSegment seg = isolate_return(scan, ranges[i], gate_config(cfg));
                return measured_rcs(channel_response(seg, cal.valid_grid()), ranges[i], cal);
            };
            RcsSpectrum s = ranges.empty() ? ground_rcs_from_scan(scan, cal, gate_config(cfg)) : known_range();
            s.location = scan.location;
            out[i] = out_dir / (base_name(scans[i]) + ".rcs.csv");
            io::write_rcs(out[i], s);
        });
        return out;
    }

    // --- retrieve ---

    std::vector<fs::path> cmd_retrieve(const RunConfig &cfg, const std::vector<fs::path> &spectra,
                                       const std::optional<fs::path> &canopy, const fs::path &out_dir)
    {
        const CanopyDescriptor structure = load_canopy(cfg, canopy);
        std::vector<fs::path> out(spectra.size());
        for_each_input(spectra.size(), [&](std::size_t i) {
            const RcsSpectrum s = io::read_rcs(spectra[i]);
            ViewGeometry view = cfg.view;
            if (s.range_m)
                view.altitude = *s.range_m;
            const RetrievalResult r = retrieve(s, structure, cfg.soil, view, cfg.search);

            io::KeyValues report = io::result_to_keys(r);
            report.set("input", spectra[i].string());
            report.set("location", s.location);
            report.set("canopy_file", canopy_source(cfg, canopy));
            report.set("view.altitude_m", view.altitude);
            report.set("view.effective_beamwidth_deg", rad2deg(view.effective_beamwidth));
            report.set("soil.roughness_height_m", cfg.soil.roughness_height);
            report.set("soil.scattering_beamwidth_deg", rad2deg(cfg.soil.scattering_beamwidth));
            append(report, io::search_to_keys(cfg.search));
            out[i] = out_dir / (base_name(spectra[i]) + ".report.txt");
            io::write_text_atomic(out[i], report.dump());
        });
        return out;
    }

    // --- lidar ---

    std::vector<fs::path> cmd_lidar(const LidarRequest &req, const fs::path &out_dir)
    {
        const auto table = io::read_allometry(req.allometry);
        const Allometry &allometry = io::find_allometry(table, req.crop_kind);
        std::vector<fs::path> out(2 * req.clouds.size());
        for_each_input(req.clouds.size(), [&](std::size_t i) {
            const PointCloud cloud = io::read_point_cloud(req.clouds[i]);
            if (cloud.points.empty())
                throw InputError(req.clouds[i].string() + ": empty point cloud");
            Tile tile;
            if (req.tile)
                tile = *req.tile;
            else
            {
                double x0 = cloud.points[0].x;
                double y0 = cloud.points[0].y;
                for (const Point3 &p : cloud.points)
                {
                    x0 = std::min(x0, p.x);
                    y0 = std::min(y0, p.y);
                }
                tile.x0 = std::floor(x0);
                tile.y0 = std::floor(y0);
            }
            const CanopyStructureEstimate est = extract_structure(cloud, tile, allometry, req.options);
            CanopyStructureEstimate tagged = est;
            tagged.crop_kind = req.crop_kind;
            const CanopyDescriptor desc = to_descriptor(tagged, allometry, req.canopy_permittivity);

            io::KeyValues kv = io::structure_to_keys(tagged);
            kv.set("tile.origin", io::format_double(tile.x0) + "," + io::format_double(tile.y0));
            kv.set("tile.size", tile.size);
            const std::string base = base_name(req.clouds[i]);
            out[2 * i] = out_dir / (base + ".structure.txt");
            out[2 * i + 1] = out_dir / (base + ".canopy.txt");
            io::write_text_atomic(out[2 * i], kv.dump());
            io::write_canopy(out[2 * i + 1], desc);
        });
        return out;
    }

    // --- sweep ---

    SweepKind sweep_kind_from_string(const std::string &s)
    {
        if (s == "beamwidth")
            return SweepKind::beamwidth;
        if (s == "bandwidth")
            return SweepKind::bandwidth;
        if (s == "altitude")
            return SweepKind::altitude;
        if (s == "canopy-ablation")
            return SweepKind::canopy_ablation;
        throw InputError("unknown sweep kind '" + s + "'");
    }

    std::string to_string(SweepKind kind)
    {
        switch (kind)
        {
        case SweepKind::beamwidth: return "beamwidth";
        case SweepKind::bandwidth: return "bandwidth";
        case SweepKind::altitude: return "altitude";
        case SweepKind::canopy_ablation: return "canopy-ablation";
        }
        return "unknown";
    }

    std::vector<fs::path> cmd_sweep(const RunConfig &cfg, const SweepRequest &req, const fs::path &out_dir)
    {
        if (req.spectra.empty())
            throw InputError("sweep needs at least one RCS spectrum");
        if (req.kind != SweepKind::altitude && req.spectra.size() != 1)
            throw InputError(to_string(req.kind) + " sweep takes exactly one spectrum");
        const CanopyDescriptor structure = load_canopy(cfg, req.canopy);
        std::vector<RcsSpectrum> spectra;
        for (const auto &p : req.spectra)
            spectra.push_back(io::read_rcs(p));
        ViewGeometry view = cfg.view;
        if (spectra[0].range_m)
            view.altitude = *spectra[0].range_m;

        io::Table table;
        std::vector<Series> series;
        std::string x_label;
        std::string y_label = "VWC error";
        switch (req.kind)
        {
        case SweepKind::beamwidth:
        {
            std::vector<double> theta;
            for (double d : req.beamwidths_deg)
                theta.push_back(deg2rad(d));
            if (theta.empty())
                theta = default_beamwidth_range(cfg.soil.scattering_beamwidth);
            // every candidate must be a valid view
            view.antenna_halfpower_beamwidth =
                std::max(view.antenna_halfpower_beamwidth, *std::max_element(theta.begin(), theta.end()));
            table = io::beamwidth_table(
                sweep_effective_beamwidth(spectra[0], structure, cfg.soil, view, cfg.search, theta, truth_vwc(req)));
            x_label = "effective beamwidth [deg]";
            series.push_back({"error", {}, {}});
            for (const auto &r : table.rows)
            {
                series[0].x.push_back(r[0]);
                series[0].y.push_back(r[2]);
            }
            break;
        }
        case SweepKind::bandwidth:
        {
            const auto bands = default_bandwidth_cases(spectra[0], req.band_width);
            table = io::bandwidth_table(
                sweep_bandwidth(spectra[0], structure, cfg.soil, view, cfg.search, bands, truth_vwc(req)));
            x_label = "band low edge [MHz]";
            series.push_back({"error", {}, {}});
            for (const auto &r : table.rows)
            {
                series[0].x.push_back(r[0] / 1e6);
                series[0].y.push_back(r[4]);
            }
            break;
        }
        case SweepKind::altitude:
        {
            table = io::altitude_table(sweep_altitude(spectra, structure, cfg.soil, view, cfg.search));
            x_label = "altitude [m]";
            y_label = "VWC";
            series.push_back({"vwc", {}, {}});
            for (const auto &r : table.rows)
            {
                series[0].x.push_back(r[0]);
                series[0].y.push_back(r[1]);
            }
            break;
        }
        case SweepKind::canopy_ablation:
        {
            table = io::ablation_table(
                sweep_canopy_ablation(spectra[0], structure, cfg.soil, view, cfg.search, truth_vwc(req)));
            x_label = "canopy modeling (0 off, 1 on)";
            series.push_back({"error", {}, {}});
            for (const auto &r : table.rows)
            {
                series[0].x.push_back(r[0]);
                series[0].y.push_back(r[2]);
            }
            break;
        }
        }

        const std::string name = req.name.empty() ? base_name(req.spectra[0]) : req.name;
        const std::string stem = name + "." + to_string(req.kind);
        const fs::path csv = out_dir / (stem + ".csv");
        const fs::path svg = out_dir / (stem + ".svg");
        io::write_table(csv, table);
        io::write_text_atomic(svg, render_svg(to_string(req.kind) + " sweep", x_label, y_label, series));
        return {csv, svg};
    }

    // --- plot ---

    std::vector<fs::path> cmd_plot(const std::vector<fs::path> &inputs, const fs::path &out_dir)
    {
        std::vector<fs::path> out;
        std::vector<std::vector<fs::path>> per_input(inputs.size());
        for_each_input(inputs.size(), [&](std::size_t i) {
            const std::string text = io::read_text(inputs[i]);
            const std::string base = base_name(inputs[i]);
            if (text.find("frequency_hz,rcs_m2") != std::string::npos)
            {
                const RcsSpectrum s = io::parse_rcs(text, inputs[i].string());
                io::Table t{{"frequency_mhz", "rcs_dbsm"}, {}};
                Series line{base, {}, {}};
                for (std::size_t k = 0; k < s.grid.size(); ++k)
                {
                    const double db = to_db(s.values[k]);
                    t.rows.push_back({s.grid[k] / 1e6, db});
                    if (std::isfinite(db))
                    {
                        line.x.push_back(s.grid[k] / 1e6);
                        line.y.push_back(db);
                    }
                }
                const fs::path csv = out_dir / (base + ".plot.csv");
                const fs::path svg = out_dir / (base + ".svg");
                io::write_table(csv, t);
                io::write_text_atomic(svg, render_svg(base, "frequency [MHz]", "RCS [dBsm]", {line}));
                per_input[i] = {csv, svg};
                return;
            }
            const io::Table t = io::Table::parse(text, inputs[i].string());
            if (t.header.size() < 2)
                throw InputError(inputs[i].string() + ": a plot table needs at least two columns");
            std::vector<Series> series;
            for (std::size_t c = 1; c < t.header.size(); ++c)
            {
                if (t.header[c] == "bins" || t.header[c] == "band_high_hz")
                    continue;
                Series s{t.header[c], {}, {}};
                for (const auto &r : t.rows)
                {
                    s.x.push_back(r[0]);
                    s.y.push_back(r[c]);
                }
                series.push_back(std::move(s));
            }
            const fs::path svg = out_dir / (base + ".svg");
            io::write_text_atomic(svg, render_svg(base, t.header[0], "value", series));
            per_input[i] = {svg};
        });
        for (auto &v : per_input)
            out.insert(out.end(), v.begin(), v.end());
        return out;
    }

    std::string render_svg(const std::string &title, const std::string &x_label, const std::string &y_label,
                           const std::vector<Series> &series)
    {
        const double width = 640.0;
        const double height = 400.0;
        const double left = 70.0, right = 20.0, top = 40.0, bottom = 50.0;
        double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
        for (const Series &s : series)
            for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                {
                    x0 = std::min(x0, s.x[i]);
                    x1 = std::max(x1, s.x[i]);
                    y0 = std::min(y0, s.y[i]);
                    y1 = std::max(y1, s.y[i]);
                }
        if (!(x0 <= x1))
        {
            x0 = 0.0;
            x1 = 1.0;
            y0 = 0.0;
            y1 = 1.0;
        }
        if (x1 == x0)
        {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if (y1 == y0)
        {
            y0 -= 0.5;
            y1 += 0.5;
        }
        const double pw = width - left - right;
        const double ph = height - top - bottom;
        const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
        const auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

        static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
        std::string svg;
        svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
        svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
        svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
               escape_xml(title) + "</text>\n";
        svg += "<rect x=\"" + fmt("%.1f", left) + "\" y=\"" + fmt("%.1f", top) + "\" width=\"" + fmt("%.1f", pw) +
               "\" height=\"" + fmt("%.1f", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int k = 0; k <= 4; ++k)
        {
            const double xv = x0 + (x1 - x0) * k / 4.0;
            const double yv = y0 + (y1 - y0) * k / 4.0;
            svg += "<text x=\"" + fmt("%.1f", px(xv)) + "\" y=\"" + fmt("%.1f", top + ph + 16) +
                   "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fmt("%.4g", xv) +
                   "</text>\n";
            svg += "<text x=\"" + fmt("%.1f", left - 6) + "\" y=\"" + fmt("%.1f", py(yv) + 4) +
                   "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fmt("%.4g", yv) +
                   "</text>\n";
        }
        svg += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"" + fmt("%.1f", height - 12) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape_xml(x_label) +
               "</text>\n";
        svg += "<text x=\"16\" y=\"" + fmt("%.1f", top + ph / 2) + "\" transform=\"rotate(-90 16 " +
               fmt("%.1f", top + ph / 2) + ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
               escape_xml(y_label) + "</text>\n";
        for (std::size_t s = 0; s < series.size(); ++s)
        {
            std::string pts;
            for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i)
                if (std::isfinite(series[s].x[i]) && std::isfinite(series[s].y[i]))
                    pts += fmt("%.2f", px(series[s].x[i])) + "," + fmt("%.2f", py(series[s].y[i])) + " ";
            const char *color = colors[s % 6];
            svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
                   "\"/>\n";
            if (series.size() > 1)
                svg += "<text x=\"" + fmt("%.1f", left + pw - 8) + "\" y=\"" + fmt("%.1f", top + 16 + 14.0 * double(s)) +
                       "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color + "\">" +
                       escape_xml(series[s].label) + "</text>\n";
        }
        svg += "</svg>\n";
        return svg;
    }
}
