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

// nadirsm command-line tool. Exit codes: 0 success, 1 input error, 2 numerical/validity error.

#include "nadirsm/commands.hpp"
#include "nadirsm/error.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace fs = std::filesystem;
using namespace nadirsm;

namespace
{
    struct Common
    {
        std::string config;
        std::string output_dir;

        cli::RunConfig load() const
        {
            if (config.empty())
            {
                cli::RunConfig c;
                c.validate();
                return c;
            }
            return cli::RunConfig::load(config);
        }

        fs::path out(const cli::RunConfig &cfg) const
        {
            const fs::path dir = cli::resolve_output_dir(
                cfg, output_dir.empty() ? std::nullopt : std::optional<fs::path>(output_dir));
            std::error_code ec;
            fs::create_directories(dir, ec);
            if (ec || !fs::is_directory(dir))
                throw InputError("cannot create output directory " + dir.string());
            return dir;
        }
    };

    void add_common(CLI::App *cmd, Common &c)
    {
        cmd->add_option("-c,--config", c.config, "run configuration (key=value)")->check(CLI::ExistingFile);
        cmd->add_option("-o,--output-dir", c.output_dir,
                        std::string("output directory; ") + cli::output_dir_env + " overrides it");
    }

    std::vector<fs::path> paths(const std::vector<std::string> &v)
    {
        return {v.begin(), v.end()};
    }

    std::optional<fs::path> optional_path(const std::string &s)
    {
        return s.empty() ? std::nullopt : std::optional<fs::path>(s);
    }

    void report(const std::vector<fs::path> &written)
    {
        for (const auto &p : written)
            std::cout << p.string() << '\n';
    }

    struct SweepCli
    {
        CLI::App *cmd = nullptr;
        cli::SweepKind kind;
        Common common;
        std::vector<std::string> spectra;
        std::string canopy;
        std::optional<double> truth_vwc;
        std::string truth;
        std::string name;
        std::vector<double> beamwidths;
        double band_width = 100e6;
    };

    const char *sweep_help(cli::SweepKind kind)
    {
        switch (kind)
        {
        case cli::SweepKind::beamwidth:
            return "VWC error against the effective beamwidth";
        case cli::SweepKind::bandwidth:
            return "full band against its top sub-band";
        case cli::SweepKind::altitude:
            return "retrieved VWC per flight altitude";
        case cli::SweepKind::canopy_ablation:
            return "VWC error with canopy modeling on and off";
        }
        return "";
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Soil moisture retrieval from nadir-looking wideband radar through crop canopy"};
    app.require_subcommand(1);

    Common sim_common;
    std::vector<std::string> scene_files;
    auto *sim = app.add_subcommand("simulate", "synthesize A-scans and a truth sidecar from scene specs");
    add_common(sim, sim_common);
    sim->add_option("scenes", scene_files, "scene spec files")->required();

    Common cal_common;
    std::vector<std::string> plate_scans;
    double plate_side = 0.0;
    std::vector<double> plate_ranges;
    std::string cal_name = "calibration";
    auto *cal = app.add_subcommand("calibrate", "derive the calibration factor from metal-plate scans");
    add_common(cal, cal_common);
    cal->add_option("scans", plate_scans, "plate A-scan files")->required();
    cal->add_option("--plate-side", plate_side, "plate side length [m]")->required();
    cal->add_option("--ranges", plate_ranges, "known plate ranges [m], one per scan; default: scan headers")
        ->delimiter(',');
    cal->add_option("--name", cal_name, "output base name");

    Common rcs_common;
    std::vector<std::string> rcs_scans;
    std::string rcs_cal;
    std::vector<double> rcs_ranges;
    auto *rcs = app.add_subcommand("rcs", "calibrated ground RCS spectra from A-scans");
    add_common(rcs, rcs_common);
    rcs->add_option("scans", rcs_scans, "ground A-scan files")->required();
    rcs->add_option("--calibration", rcs_cal, "calibration file; default: config calibration_file");
    rcs->add_option("--ranges", rcs_ranges, "known target ranges [m], one per scan; default: time of flight")
        ->delimiter(',');

    Common ret_common;
    std::vector<std::string> ret_spectra;
    std::string ret_canopy;
    auto *ret = app.add_subcommand("retrieve", "grid-search VWC retrieval from RCS spectra");
    add_common(ret, ret_common);
    ret->add_option("spectra", ret_spectra, "RCS spectrum files")->required();
    ret->add_option("--canopy", ret_canopy, "canopy descriptor; default: config canopy_file, else bare soil");

    Common lid_common;
    std::vector<std::string> clouds;
    std::string crop = "corn";
    std::string allometry;
    std::vector<double> tile_origin;
    double tile_size = 10.0;
    std::vector<double> canopy_eps{15.0, 4.5};
    auto *lid = app.add_subcommand("lidar", "canopy structure and descriptor from LiDAR point clouds");
    lid->add_option("-o,--output-dir", lid_common.output_dir,
                    std::string("output directory; ") + cli::output_dir_env + " overrides it");
    lid->add_option("clouds", clouds, "point cloud files")->required();
    lid->add_option("--crop", crop, "corn or soybean")->check(CLI::IsMember({"corn", "soybean"}));
    lid->add_option("--allometry", allometry, "allometry table")->required();
    lid->add_option("--tile", tile_origin, "tile origin x0,y0 [m]; default: floored cloud minimum")
        ->delimiter(',')
        ->expected(2);
    lid->add_option("--tile-size", tile_size, "tile side [m]");
    lid->add_option("--canopy-permittivity", canopy_eps, "vegetation permittivity real,imag")
        ->delimiter(',')
        ->expected(2);

    auto *sweep = app.add_subcommand("sweep", "sensitivity sweeps");
    sweep->require_subcommand(1);
    std::vector<SweepCli> sweeps;
    sweeps.reserve(4);
    for (auto kind : {cli::SweepKind::beamwidth, cli::SweepKind::bandwidth, cli::SweepKind::altitude,
                      cli::SweepKind::canopy_ablation})
    {
        SweepCli &s = sweeps.emplace_back();
        s.kind = kind;
        s.cmd = sweep->add_subcommand(cli::to_string(kind), sweep_help(kind));
        add_common(s.cmd, s.common);
        s.cmd->add_option("spectra", s.spectra, "RCS spectrum files")->required();
        s.cmd->add_option("--canopy", s.canopy, "canopy descriptor");
        s.cmd->add_option("--name", s.name, "output base name");
        if (kind != cli::SweepKind::altitude)
        {
            s.cmd->add_option("--truth-vwc", s.truth_vwc, "true VWC (fraction)");
            s.cmd->add_option("--truth", s.truth, "simulate truth sidecar supplying the VWC")->check(CLI::ExistingFile);
        }
        if (kind == cli::SweepKind::beamwidth)
            s.cmd->add_option("--beamwidths", s.beamwidths, "candidate effective beamwidths [deg]")->delimiter(',');
        if (kind == cli::SweepKind::bandwidth)
            s.cmd->add_option("--band-width", s.band_width, "narrow top sub-band width [Hz]");
    }

    Common plot_common;
    std::vector<std::string> plot_inputs;
    auto *plot = app.add_subcommand("plot", "plot data tables and SVG charts from spectra or sweep tables");
    plot->add_option("-o,--output-dir", plot_common.output_dir,
                     std::string("output directory; ") + cli::output_dir_env + " overrides it");
    plot->add_option("inputs", plot_inputs, "RCS spectra or sweep tables")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    try
    {
        if (*sim)
        {
            const auto cfg = sim_common.load();
            const auto dir = sim_common.out(cfg);
            for (const auto &scene : scene_files)
            {
                const auto out = cli::cmd_simulate(cfg, scene, dir);
                report(out.scans);
                report({out.truth});
            }
        }
        else if (*cal)
        {
            const auto cfg = cal_common.load();
            report({cli::cmd_calibrate(cfg, paths(plate_scans), plate_side, plate_ranges, cal_common.out(cfg),
                                       cal_name)});
        }
        else if (*rcs)
        {
            const auto cfg = rcs_common.load();
            fs::path calibration;
            if (!rcs_cal.empty())
                calibration = rcs_cal;
            else if (cfg.calibration_file)
                calibration = *cfg.calibration_file;
            else
                throw InputError("no calibration file: pass --calibration or set calibration_file");
            report(cli::cmd_rcs(cfg, paths(rcs_scans), calibration, rcs_common.out(cfg), rcs_ranges));
        }
        else if (*ret)
        {
            const auto cfg = ret_common.load();
            report(cli::cmd_retrieve(cfg, paths(ret_spectra), optional_path(ret_canopy), ret_common.out(cfg)));
        }
        else if (*lid)
        {
            cli::LidarRequest req;
            req.clouds = paths(clouds);
            req.crop_kind = crop_kind_from_string(crop);
            req.allometry = allometry;
            if (!tile_origin.empty())
                req.tile = Tile{tile_origin[0], tile_origin[1], tile_size};
            req.canopy_permittivity = ComplexPermittivity(canopy_eps[0], canopy_eps[1]);
            report(cli::cmd_lidar(req, lid_common.out(cli::RunConfig{})));
        }
        else if (*sweep)
        {
            for (auto &s : sweeps)
            {
                if (!*s.cmd)
                    continue;
                const auto cfg = s.common.load();
                cli::SweepRequest req;
                req.kind = s.kind;
                req.spectra = paths(s.spectra);
                req.canopy = optional_path(s.canopy);
                req.truth_vwc = s.truth_vwc;
                req.truth_file = optional_path(s.truth);
                req.beamwidths_deg = s.beamwidths;
                req.band_width = s.band_width;
                req.name = s.name;
                report(cli::cmd_sweep(cfg, req, s.common.out(cfg)));
            }
        }
        else if (*plot)
        {
            report(cli::cmd_plot(paths(plot_inputs), plot_common.out(cli::RunConfig{})));
        }
    }
    catch (const ValidityError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const InputError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    catch (const fs::filesystem_error &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
