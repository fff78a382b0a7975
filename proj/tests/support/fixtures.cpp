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

#include "fixtures.hpp"

namespace nadirsm::test
{
    CanopyDescriptor corn_canopy(const ComplexPermittivity &eps)
    {
        CanopyDescriptor c;
        c.crop_kind = CropKind::corn;
        c.height = 2.0;
        c.stalk_density = 3.5;
        c.stalk_geometry = CylinderGeometry{0.012, 2.0, eps};
        c.leaf_density = 42.0;
        c.leaf_geometry = DiskGeometry{0.04, 0.0003, eps};
        c.corn_leaf_length = 0.7;
        return c;
    }

    CanopyDescriptor soybean_canopy(const ComplexPermittivity &eps)
    {
        CanopyDescriptor c;
        c.crop_kind = CropKind::soybean;
        c.height = 0.8;
        c.leaf_density = 1000.0;
        c.leaf_geometry = DiskGeometry{0.04, 0.0002, eps};
        return c;
    }

    CanopyDescriptor dense_wet_canopy()
    {
        CanopyDescriptor c = soybean_canopy(ComplexPermittivity(30.0, 9.0));
        c.height = 1.0;
        c.leaf_density = 3000.0;
        c.leaf_geometry.thickness = 0.0003;
        return c;
    }

    ComplexPermittivity soil_eps(double vwc, double loss_tangent)
    {
        return ComplexPermittivity::from_loss_tangent(topp_permittivity(SoilMoisture(vwc)), loss_tangent);
    }

    Scene make_scene(double vwc, const CanopyDescriptor &canopy, double altitude)
    {
        Scene s;
        s.soil.permittivity = soil_eps(vwc);
        s.canopy = canopy;
        s.view.altitude = altitude;
        return s;
    }

    ScanSettings settings(std::uint64_t seed, double noise)
    {
        ScanSettings s;
        s.synthesis.seed = seed;
        s.synthesis.noise_level = noise;
        return s;
    }

    std::vector<PlateScan> plate_scans(double side, std::size_t n, double noise, std::uint64_t seed)
    {
        std::vector<PlateScan> out;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double r = n == 1 ? 6.0 : 6.0 + 3.0 * double(i) / double(n - 1);
            out.push_back({simulate_plate_scan(side, r, settings(seed + i, noise)), r});
        }
        return out;
    }

    CalibrationFactor calibration(const FrequencyGrid &grid)
    {
        return derive_calibration(plate_scans(), 0.9, grid);
    }

    RcsSpectrum measure(const Scene &scene, const CalibrationFactor &cal, std::uint64_t seed)
    {
        return ground_rcs_from_scan(simulate_scene_scan(scene, settings(seed)), cal);
    }

    ViewGeometry view_for(const RcsSpectrum &spectrum, const Scene &scene)
    {
        ViewGeometry v = scene.view;
        if (spectrum.range_m)
            v.altitude = *spectrum.range_m;
        return v;
    }

    RcsSpectrum perturb(const RcsSpectrum &s, std::mt19937_64 &rng, double sd_db)
    {
        std::normal_distribution<double> n(0.0, sd_db);
        RcsSpectrum out = s;
        for (double &v : out.values)
            v *= from_db(n(rng));
        return out;
    }

    std::vector<CropFieldSpec> crop_tiles()
    {
        std::vector<CropFieldSpec> tiles;
        CropFieldSpec corn;
        tiles.push_back(corn);

        corn.row_direction = Axis::x;
        corn.seed = 3;
        tiles.push_back(corn);

        corn.row_direction = Axis::y;
        corn.plant_spacing = 0.5;
        corn.seed = 5;
        tiles.push_back(corn);

        CropFieldSpec soy;
        soy.crop_kind = CropKind::soybean;
        soy.plant_height = 0.8;
        soy.plant_spacing = 0.5;
        soy.seed = 7;
        tiles.push_back(soy);

        soy.slope_x = 0.035;
        soy.ground_z = 3.2;
        soy.seed = 9;
        tiles.push_back(soy);
        return tiles;
    }
}
