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

#ifndef NADIRSM_CROP_SYNTH_HPP
#define NADIRSM_CROP_SYNTH_HPP

#include "nadirsm/canopy_rt.hpp"
#include "nadirsm/lidar_canopy.hpp"

#include <cstdint>
#include <vector>

// Synthetic row-crop tiles for the LiDAR pipeline. Plants are built from explicit geometry
// (vertical stalks, leaves as chains of disks with random normals) and sampled by ray
// casting with one return per pulse; some pulses are nadir, the rest oblique. Ground truth
// comes from the geometry, never from the extraction code.

namespace nadirsm
{
    struct CropFieldSpec
    {
        CropKind crop_kind = CropKind::corn;
        Tile tile;
        Axis row_direction = Axis::y;
        double row_spacing = 0.76;    // [m]
        double plant_spacing = 0.25;  // in-row [m]
        double position_jitter = 0.02; // [m], sd along the row
        double plant_height = 2.0;    // [m]
        double height_jitter = 0.04;  // relative sd

        // corn
        std::size_t leaves_per_plant = 12;
        double leaf_length = 0.7; // [m]
        double leaf_width = 0.08; // [m]; corn leaves are chains of disks of this diameter
        double stalk_radius = 0.015;
        double leaf_azimuth_spread = 1.5708; // half-range around the across-row direction [rad]
        std::size_t tassel_disks = 30;   // small disks clustered over the stalk top
        double tassel_radius = 0.07;     // cone base radius [m]
        double tassel_disk_radius = 0.015;

        // soybean
        std::size_t disks_per_plant = 200;
        double leaf_radius = 0.04;  // [m]
        double mound_radius = 0.3;  // [m]

        double pulse_density = 2500.0; // pulses per m^2
        double oblique_fraction = 0.5;  // share of pulses off nadir
        double max_scan_angle = 0.5236; // oblique zenith angles uniform in [0, this] [rad]
        double ground_noise = 0.01;    // [m]
        double canopy_noise = 0.005;   // [m]
        double ground_z = 0.0;
        double slope_x = 0.0; // dz/dx
        double slope_y = 0.0;
        double margin = 1.0; // plants are generated this far beyond the tile
        std::uint64_t seed = 1;
    };

    struct CropTruth
    {
        double row_spacing = 0.0;
        double plant_density = 0.0; // stems inside the tile per m^2
        std::size_t plants = 0;
        double lai = 0.0;         // one-sided disk area with centers in the tile per m^2
        double leaf_area = 0.0;   // mean single-leaf area [m^2]
        double mean_height = 0.0; // mean noiseless top surface over vegetated lattice points [m]
        double plant_height = 0.0;
        std::vector<Point3> stems; // plant base positions inside the tile, z = plant height
    };

    struct SyntheticCrop
    {
        PointCloud cloud;
        CropTruth truth;
    };

    SyntheticCrop generate_crop_tile(const CropFieldSpec &spec);

    // Allometry matching the generator's leaf model
    Allometry synthetic_allometry(const CropFieldSpec &spec);
}

#endif
