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

#ifndef NADIRSM_LIDAR_CANOPY_HPP
#define NADIRSM_LIDAR_CANOPY_HPP

#include "nadirsm/canopy_rt.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nadirsm
{
    struct Point3
    {
        double x = 0.0;
        double y = 0.0;
        double z = 0.0;
    };

    struct PointCloud
    {
        std::vector<Point3> points;
        std::vector<double> intensity; // empty or one value per point
        std::string tile_id;

        void validate() const; // finite coordinates, intensity length
    };

    // Square processing tile [x0, x0 + size) x [y0, y0 + size)
    struct Tile
    {
        double x0 = 0.0;
        double y0 = 0.0;
        double size = 10.0;

        bool contains(double x, double y) const { return x >= x0 && x < x0 + size && y >= y0 && y < y0 + size; }
        double area() const { return size * size; }
    };

    inline constexpr double chm_resolution = 0.02; // [m]
    inline constexpr double chm_sigma_px = 3.0;

    struct GroundOptions
    {
        double cell = 1.0;        // [m]
        double percentile = 0.05; // lowest fraction of each cell taken as ground candidates
        std::size_t min_points = 100;
        int refinement_passes = 3; // refits after dropping candidates far above the plane
    };

    // Plane z = a + b x + c y fitted to the low points of every cell, then subtracted
    PointCloud normalize_ground(const PointCloud &cloud, const GroundOptions &opts = {});

    // Raster of heights, row-major in y: value(ix, iy) = z[iy * nx + ix]
    struct CanopyHeightModel
    {
        double x0 = 0.0;
        double y0 = 0.0;
        double resolution = chm_resolution;
        std::size_t nx = 0;
        std::size_t ny = 0;
        std::vector<double> z;
        bool smoothed = false;

        double at(std::size_t ix, std::size_t iy) const { return z[iy * nx + ix]; }
        double x_center(std::size_t ix) const { return x0 + (double(ix) + 0.5) * resolution; }
        double y_center(std::size_t iy) const { return y0 + (double(iy) + 0.5) * resolution; }
        double mean() const;
    };

    // Per-cell maximum height (negative heights clamp to 0); empty cells take the value of the
    // nearest filled cell in grid distance. Throws InputError when no point falls in the tile.
    CanopyHeightModel rasterize_max(const PointCloud &cloud, const Tile &tile, double resolution = chm_resolution);

    // Separable normalized Gaussian, truncated at 3 sigma, mirrored edges. The serial and the
    // OpenMP version produce identical rasters.
    void gaussian_smooth_serial(CanopyHeightModel &chm, double sigma_px = chm_sigma_px);
    void gaussian_smooth_parallel(CanopyHeightModel &chm, double sigma_px = chm_sigma_px);

    CanopyHeightModel build_chm(const PointCloud &cloud, const Tile &tile, bool smooth = true);

    struct PeakOptions
    {
        double min_prominence = 0.0;
        std::size_t min_distance = 1; // samples; lower peaks closer than this to a kept peak are dropped
    };

    // Indices of local maxima (plateaus report their middle), ascending
    std::vector<std::size_t> find_peaks(std::span<const double> profile, const PeakOptions &opts = {});
    double peak_prominence(std::span<const double> profile, std::size_t peak);

    // 1 / (1 + CV) of the gaps between consecutive positions; 0 with fewer than three positions
    double periodicity_score(std::span<const double> positions);

    enum class Axis
    {
        x,
        y
    };

    std::string to_string(Axis a);

    struct RowSegmentation
    {
        Axis row_direction = Axis::y;    // rows run along this axis
        double score = 0.0;              // 1 / (1 + CV) of the row spacing
        double spacing = 0.0;            // mean centerline spacing [m]
        std::vector<double> centerlines; // offsets across the rows [m]
        std::vector<double> boundaries;  // profile minima between neighbouring centerlines [m]
        double cross_low = 0.0;          // extent of the raster across the rows [m]
        double cross_high = 0.0;
        double along_low = 0.0;          // extent along the rows [m]
        double along_high = 0.0;
    };

    struct RowOptions
    {
        double min_score = 0.3;
        double relative_prominence = 0.25; // of the profile range
        double min_prominence = 0.02;      // [m]
    };

    // Projects the CHM on both axes and keeps the one with the stronger periodicity. Throws
    // NoPeriodicity when the best score is below opts.min_score.
    RowSegmentation detect_rows(const CanopyHeightModel &chm, const RowOptions &opts = {});

    // Row strip [low, high) across the rows: half-way to the neighbouring centerlines, or half a
    // spacing for the outermost rows
    std::pair<double, double> row_strip(const RowSegmentation &rows, std::size_t i);

    struct PlantPosition
    {
        double x;
        double y;
        std::size_t row;
        double extent_low = 0.0; // along-row partition between neighbouring plants [m]
        double extent_high = 0.0;
    };

    struct PlantDetection
    {
        double density = 0.0; // plants per m^2 of tile
        std::vector<PlantPosition> plants;
        std::vector<std::size_t> per_row;
    };

    struct CornOptions
    {
        double core_fraction = 0.05;       // half-width of the sampled strip around a centerline, in row spacings
        double bin = 0.02;                 // [m]
        double smoothing_bins = 1.25;      // Gaussian sigma of the along-row profile
        double min_separation = 0.15;      // [m]
        double min_height = 0.1;           // points below are treated as ground [m]
        double relative_prominence = 0.25; // of the reference level
        double reference_quantile = 0.9;   // profile quantile used as the reference level
    };

    // Height-weighted point count along each row, peaks taken as stems
    PlantDetection plant_density_corn(const PointCloud &cloud, const RowSegmentation &rows, const Tile &tile,
                                      const CornOptions &opts = {});

    struct SoybeanOptions
    {
        double kernel_length = 0.1;  // along-row kernel size [m]; across the row it spans the strip
        double min_prominence = 0.03; // [m]
        double min_separation = 0.1;  // [m]
    };

    // Rectangular kernel over the smoothed CHM, peaks as plant centers, extents split at midpoints
    PlantDetection plant_density_soybean(const CanopyHeightModel &chm, const RowSegmentation &rows, const Tile &tile,
                                         const SoybeanOptions &opts = {});

    // Mean CHM over cells above `vegetated_fraction` of the 95th-percentile height
    double canopy_height(const CanopyHeightModel &chm, double vegetated_fraction = 0.25);

    enum class LaiForm
    {
        integrated, // LAI = -sum(dln P) / G
        printed     // LAI = -sum(dln P / v_z) / G
    };

    struct LaiOptions
    {
        std::size_t layers = 8;
        double projection = 0.5;       // G
        LaiForm form = LaiForm::integrated;
        double ground_threshold = 0.05; // returns below are ground hits [m]
        double column_size = 0.1;       // square voxel columns [m]; 0 inverts the whole tile at once
        std::size_t min_column_returns = 10; // sparser columns are skipped
    };

    struct LaiEstimate
    {
        double lai = 0.0;
        double layer_thickness = 0.0;          // v_z [m]
        std::vector<double> boundaries;        // top to bottom [m]
        std::vector<double> gap_probability;   // tile-wide P_gap at each boundary
        std::size_t columns = 0;               // columns averaged
    };

    // Gap probability at a boundary is the fraction of returns below it (single-return pulses).
    // Layers split [ground_threshold, max height] into equal slabs. With columns, the inversion runs
    // per column and the column LAIs are averaged, which removes most of the bias from clumped
    // foliage; a column gap probability of zero is floored at 1 / (n + 1). A tile whose returns are
    // all ground hits has LAI 0; a tile without returns raises ValidityError.
    LaiEstimate estimate_lai(const PointCloud &cloud, const Tile &tile, const LaiOptions &opts = {});

    // Combination of a top-to-bottom gap profile. Zero gap probability raises ValidityError.
    double lai_from_gap_profile(std::span<const double> gap_probability, double layer_thickness, double projection,
                                LaiForm form);

    struct LeafDensity
    {
        double per_area = 0.0;   // leaves / m^2
        double per_volume = 0.0; // leaves / m^3
    };

    LeafDensity leaf_density(double lai, double leaf_area, double canopy_height);

    struct Allometry
    {
        CropKind crop_kind = CropKind::corn;
        double leaf_area = 0.0;     // mean single-leaf area [m^2]
        double leaf_width = 0.0;    // [m]
        double stalk_radius = 0.0;  // [m], 0 for soybean
        double leaf_thickness = 3e-4;
    };

    struct CanopyStructureEstimate
    {
        CropKind crop_kind = CropKind::corn;
        double mean_height = 0.0;
        double plant_density = 0.0; // plants / m^2
        double lai = 0.0;
        double leaf_density_area = 0.0;
        double leaf_density_volume = 0.0;
        double leaf_area = 0.0;
        RowSegmentation rows;
        std::vector<std::size_t> plants_per_row;
    };

    struct LidarOptions
    {
        GroundOptions ground;
        RowOptions rows;
        CornOptions corn;
        SoybeanOptions soybean;
        LaiOptions lai;
        bool normalize = true;
    };

    // Full tile pipeline: ground normalization, CHM, rows, plant density, height, LAI, leaf density
    CanopyStructureEstimate extract_structure(const PointCloud &cloud, const Tile &tile, const Allometry &allometry,
                                              const LidarOptions &opts = {});

    // Descriptor for the forward model: leaves as disks of the allometric width, corn stalks as
    // cylinders spanning the canopy height, densities per m^3
    CanopyDescriptor to_descriptor(const CanopyStructureEstimate &est, const Allometry &allometry,
                                   const ComplexPermittivity &eps = ComplexPermittivity(15.0, 4.5));
}

#endif
