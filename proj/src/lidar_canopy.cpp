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

#include "nadirsm/lidar_canopy.hpp"
#include "nadirsm/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>

namespace nadirsm
{
    void PointCloud::validate() const
    {
        for (const Point3 &p : points)
            if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
                throw InputError("point cloud contains a non-finite coordinate");
        if (!intensity.empty() && intensity.size() != points.size())
            throw InputError("intensity count does not match the point count");
    }

    namespace
    {
        struct Plane
        {
            double a = 0.0, b = 0.0, c = 0.0;
            double operator()(double x, double y) const { return a + b * x + c * y; }
        };

        Plane fit_plane(const std::vector<Point3> &pts)
        {
            Eigen::MatrixXd m(Eigen::Index(pts.size()), 3);
            Eigen::VectorXd rhs(Eigen::Index(pts.size()));
            for (std::size_t i = 0; i < pts.size(); ++i)
            {
                m(Eigen::Index(i), 0) = 1.0;
                m(Eigen::Index(i), 1) = pts[i].x;
                m(Eigen::Index(i), 2) = pts[i].y;
                rhs(Eigen::Index(i)) = pts[i].z;
            }
            // minimum-norm solution also covers collinear candidate sets
            const Eigen::Vector3d coef = m.completeOrthogonalDecomposition().solve(rhs);
            return {coef(0), coef(1), coef(2)};
        }

        double median_of(std::vector<double> v)
        {
            const auto mid = v.begin() + std::ptrdiff_t(v.size() / 2);
            std::nth_element(v.begin(), mid, v.end());
            return *mid;
        }

        // symmetric extension: d c b a | a b c d | d c b a
        std::size_t mirror(std::ptrdiff_t i, std::size_t n)
        {
            const auto period = std::ptrdiff_t(2 * n);
            i %= period;
            if (i < 0)
                i += period;
            return std::size_t(i < std::ptrdiff_t(n) ? i : period - 1 - i);
        }

        std::vector<double> gaussian_kernel(double sigma)
        {
            const auto radius = std::ptrdiff_t(std::ceil(3.0 * sigma));
            std::vector<double> w(std::size_t(2 * radius + 1));
            double sum = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k)
            {
                const double v = std::exp(-double(k * k) / (2.0 * sigma * sigma));
                w[std::size_t(k + radius)] = v;
                sum += v;
            }
            for (double &v : w)
                v /= sum;
            return w;
        }

        double convolve_at(const double *line, std::size_t n, std::ptrdiff_t stride, std::size_t i,
                           const std::vector<double> &w)
        {
            const auto radius = std::ptrdiff_t(w.size() / 2);
            double acc = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k)
                acc += w[std::size_t(k + radius)] * line[std::ptrdiff_t(mirror(std::ptrdiff_t(i) + k, n)) * stride];
            return acc;
        }

        std::vector<double> smooth_1d(const std::vector<double> &v, double sigma)
        {
            if (sigma <= 0.0 || v.empty())
                return v;
            const std::vector<double> w = gaussian_kernel(sigma);
            std::vector<double> out(v.size());
            for (std::size_t i = 0; i < v.size(); ++i)
                out[i] = convolve_at(v.data(), v.size(), 1, i, w);
            return out;
        }

        std::vector<double> box_1d(const std::vector<double> &v, std::size_t width)
        {
            if (width <= 1)
                return v;
            const auto half = std::ptrdiff_t(width / 2);
            std::vector<double> out(v.size());
            for (std::size_t i = 0; i < v.size(); ++i)
            {
                double acc = 0.0;
                std::size_t count = 0;
                for (std::ptrdiff_t k = -half; k < std::ptrdiff_t(width) - half; ++k)
                {
                    acc += v[mirror(std::ptrdiff_t(i) + k, v.size())];
                    ++count;
                }
                out[i] = acc / double(count);
            }
            return out;
        }

        // Parabolic sub-sample offset of a peak, clamped to half a sample
        double refine(std::span<const double> p, std::size_t i)
        {
            if (i == 0 || i + 1 >= p.size())
                return 0.0;
            const double denom = p[i - 1] - 2.0 * p[i] + p[i + 1];
            if (!(denom < 0.0))
                return 0.0;
            return std::clamp(0.5 * (p[i - 1] - p[i + 1]) / denom, -0.5, 0.5);
        }
    }

    PointCloud normalize_ground(const PointCloud &cloud, const GroundOptions &opts)
    {
        cloud.validate();
        if (cloud.points.size() < opts.min_points)
            throw InputError("ground normalization needs at least " + std::to_string(opts.min_points) +
                             " points, got " + std::to_string(cloud.points.size()));
        if (!(opts.cell > 0.0) || !(opts.percentile > 0.0 && opts.percentile <= 1.0))
            throw InputError("ground cell size and percentile must be positive");

        double min_x = std::numeric_limits<double>::infinity();
        double min_y = min_x;
        for (const Point3 &p : cloud.points)
        {
            min_x = std::min(min_x, p.x);
            min_y = std::min(min_y, p.y);
        }

        std::map<std::pair<long, long>, std::vector<const Point3 *>> cells;
        for (const Point3 &p : cloud.points)
            cells[{long(std::floor((p.x - min_x) / opts.cell)), long(std::floor((p.y - min_y) / opts.cell))}]
                .push_back(&p);

        std::vector<Point3> candidates;
        for (auto &[key, pts] : cells)
        {
            std::sort(pts.begin(), pts.end(), [](const Point3 *a, const Point3 *b) { return a->z < b->z; });
            const auto k = std::max<std::size_t>(1, std::size_t(std::ceil(opts.percentile * double(pts.size()))));
            for (std::size_t i = 0; i < k; ++i)
                candidates.push_back(*pts[i]);
        }

        Plane plane = fit_plane(candidates);
        for (int pass = 0; pass < opts.refinement_passes; ++pass)
        {
            // cells closed by canopy contribute leaf points; drop candidates well above the plane
            std::vector<double> resid;
            resid.reserve(candidates.size());
            for (const Point3 &p : candidates)
                resid.push_back(p.z - plane(p.x, p.y));
            std::vector<double> dev;
            const double med = median_of(resid);
            for (double r : resid)
                dev.push_back(std::abs(r - med));
            const double limit = med + std::max(0.05, 3.0 * 1.4826 * median_of(dev));

            std::vector<Point3> kept;
            for (std::size_t i = 0; i < candidates.size(); ++i)
                if (resid[i] <= limit)
                    kept.push_back(candidates[i]);
            if (kept.size() < 3 || kept.size() == candidates.size())
                break;
            candidates = std::move(kept);
            plane = fit_plane(candidates);
        }

        PointCloud out = cloud;
        for (Point3 &p : out.points)
            p.z -= plane(p.x, p.y);
        return out;
    }

    double CanopyHeightModel::mean() const
    {
        if (z.empty())
            return 0.0;
        return std::accumulate(z.begin(), z.end(), 0.0) / double(z.size());
    }

    CanopyHeightModel rasterize_max(const PointCloud &cloud, const Tile &tile, double resolution)
    {
        if (!(tile.size > 0.0) || !(resolution > 0.0))
            throw InputError("tile size and resolution must be > 0");
        CanopyHeightModel chm;
        chm.x0 = tile.x0;
        chm.y0 = tile.y0;
        chm.resolution = resolution;
        chm.nx = std::size_t(std::llround(tile.size / resolution));
        chm.ny = chm.nx;
        const double empty = -std::numeric_limits<double>::infinity();
        chm.z.assign(chm.nx * chm.ny, empty);

        std::size_t inside = 0;
        for (const Point3 &p : cloud.points)
        {
            if (!tile.contains(p.x, p.y))
                continue;
            const auto ix = std::min(chm.nx - 1, std::size_t((p.x - tile.x0) / resolution));
            const auto iy = std::min(chm.ny - 1, std::size_t((p.y - tile.y0) / resolution));
            double &cell = chm.z[iy * chm.nx + ix];
            cell = std::max(cell, std::max(p.z, 0.0));
            ++inside;
        }
        if (inside == 0)
            throw InputError("no points inside tile at (" + std::to_string(tile.x0) + ", " + std::to_string(tile.y0) +
                             ")");

        // breadth-first fill from every populated cell: nearest in chessboard distance
        std::deque<std::size_t> queue;
        for (std::size_t i = 0; i < chm.z.size(); ++i)
            if (chm.z[i] != empty)
                queue.push_back(i);
        while (!queue.empty())
        {
            const std::size_t i = queue.front();
            queue.pop_front();
            const auto ix = std::ptrdiff_t(i % chm.nx);
            const auto iy = std::ptrdiff_t(i / chm.nx);
            for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
                for (std::ptrdiff_t dx = -1; dx <= 1; ++dx)
                {
                    const std::ptrdiff_t jx = ix + dx;
                    const std::ptrdiff_t jy = iy + dy;
                    if (jx < 0 || jy < 0 || jx >= std::ptrdiff_t(chm.nx) || jy >= std::ptrdiff_t(chm.ny))
                        continue;
                    const std::size_t j = std::size_t(jy) * chm.nx + std::size_t(jx);
                    if (chm.z[j] == empty)
                    {
                        chm.z[j] = chm.z[i];
                        queue.push_back(j);
                    }
                }
        }
        return chm;
    }

    void gaussian_smooth_serial(CanopyHeightModel &chm, double sigma_px)
    {
        const std::vector<double> w = gaussian_kernel(sigma_px);
        std::vector<double> tmp(chm.z.size());
        for (std::size_t iy = 0; iy < chm.ny; ++iy)
            for (std::size_t ix = 0; ix < chm.nx; ++ix)
                tmp[iy * chm.nx + ix] = convolve_at(chm.z.data() + iy * chm.nx, chm.nx, 1, ix, w);
        for (std::size_t iy = 0; iy < chm.ny; ++iy)
            for (std::size_t ix = 0; ix < chm.nx; ++ix)
                chm.z[iy * chm.nx + ix] = convolve_at(tmp.data() + ix, chm.ny, std::ptrdiff_t(chm.nx), iy, w);
        chm.smoothed = true;
    }

    void gaussian_smooth_parallel(CanopyHeightModel &chm, double sigma_px)
    {
        const std::vector<double> w = gaussian_kernel(sigma_px);
        std::vector<double> tmp(chm.z.size());
        const auto ny = std::ptrdiff_t(chm.ny);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t iy = 0; iy < ny; ++iy)
            for (std::size_t ix = 0; ix < chm.nx; ++ix)
                tmp[std::size_t(iy) * chm.nx + ix] =
                    convolve_at(chm.z.data() + std::size_t(iy) * chm.nx, chm.nx, 1, ix, w);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t iy = 0; iy < ny; ++iy)
            for (std::size_t ix = 0; ix < chm.nx; ++ix)
                chm.z[std::size_t(iy) * chm.nx + ix] =
                    convolve_at(tmp.data() + ix, chm.ny, std::ptrdiff_t(chm.nx), std::size_t(iy), w);
        chm.smoothed = true;
    }

    CanopyHeightModel build_chm(const PointCloud &cloud, const Tile &tile, bool smooth)
    {
        CanopyHeightModel chm = rasterize_max(cloud, tile);
        if (smooth)
            gaussian_smooth_parallel(chm);
        return chm;
    }

    double peak_prominence(std::span<const double> p, std::size_t peak)
    {
        const double h = p[peak];
        double left_min = h;
        for (std::size_t i = peak; i-- > 0;)
        {
            if (p[i] > h)
                break;
            left_min = std::min(left_min, p[i]);
        }
        double right_min = h;
        for (std::size_t i = peak + 1; i < p.size(); ++i)
        {
            if (p[i] > h)
                break;
            right_min = std::min(right_min, p[i]);
        }
        return h - std::max(left_min, right_min);
    }

    std::vector<std::size_t> find_peaks(std::span<const double> p, const PeakOptions &opts)
    {
        std::vector<std::size_t> peaks;
        const std::size_t n = p.size();
        std::size_t i = 1;
        while (i + 1 < n)
        {
            if (p[i - 1] < p[i])
            {
                std::size_t j = i;
                while (j + 1 < n && p[j + 1] == p[i])
                    ++j;
                if (j + 1 < n && p[j + 1] < p[i])
                    peaks.push_back((i + j) / 2);
                i = j + 1;
            }
            else
                ++i;
        }

        std::erase_if(peaks, [&](std::size_t k) { return peak_prominence(p, k) < opts.min_prominence; });

        if (opts.min_distance > 1 && peaks.size() > 1)
        {
            std::vector<std::size_t> order(peaks.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return p[peaks[a]] > p[peaks[b]]; });
            std::vector<bool> keep(peaks.size(), true);
            for (std::size_t o : order)
            {
                if (!keep[o])
                    continue;
                for (std::size_t k = 0; k < peaks.size(); ++k)
                {
                    if (k == o || !keep[k])
                        continue;
                    const std::size_t d = peaks[k] > peaks[o] ? peaks[k] - peaks[o] : peaks[o] - peaks[k];
                    if (d < opts.min_distance)
                        keep[k] = false;
                }
            }
            std::vector<std::size_t> kept;
            for (std::size_t k = 0; k < peaks.size(); ++k)
                if (keep[k])
                    kept.push_back(peaks[k]);
            peaks = std::move(kept);
        }
        return peaks;
    }

    double periodicity_score(std::span<const double> positions)
    {
        if (positions.size() < 3)
            return 0.0;
        std::vector<double> gaps;
        for (std::size_t i = 1; i < positions.size(); ++i)
            gaps.push_back(positions[i] - positions[i - 1]);
        const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / double(gaps.size());
        if (!(mean > 0.0))
            return 0.0;
        double var = 0.0;
        for (double g : gaps)
            var += (g - mean) * (g - mean);
        const double cv = std::sqrt(var / double(gaps.size())) / mean;
        return 1.0 / (1.0 + cv);
    }

    std::string to_string(Axis a)
    {
        return a == Axis::x ? "x" : "y";
    }

    namespace
    {
        struct AxisProfile
        {
            std::vector<double> values;
            std::vector<std::size_t> peaks;
            std::vector<double> positions;
            double score = 0.0;
        };

        AxisProfile analyse_profile(std::vector<double> values, double origin, double res, const RowOptions &opts)
        {
            AxisProfile a;
            a.values = std::move(values);
            const auto [lo, hi] = std::minmax_element(a.values.begin(), a.values.end());
            const double prom = std::max(opts.relative_prominence * (*hi - *lo), opts.min_prominence);
            a.peaks = find_peaks(a.values, {prom, 1});
            for (std::size_t k : a.peaks)
                a.positions.push_back(origin + (double(k) + 0.5 + refine(a.values, k)) * res);
            a.score = periodicity_score(a.positions);
            return a;
        }
    }

    RowSegmentation detect_rows(const CanopyHeightModel &chm, const RowOptions &opts)
    {
        if (chm.nx < 3 || chm.ny < 3)
            throw InputError("canopy height model too small for row detection");

        std::vector<double> across_x(chm.nx, 0.0); // mean over y for each x column
        std::vector<double> across_y(chm.ny, 0.0);
        for (std::size_t iy = 0; iy < chm.ny; ++iy)
            for (std::size_t ix = 0; ix < chm.nx; ++ix)
            {
                across_x[ix] += chm.at(ix, iy);
                across_y[iy] += chm.at(ix, iy);
            }
        for (double &v : across_x)
            v /= double(chm.ny);
        for (double &v : across_y)
            v /= double(chm.nx);

        const AxisProfile px = analyse_profile(across_x, chm.x0, chm.resolution, opts);
        const AxisProfile py = analyse_profile(across_y, chm.y0, chm.resolution, opts);

        // a periodic x profile means rows run along y
        const bool rows_along_y = px.score >= py.score;
        const AxisProfile &best = rows_along_y ? px : py;
        if (best.score < opts.min_score)
            throw NoPeriodicity("no row periodicity: best score " + std::to_string(best.score) + " below " +
                                std::to_string(opts.min_score));

        RowSegmentation rows;
        rows.row_direction = rows_along_y ? Axis::y : Axis::x;
        rows.score = best.score;
        rows.centerlines = best.positions;
        rows.spacing = (rows.centerlines.back() - rows.centerlines.front()) / double(rows.centerlines.size() - 1);
        const double origin = rows_along_y ? chm.x0 : chm.y0;
        for (std::size_t k = 1; k < best.peaks.size(); ++k)
        {
            const auto first = best.values.begin() + std::ptrdiff_t(best.peaks[k - 1]);
            const auto last = best.values.begin() + std::ptrdiff_t(best.peaks[k]) + 1;
            const auto m = std::size_t(std::min_element(first, last) - best.values.begin());
            rows.boundaries.push_back(origin + (double(m) + 0.5) * chm.resolution);
        }
        const double across_extent = double(rows_along_y ? chm.nx : chm.ny) * chm.resolution;
        const double along_extent = double(rows_along_y ? chm.ny : chm.nx) * chm.resolution;
        rows.cross_low = origin;
        rows.cross_high = origin + across_extent;
        rows.along_low = rows_along_y ? chm.y0 : chm.x0;
        rows.along_high = rows.along_low + along_extent;
        return rows;
    }

    std::pair<double, double> row_strip(const RowSegmentation &rows, std::size_t i)
    {
        const double c = rows.centerlines.at(i);
        const double lo = i > 0 ? rows.boundaries.at(i - 1) : c - 0.5 * rows.spacing;
        const double hi = i + 1 < rows.centerlines.size() ? rows.boundaries.at(i) : c + 0.5 * rows.spacing;
        return {std::max(lo, rows.cross_low), std::min(hi, rows.cross_high)};
    }

    namespace
    {
        void partition(std::vector<PlantPosition> &plants, std::size_t first, const RowSegmentation &rows,
                       bool along_is_y)
        {
            const auto along = [&](std::size_t k) { return along_is_y ? plants[k].y : plants[k].x; };
            for (std::size_t k = first; k < plants.size(); ++k)
            {
                plants[k].extent_low = k > first ? 0.5 * (along(k - 1) + along(k)) : rows.along_low;
                plants[k].extent_high = k + 1 < plants.size() ? 0.5 * (along(k) + along(k + 1)) : rows.along_high;
            }
        }
    }

    PlantDetection plant_density_corn(const PointCloud &cloud, const RowSegmentation &rows, const Tile &tile,
                                      const CornOptions &opts)
    {
        if (!(opts.bin > 0.0))
            throw InputError("profile bin must be > 0");
        const bool along_is_y = rows.row_direction == Axis::y;
        const auto nb = std::size_t(std::llround((rows.along_high - rows.along_low) / opts.bin));
        const double half = opts.core_fraction * rows.spacing;
        const auto min_dist = std::size_t(std::ceil(opts.min_separation / opts.bin));

        PlantDetection det;
        for (std::size_t r = 0; r < rows.centerlines.size(); ++r)
        {
            const double c = rows.centerlines[r];
            std::vector<double> profile(nb, 0.0);
            for (const Point3 &p : cloud.points)
            {
                if (!tile.contains(p.x, p.y) || p.z < opts.min_height)
                    continue;
                const double across = along_is_y ? p.x : p.y;
                const double along = along_is_y ? p.y : p.x;
                if (std::abs(across - c) > half)
                    continue;
                const auto b = std::size_t((along - rows.along_low) / opts.bin);
                if (b < nb)
                    profile[b] += p.z;
            }
            profile = smooth_1d(profile, opts.smoothing_bins);
            // reference level: upper quantile of the profile, insensitive to empty stretches
            double level = 0.0;
            if (!profile.empty())
            {
                std::vector<double> sorted = profile;
                const auto k = std::size_t(opts.reference_quantile * double(sorted.size() - 1));
                std::nth_element(sorted.begin(), sorted.begin() + std::ptrdiff_t(k), sorted.end());
                level = sorted[k];
            }

            const std::size_t first = det.plants.size();
            if (level > 0.0)
                for (std::size_t k : find_peaks(profile, {opts.relative_prominence * level, min_dist}))
                {
                    const double along = rows.along_low + (double(k) + 0.5 + refine(profile, k)) * opts.bin;
                    det.plants.push_back(along_is_y ? PlantPosition{c, along, r} : PlantPosition{along, c, r});
                }
            partition(det.plants, first, rows, along_is_y);
            det.per_row.push_back(det.plants.size() - first);
        }
        det.density = double(det.plants.size()) / tile.area();
        return det;
    }

    PlantDetection plant_density_soybean(const CanopyHeightModel &chm, const RowSegmentation &rows, const Tile &tile,
                                         const SoybeanOptions &opts)
    {
        const bool along_is_y = rows.row_direction == Axis::y;
        const std::size_t n_along = along_is_y ? chm.ny : chm.nx;
        const std::size_t n_across = along_is_y ? chm.nx : chm.ny;
        const double across_origin = along_is_y ? chm.x0 : chm.y0;
        const auto kernel = std::max<std::size_t>(1, std::size_t(std::llround(opts.kernel_length / chm.resolution)));
        const auto min_dist = std::size_t(std::ceil(opts.min_separation / chm.resolution));

        PlantDetection det;
        for (std::size_t r = 0; r < rows.centerlines.size(); ++r)
        {
            const auto [lo, hi] = row_strip(rows, r);
            std::vector<double> profile(n_along, 0.0);
            std::size_t width = 0;
            for (std::size_t a = 0; a < n_across; ++a)
            {
                const double pos = across_origin + (double(a) + 0.5) * chm.resolution;
                if (pos < lo || pos >= hi)
                    continue;
                ++width;
                for (std::size_t l = 0; l < n_along; ++l)
                    profile[l] += along_is_y ? chm.at(a, l) : chm.at(l, a);
            }
            const std::size_t first = det.plants.size();
            if (width > 0)
            {
                for (double &v : profile)
                    v /= double(width);
                profile = box_1d(profile, kernel);
                const double c = rows.centerlines[r];
                for (std::size_t k : find_peaks(profile, {opts.min_prominence, min_dist}))
                {
                    const double along = rows.along_low + (double(k) + 0.5 + refine(profile, k)) * chm.resolution;
                    det.plants.push_back(along_is_y ? PlantPosition{c, along, r} : PlantPosition{along, c, r});
                }
            }
            partition(det.plants, first, rows, along_is_y);
            det.per_row.push_back(det.plants.size() - first);
        }
        det.density = double(det.plants.size()) / tile.area();
        return det;
    }

    double canopy_height(const CanopyHeightModel &chm, double vegetated_fraction)
    {
        if (chm.z.empty())
            return 0.0;
        std::vector<double> v = chm.z;
        const auto k = std::size_t(std::floor(0.95 * double(v.size() - 1)));
        std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(k), v.end());
        const double p95 = v[k];
        if (!(p95 > 0.0))
            return 0.0;
        const double threshold = vegetated_fraction * p95;
        double sum = 0.0;
        std::size_t n = 0;
        for (double z : chm.z)
            if (z > threshold)
            {
                sum += z;
                ++n;
            }
        return n ? sum / double(n) : 0.0;
    }

    double lai_from_gap_profile(std::span<const double> gap, double layer_thickness, double projection, LaiForm form)
    {
        if (!(projection > 0.0))
            throw InputError("leaf projection coefficient must be > 0");
        if (form == LaiForm::printed && !(layer_thickness > 0.0))
            throw InputError("layer thickness must be > 0");
        double sum = 0.0;
        for (std::size_t k = 0; k + 1 < gap.size(); ++k)
        {
            if (!(gap[k] > 0.0) || !(gap[k + 1] > 0.0))
                throw ValidityError("gap probability reached zero; canopy too dense for the return count");
            const double d = std::log(gap[k + 1]) - std::log(gap[k]);
            sum += form == LaiForm::printed ? d / layer_thickness : d;
        }
        return -sum / projection;
    }

    LaiEstimate estimate_lai(const PointCloud &cloud, const Tile &tile, const LaiOptions &opts)
    {
        if (opts.layers == 0)
            throw InputError("LAI needs at least one layer");
        if (!(opts.column_size >= 0.0))
            throw InputError("LAI column size must be >= 0");
        std::vector<double> z;
        for (const Point3 &p : cloud.points)
            if (tile.contains(p.x, p.y))
                z.push_back(p.z);
        if (z.empty())
            throw ValidityError("no returns inside the tile");

        LaiEstimate est;
        const double top = *std::max_element(z.begin(), z.end());
        if (top <= opts.ground_threshold)
        {
            // every return is a ground hit: the canopy is fully gapped
            est.boundaries = {opts.ground_threshold};
            est.gap_probability = {1.0};
            return est;
        }
        est.layer_thickness = (top - opts.ground_threshold) / double(opts.layers);
        for (std::size_t k = 0; k <= opts.layers; ++k)
            est.boundaries.push_back(k == opts.layers ? opts.ground_threshold
                                                       : top - double(k) * est.layer_thickness);

        // fraction of returns below each boundary, floored at 1 / (n + 1) when asked
        const auto profile = [&](std::vector<double> &zs, bool floor) {
            std::sort(zs.begin(), zs.end());
            const double n = double(zs.size());
            std::vector<double> gap;
            for (std::size_t k = 0; k < est.boundaries.size(); ++k)
            {
                const double below = double(std::lower_bound(zs.begin(), zs.end(), est.boundaries[k]) - zs.begin());
                const double p = k == 0 ? 1.0 : below / n;
                gap.push_back(floor ? std::max(p, 1.0 / (n + 1.0)) : p);
            }
            return gap;
        };
        est.gap_probability = profile(z, false);

        if (opts.column_size == 0.0)
        {
            est.lai = lai_from_gap_profile(est.gap_probability, est.layer_thickness, opts.projection, opts.form);
            est.columns = 1;
            return est;
        }

        const auto nc = std::max<std::size_t>(1, std::size_t(std::llround(tile.size / opts.column_size)));
        const double cell = tile.size / double(nc);
        std::vector<std::vector<double>> columns(nc * nc);
        for (const Point3 &p : cloud.points)
        {
            if (!tile.contains(p.x, p.y))
                continue;
            const auto ix = std::min(nc - 1, std::size_t((p.x - tile.x0) / cell));
            const auto iy = std::min(nc - 1, std::size_t((p.y - tile.y0) / cell));
            columns[iy * nc + ix].push_back(p.z);
        }
        double sum = 0.0;
        for (auto &col : columns)
        {
            if (col.size() < std::max<std::size_t>(opts.min_column_returns, 1))
                continue;
            sum += lai_from_gap_profile(profile(col, true), est.layer_thickness, opts.projection, opts.form);
            ++est.columns;
        }
        if (est.columns == 0)
            throw ValidityError("no LAI column holds enough returns");
        est.lai = sum / double(est.columns);
        return est;
    }

    LeafDensity leaf_density(double lai, double leaf_area, double canopy_height)
    {
        if (!(leaf_area > 0.0))
            throw InputError("single-leaf area must be > 0");
        if (!(lai >= 0.0))
            throw InputError("LAI must be >= 0");
        LeafDensity d;
        d.per_area = lai / leaf_area;
        if (d.per_area > 0.0)
        {
            if (!(canopy_height > 0.0))
                throw InputError("canopy height must be > 0 for a volumetric leaf density");
            d.per_volume = d.per_area / canopy_height;
        }
        return d;
    }

    CanopyStructureEstimate extract_structure(const PointCloud &cloud, const Tile &tile, const Allometry &allometry,
                                              const LidarOptions &opts)
    {
        const PointCloud norm = opts.normalize ? normalize_ground(cloud, opts.ground) : cloud;
        const CanopyHeightModel chm = build_chm(norm, tile);

        CanopyStructureEstimate est;
        est.crop_kind = allometry.crop_kind;
        est.rows = detect_rows(chm, opts.rows);
        const PlantDetection plants = allometry.crop_kind == CropKind::corn
                                          ? plant_density_corn(norm, est.rows, tile, opts.corn)
                                          : plant_density_soybean(chm, est.rows, tile, opts.soybean);
        est.plant_density = plants.density;
        est.plants_per_row = plants.per_row;
        // height from the unsmoothed raster: smoothing blends ground hits seen through small gaps
        est.mean_height = canopy_height(rasterize_max(norm, tile));
        est.lai = estimate_lai(norm, tile, opts.lai).lai;
        est.leaf_area = allometry.leaf_area;
        const LeafDensity d = leaf_density(est.lai, allometry.leaf_area, est.mean_height);
        est.leaf_density_area = d.per_area;
        est.leaf_density_volume = d.per_volume;
        return est;
    }

    CanopyDescriptor to_descriptor(const CanopyStructureEstimate &est, const Allometry &allometry,
                                   const ComplexPermittivity &eps)
    {
        if (!(allometry.leaf_width > 0.0))
            throw InputError("allometry needs a leaf width");
        CanopyDescriptor d;
        d.crop_kind = est.crop_kind;
        d.height = est.mean_height;
        d.leaf_density = est.leaf_density_volume;
        d.leaf_geometry = DiskGeometry{0.5 * allometry.leaf_width, allometry.leaf_thickness, eps};
        d.leaf_orientation = OrientationDistribution::uniform();
        if (est.crop_kind == CropKind::corn)
        {
            if (!(allometry.stalk_radius > 0.0))
                throw InputError("corn allometry needs a stalk radius");
            d.corn_leaf_length = std::max(allometry.leaf_area / allometry.leaf_width, allometry.leaf_width);
            d.stalk_geometry = CylinderGeometry{allometry.stalk_radius, std::max(est.mean_height, 1e-3), eps};
            d.stalk_density = est.mean_height > 0.0 ? est.plant_density / est.mean_height : 0.0;
        }
        d.validate();
        return d;
    }
}
