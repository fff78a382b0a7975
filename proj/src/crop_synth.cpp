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

#include "nadirsm/crop_synth.hpp"
#include "nadirsm/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace nadirsm
{
    namespace
    {
        struct Disk
        {
            double cx, cy, cz;
            double nx, ny, nz;
            double r;
        };

        struct Stalk
        {
            double cx, cy, base, top, r;
        };

        // Uniform hash grid over the generation area
        class SpatialIndex
        {
        public:
            SpatialIndex(double x0, double y0, double extent, double cell)
                : x0_(x0), y0_(y0), cell_(cell), n_(std::size_t(std::ceil(extent / cell)))
            {
                bins_.resize(n_ * n_);
            }

            void insert(std::size_t id, double cx, double cy, double radius)
            {
                const auto [ix0, iy0] = index(cx - radius, cy - radius);
                const auto [ix1, iy1] = index(cx + radius, cy + radius);
                for (std::size_t iy = iy0; iy <= iy1; ++iy)
                    for (std::size_t ix = ix0; ix <= ix1; ++ix)
                        bins_[iy * n_ + ix].push_back(id);
            }

            const std::vector<std::size_t> &at(double x, double y) const
            {
                const auto [ix, iy] = index(x, y);
                return bins_[iy * n_ + ix];
            }

            // Every bin crossed by the segment (x0, y0) -> (x1, y1), grid traversal
            template <class F>
            void visit_segment(double x0, double y0, double x1, double y1, F &&f) const
            {
                auto [ix, iy] = index(x0, y0);
                const auto [ex, ey] = index(x1, y1);
                const double dx = x1 - x0;
                const double dy = y1 - y0;
                const int sx = dx > 0 ? 1 : -1;
                const int sy = dy > 0 ? 1 : -1;
                const auto boundary_t = [&](double origin, double d, std::size_t i, int step, double o) {
                    if (std::abs(d) < 1e-15)
                        return std::numeric_limits<double>::infinity();
                    const double edge = o + (double(i) + (step > 0 ? 1.0 : 0.0)) * cell_;
                    return (edge - origin) / d;
                };
                double tx = boundary_t(x0, dx, ix, sx, x0_);
                double ty = boundary_t(y0, dy, iy, sy, y0_);
                const double step_x = std::abs(dx) < 1e-15 ? 0.0 : cell_ / std::abs(dx);
                const double step_y = std::abs(dy) < 1e-15 ? 0.0 : cell_ / std::abs(dy);
                for (;;)
                {
                    for (std::size_t id : bins_[iy * n_ + ix])
                        f(id);
                    if (ix == ex && iy == ey)
                        break;
                    if (tx <= ty)
                    {
                        if (tx > 1.0 || (sx < 0 && ix == 0) || (sx > 0 && ix + 1 >= n_))
                            break;
                        ix = std::size_t(std::ptrdiff_t(ix) + sx);
                        tx += step_x;
                    }
                    else
                    {
                        if (ty > 1.0 || (sy < 0 && iy == 0) || (sy > 0 && iy + 1 >= n_))
                            break;
                        iy = std::size_t(std::ptrdiff_t(iy) + sy);
                        ty += step_y;
                    }
                }
            }

        private:
            std::pair<std::size_t, std::size_t> index(double x, double y) const
            {
                const auto clampi = [&](double v) {
                    const double i = std::floor(v / cell_);
                    return std::size_t(std::clamp(i, 0.0, double(n_ - 1)));
                };
                return {clampi(x - x0_), clampi(y - y0_)};
            }

            double x0_, y0_, cell_;
            std::size_t n_;
            std::vector<std::vector<std::size_t>> bins_;
        };

        struct Scene
        {
            std::vector<Disk> disks;
            std::vector<Stalk> stalks;
            SpatialIndex disk_index;
            SpatialIndex stalk_index;
            double gz, sx, sy;
            double top = 0.0; // highest geometry [m]

            double ground(double x, double y) const { return gz + sx * x + sy * y; }

            // First surface met by a ray coming down from the sensor. The ray is
            // (gx, gy, gz) + t (a, b, 1), t >= 0, where (gx, gy, gz) is its ground point.
            // Returns the hit, or nullopt when the ray reaches the ground.
            std::optional<Point3> cast(double gx, double gy, double a, double b) const
            {
                const double gz = ground(gx, gy);
                std::optional<double> best;
                const auto keep = [&](double t) {
                    if (t >= 0.0 && (!best || t > *best))
                        best = t;
                };
                const auto visit = [&](double t_top, auto &&fn, const SpatialIndex &index) {
                    if (a == 0.0 && b == 0.0)
                    {
                        for (std::size_t id : index.at(gx, gy))
                            fn(id);
                        return;
                    }
                    index.visit_segment(gx, gy, gx + t_top * a, gy + t_top * b, fn);
                };
                const double t_top = std::max(0.0, top - gz);

                visit(t_top, [&](std::size_t id) {
                    const Disk &d = disks[id];
                    const double nu = d.nx * a + d.ny * b + d.nz;
                    if (std::abs(nu) < 1e-12)
                        return;
                    const double t = (d.nx * (d.cx - gx) + d.ny * (d.cy - gy) + d.nz * (d.cz - gz)) / nu;
                    const double dx = gx + t * a - d.cx;
                    const double dy = gy + t * b - d.cy;
                    const double dz = gz + t - d.cz;
                    if (dx * dx + dy * dy + dz * dz <= d.r * d.r)
                        keep(t);
                }, disk_index);

                visit(t_top, [&](std::size_t id) {
                    const Stalk &s = stalks[id];
                    const double ox = gx - s.cx;
                    const double oy = gy - s.cy;
                    const double t_cap = s.top - gz;
                    const double cx = ox + t_cap * a;
                    const double cy = oy + t_cap * b;
                    if (cx * cx + cy * cy <= s.r * s.r)
                    {
                        keep(t_cap);
                        return;
                    }
                    // side wall: |o + t (a, b)|^2 = r^2, entering root
                    const double qa = a * a + b * b;
                    if (qa < 1e-18)
                        return;
                    const double qb = ox * a + oy * b;
                    const double qc = ox * ox + oy * oy - s.r * s.r;
                    const double disc = qb * qb - qa * qc;
                    if (disc < 0.0)
                        return;
                    const double t = (-qb + std::sqrt(disc)) / qa;
                    if (t <= t_cap && gz + t >= s.base)
                        keep(t);
                }, stalk_index);

                if (!best)
                    return std::nullopt;
                return Point3{gx + *best * a, gy + *best * b, gz + *best};
            }
        };

        // Uniform direction on the unit sphere, folded to the upper hemisphere
        std::array<double, 3> random_normal(std::mt19937_64 &rng)
        {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const double cos_t = u(rng);
            const double phi = 2.0 * pi * u(rng);
            const double sin_t = std::sqrt(1.0 - cos_t * cos_t);
            return {sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t};
        }
    }

    Allometry synthetic_allometry(const CropFieldSpec &spec)
    {
        Allometry a;
        a.crop_kind = spec.crop_kind;
        if (spec.crop_kind == CropKind::corn)
        {
            const double disk = pi * 0.25 * spec.leaf_width * spec.leaf_width;
            a.leaf_area = double(corn_leaf_segments(spec.leaf_length, spec.leaf_width)) * disk;
            a.leaf_width = spec.leaf_width;
            a.stalk_radius = spec.stalk_radius;
        }
        else
        {
            a.leaf_area = pi * spec.leaf_radius * spec.leaf_radius;
            a.leaf_width = 2.0 * spec.leaf_radius;
        }
        return a;
    }

    SyntheticCrop generate_crop_tile(const CropFieldSpec &spec)
    {
        if (!(spec.row_spacing > 0.0) || !(spec.plant_spacing > 0.0) || !(spec.plant_height > 0.0))
            throw InputError("crop spacings and height must be > 0");
        if (!(spec.pulse_density > 0.0) || !(spec.tile.size > 0.0))
            throw InputError("pulse density and tile size must be > 0");

        std::mt19937_64 rng(spec.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);

        const Tile &tile = spec.tile;
        const double lo = -spec.margin;
        const double extent = tile.size + 2.0 * spec.margin;
        const bool along_y = spec.row_direction == Axis::y;
        // local frame: u along the rows, v across, both relative to the tile corner
        const auto to_xy = [&](double u, double v) {
            return along_y ? std::pair{tile.x0 + v, tile.y0 + u} : std::pair{tile.x0 + u, tile.y0 + v};
        };

        Scene scene{{}, {}, SpatialIndex(tile.x0 + lo, tile.y0 + lo, extent, 0.1),
                    SpatialIndex(tile.x0 + lo, tile.y0 + lo, extent, 0.1), spec.ground_z, spec.slope_x, spec.slope_y};

        CropTruth truth;
        truth.row_spacing = spec.row_spacing;
        truth.plant_height = spec.plant_height;
        truth.leaf_area = synthetic_allometry(spec).leaf_area;
        double leaf_area_in_tile = 0.0;

        const double row_phase = unit(rng) * spec.row_spacing;
        for (double v = lo + row_phase; v < lo + extent; v += spec.row_spacing)
        {
            const double plant_phase = unit(rng) * spec.plant_spacing;
            for (double u0 = lo + plant_phase; u0 < lo + extent; u0 += spec.plant_spacing)
            {
                const double u = u0 + spec.position_jitter * gauss(rng);
                const auto [px, py] = to_xy(u, v);
                const double base = scene.ground(px, py);
                const double h = spec.plant_height * std::max(0.5, 1.0 + spec.height_jitter * gauss(rng));
                if (tile.contains(px, py))
                {
                    ++truth.plants;
                    truth.stems.push_back({px, py, h});
                }

                const auto add_disk = [&](double du, double dv, double z, double r) {
                    const auto [x, y] = to_xy(u + du, v + dv);
                    const auto n = random_normal(rng);
                    scene.disks.push_back({x, y, base + z, n[0], n[1], n[2], r});
                    scene.top = std::max(scene.top, base + z + r);
                    scene.disk_index.insert(scene.disks.size() - 1, x, y, r);
                    if (tile.contains(x, y))
                        leaf_area_in_tile += pi * r * r;
                };

                if (spec.crop_kind == CropKind::corn)
                {
                    scene.stalks.push_back({px, py, base, base + h, spec.stalk_radius});
                    scene.top = std::max(scene.top, base + h);
                    scene.stalk_index.insert(scene.stalks.size() - 1, px, py, spec.stalk_radius);
                    const std::size_t segments = corn_leaf_segments(spec.leaf_length, spec.leaf_width);
                    for (std::size_t j = 0; j < spec.leaves_per_plant; ++j)
                    {
                        const double attach = h * (0.3 + 0.6 * (double(j) + unit(rng)) / double(spec.leaves_per_plant));
                        const double side = j % 2 == 0 ? 1.0 : -1.0;
                        const double az = (2.0 * unit(rng) - 1.0) * spec.leaf_azimuth_spread;
                        // upper blades leave the stalk steeply and arch close to it, lower ones
                        // are flatter and reach further out: z = attach + m d - c d^2
                        const double q = std::clamp((attach / h - 0.3) / 0.6, 0.0, 1.0);
                        const double m = 0.5 + 2.5 * q;
                        const double apex = 0.35 - 0.25 * q;
                        const double c = m / (2.0 * apex);
                        const double step = 0.9 * spec.leaf_width;
                        double d = 0.0;
                        for (std::size_t seg = 0; seg < segments; ++seg)
                        {
                            // advance by one disk spacing along the blade
                            const double slope = m - 2.0 * c * d;
                            d += (seg == 0 ? 0.5 : 1.0) * step / std::sqrt(1.0 + slope * slope);
                            const double z = attach + m * d - c * d * d;
                            add_disk(d * std::sin(az), side * d * std::cos(az), std::max(z, 0.05),
                                     0.5 * spec.leaf_width);
                        }
                    }
                    // tassel and whorl: a loose cone of small disks around the stalk top
                    for (std::size_t j = 0; j < spec.tassel_disks; ++j)
                    {
                        const double frac = unit(rng);
                        const double rho = spec.tassel_radius * (1.0 - frac) * std::sqrt(unit(rng));
                        const double phi = 2.0 * pi * unit(rng);
                        add_disk(rho * std::cos(phi), rho * std::sin(phi), h * (0.9 + 0.15 * frac),
                                 spec.tassel_disk_radius);
                    }
                }
                else
                {
                    for (std::size_t j = 0; j < spec.disks_per_plant; ++j)
                    {
                        const double rho = spec.mound_radius * std::sqrt(unit(rng));
                        const double phi = 2.0 * pi * unit(rng);
                        const double q = rho / spec.mound_radius;
                        const double depth = -0.15 * h * std::log(1.0 - 0.999 * unit(rng));
                        const double z = std::max(0.1, h * (1.0 - 0.45 * q * q) - depth);
                        add_disk(rho * std::cos(phi), rho * std::sin(phi), z, spec.leaf_radius);
                    }
                }
            }
        }
        truth.plant_density = double(truth.plants) / tile.area();
        truth.lai = leaf_area_in_tile / tile.area();

        // pulses: draw every random number first so the parallel cast stays deterministic.
        // Oblique rays start from a ground point in a widened square so that returns near the
        // tile edge are sampled as densely as those in the middle; hits outside the tile drop.
        struct Pulse
        {
            double gx, gy, a, b, noise;
        };
        const double oblique = std::clamp(spec.oblique_fraction, 0.0, 1.0);
        const double reach = (scene.top - std::min(scene.ground(tile.x0, tile.y0),
                                                  scene.ground(tile.x0 + tile.size, tile.y0 + tile.size))) *
                             std::tan(spec.max_scan_angle);
        const double wide = tile.size + 2.0 * std::max(0.0, reach);
        const auto n_nadir = std::size_t(std::llround((1.0 - oblique) * spec.pulse_density * tile.area()));
        const auto n_oblique = std::size_t(std::llround(oblique * spec.pulse_density * wide * wide));
        std::vector<Pulse> pulses(n_nadir + n_oblique);
        for (std::size_t i = 0; i < pulses.size(); ++i)
        {
            Pulse &q = pulses[i];
            if (i < n_nadir)
            {
                q.gx = tile.x0 + unit(rng) * tile.size;
                q.gy = tile.y0 + unit(rng) * tile.size;
                q.a = q.b = 0.0;
            }
            else
            {
                q.gx = tile.x0 - 0.5 * (wide - tile.size) + unit(rng) * wide;
                q.gy = tile.y0 - 0.5 * (wide - tile.size) + unit(rng) * wide;
                const double zenith = unit(rng) * spec.max_scan_angle;
                const double azimuth = 2.0 * pi * unit(rng);
                q.a = std::tan(zenith) * std::cos(azimuth);
                q.b = std::tan(zenith) * std::sin(azimuth);
            }
            q.noise = gauss(rng);
        }
        std::vector<Point3> returns(pulses.size());
        std::vector<char> inside(pulses.size(), 0);
        const auto n = std::ptrdiff_t(pulses.size());
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i)
        {
            const Pulse &q = pulses[std::size_t(i)];
            const auto hit = scene.cast(q.gx, q.gy, q.a, q.b);
            Point3 p = hit ? *hit : Point3{q.gx, q.gy, scene.ground(q.gx, q.gy)};
            p.z += (hit ? spec.canopy_noise : spec.ground_noise) * q.noise;
            returns[std::size_t(i)] = p;
            inside[std::size_t(i)] = tile.contains(p.x, p.y) ? 1 : 0;
        }
        std::vector<Point3> pts;
        pts.reserve(pulses.size());
        for (std::size_t i = 0; i < returns.size(); ++i)
            if (inside[i])
                pts.push_back(returns[i]);

        // mean height truth from the exact surface on a 1 cm lattice
        const double step = 0.01;
        const auto m = std::size_t(std::llround(tile.size / step));
        std::vector<double> surface(m * m, 0.0);
        const auto mm = std::ptrdiff_t(m);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t iy = 0; iy < mm; ++iy)
            for (std::size_t ix = 0; ix < m; ++ix)
            {
                const double x = tile.x0 + (double(ix) + 0.5) * step;
                const double y = tile.y0 + (double(iy) + 0.5) * step;
                const auto hit = scene.cast(x, y, 0.0, 0.0);
                surface[std::size_t(iy) * m + ix] = hit ? std::max(0.0, hit->z - scene.ground(x, y)) : 0.0;
            }
        std::vector<double> sorted = surface;
        const auto k95 = std::size_t(std::floor(0.95 * double(sorted.size() - 1)));
        std::nth_element(sorted.begin(), sorted.begin() + std::ptrdiff_t(k95), sorted.end());
        const double threshold = 0.25 * sorted[k95];
        double sum = 0.0;
        std::size_t count = 0;
        for (double z : surface)
            if (z > threshold)
            {
                sum += z;
                ++count;
            }
        truth.mean_height = count ? sum / double(count) : 0.0;

        SyntheticCrop out;
        out.cloud.points = std::move(pts);
        out.cloud.tile_id = "synthetic";
        out.truth = truth;
        return out;
    }
}
