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

#include "nadirsm/canopy_rt.hpp"
#include "nadirsm/error.hpp"

#include <cmath>

namespace nadirsm
{
    namespace
    {
        constexpr double two_pi = 2.0 * pi;
        constexpr double half_pi = 0.5 * pi;

        // Projection of the incident polarization (horizontal, perpendicular to the plane of
        // incidence) onto a unit axis given by (psi, delta). Independent of theta_i.
        double polarization_projection(Orientation o)
        {
            return std::sin(o.delta) * std::sin(o.psi);
        }

        // k^3 V (eps - 1) / (4 pi), the Rayleigh-Gans prefactor of the dimensionless amplitude
        std::complex<double> volume_prefactor(double k, double volume, const ComplexPermittivity &eps)
        {
            return (k * k * k * volume / (4.0 * pi)) * (eps.value() - 1.0);
        }
    }

    void CylinderGeometry::validate() const
    {
        if (!(radius > 0.0))
            throw InputError("cylinder radius must be > 0");
        if (!(length > 0.0))
            throw InputError("cylinder length must be > 0");
    }

    void DiskGeometry::validate() const
    {
        if (!(radius > 0.0))
            throw InputError("disk radius must be > 0");
        if (!(thickness > 0.0))
            throw InputError("disk thickness must be > 0");
        if (thickness / radius > 0.2)
            throw InputError("disk thickness / radius must be <= 0.2");
    }

    OrientationDistribution OrientationDistribution::uniform()
    {
        return {};
    }

    OrientationDistribution OrientationDistribution::vertical()
    {
        OrientationDistribution d;
        d.kind_ = Kind::vertical;
        return d;
    }

    OrientationDistribution OrientationDistribution::tabulated(std::size_t n_psi, std::size_t n_delta,
                                                               std::vector<double> density)
    {
        if (n_psi == 0 || n_delta == 0 || density.size() != n_psi * n_delta)
            throw InputError("orientation table size does not match n_psi * n_delta");
        for (double v : density)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw InputError("orientation density must be finite and non-negative");

        OrientationDistribution d;
        d.kind_ = Kind::tabulated;
        d.n_psi_ = n_psi;
        d.n_delta_ = n_delta;
        d.table_ = std::move(density);

        const double total = orientation_average_im([](Orientation) { return std::complex<double>(0.0, 1.0); }, d);
        if (std::abs(total - 1.0) > 1e-3)
            throw InputError("orientation density integrates to " + std::to_string(total) + ", expected 1");
        return d;
    }

    double OrientationDistribution::density(double psi, double delta) const
    {
        switch (kind_)
        {
        case Kind::uniform:
            return 1.0 / (two_pi * half_pi);
        case Kind::vertical:
            return 0.0; // singular; callers special-case the delta distribution
        case Kind::tabulated:
        {
            double p = std::fmod(psi, two_pi);
            if (p < 0.0)
                p += two_pi;
            auto i = std::size_t(p / two_pi * double(n_psi_));
            auto j = std::size_t(delta / half_pi * double(n_delta_));
            i = std::min(i, n_psi_ - 1);
            j = std::min(j, n_delta_ - 1);
            return table_[i * n_delta_ + j];
        }
        }
        return 0.0;
    }

    std::string to_string(CropKind kind)
    {
        return kind == CropKind::corn ? "corn" : "soybean";
    }

    CropKind crop_kind_from_string(const std::string &s)
    {
        if (s == "corn")
            return CropKind::corn;
        if (s == "soybean")
            return CropKind::soybean;
        throw InputError("unknown crop kind '" + s + "' (expected corn or soybean)");
    }

    void CanopyDescriptor::validate() const
    {
        if (!(height >= 0.0))
            throw InputError("canopy height must be >= 0");
        if (!(stalk_density >= 0.0) || !(leaf_density >= 0.0))
            throw InputError("scatterer densities must be >= 0");
        if (crop_kind == CropKind::corn && !stalk_geometry)
            throw InputError("corn canopy requires a stalk geometry");
        if (stalk_geometry)
            stalk_geometry->validate();
        if (leaf_density > 0.0)
        {
            leaf_geometry.validate();
            if (crop_kind == CropKind::corn && corn_leaf_length < 2.0 * leaf_geometry.radius)
                throw InputError("corn leaf length must be >= leaf width");
        }
    }

    CanopyDescriptor CanopyDescriptor::with_permittivity(const ComplexPermittivity &eps) const
    {
        CanopyDescriptor out = *this;
        out.leaf_geometry.permittivity = eps;
        if (out.stalk_geometry)
            out.stalk_geometry->permittivity = eps;
        return out;
    }

    std::complex<double> cylinder_forward_amplitude(const CylinderGeometry &geom, double f_hz, double theta_i,
                                                    Orientation axis)
    {
        (void)theta_i; // the forward length factor is 1 for every incidence angle
        geom.validate();
        const double k = wavenumber(f_hz);
        if (k * geom.radius > 2.0)
            throw ApproximationOutOfRange("cylinder electrical size k r = " + std::to_string(k * geom.radius) +
                                          " exceeds 2");
        const std::complex<double> eps = geom.permittivity.value();
        const double volume = pi * geom.radius * geom.radius * geom.length;
        const double pa = polarization_projection(axis);
        const std::complex<double> transverse = 2.0 / (eps + 1.0);
        return volume_prefactor(k, volume, geom.permittivity) * (pa * pa + (1.0 - pa * pa) * transverse);
    }

    std::complex<double> disk_forward_amplitude(const DiskGeometry &geom, double f_hz, double theta_i,
                                                Orientation normal)
    {
        (void)theta_i;
        geom.validate();
        const double k = wavenumber(f_hz);
        const double electrical = k * geom.thickness * std::abs(geom.permittivity.refractive_index());
        if (electrical >= 1.0)
            throw ApproximationOutOfRange("disk electrical thickness " + std::to_string(electrical) +
                                          " violates the thin-disk limit");
        const std::complex<double> eps = geom.permittivity.value();
        const double volume = pi * geom.radius * geom.radius * geom.thickness;
        const double pn = polarization_projection(normal);
        return volume_prefactor(k, volume, geom.permittivity) * ((1.0 - pn * pn) + pn * pn / eps);
    }

    std::size_t corn_leaf_segments(double leaf_length, double leaf_width)
    {
        if (!(leaf_width > 0.0) || leaf_length < leaf_width)
            throw InputError("corn leaf needs 0 < width <= length");
        // small slack so exact multiples are not pushed up by rounding
        return std::size_t(std::ceil(leaf_length / leaf_width - 1e-9));
    }

    std::complex<double> corn_leaf_amplitude(double leaf_length, double leaf_width, double thickness,
                                             const ComplexPermittivity &eps, double f_hz, double theta_i,
                                             Orientation normal)
    {
        const std::size_t n = corn_leaf_segments(leaf_length, leaf_width);
        const DiskGeometry disk{0.5 * leaf_width, thickness, eps};
        return double(n) * disk_forward_amplitude(disk, f_hz, theta_i, normal);
    }

    double orientation_average_im(const std::function<std::complex<double>(Orientation)> &amplitude,
                                  const OrientationDistribution &dist, std::size_t n)
    {
        if (dist.kind() == OrientationDistribution::Kind::vertical)
            return amplitude(Orientation{0.0, 0.0}).imag();
        if (n == 0)
            throw InputError("quadrature needs at least one node");

        const double d_psi = two_pi / double(n);
        const double d_delta = half_pi / double(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double psi = (double(i) + 0.5) * d_psi;
            for (std::size_t j = 0; j < n; ++j)
            {
                const double delta = (double(j) + 0.5) * d_delta;
                sum += amplitude(Orientation{psi, delta}).imag() * dist.density(psi, delta);
            }
        }
        return sum * d_psi * d_delta;
    }

    double extinction_coefficient(const CanopyDescriptor &canopy, double f_hz, double theta_i)
    {
        canopy.validate();
        const double k = wavenumber(f_hz);
        double acc = 0.0;

        if (canopy.stalk_density > 0.0 && canopy.stalk_geometry)
        {
            // stalks stand vertically
            acc += canopy.stalk_density *
                   cylinder_forward_amplitude(*canopy.stalk_geometry, f_hz, theta_i, Orientation{}).imag();
        }

        if (canopy.leaf_density > 0.0)
        {
            const DiskGeometry &leaf = canopy.leaf_geometry;
            std::function<std::complex<double>(Orientation)> amp;
            if (canopy.crop_kind == CropKind::corn)
                amp = [&](Orientation o) {
                    return corn_leaf_amplitude(canopy.corn_leaf_length, 2.0 * leaf.radius, leaf.thickness,
                                               leaf.permittivity, f_hz, theta_i, o);
                };
            else
                amp = [&](Orientation o) { return disk_forward_amplitude(leaf, f_hz, theta_i, o); };
            acc += canopy.leaf_density * orientation_average_im(amp, canopy.leaf_orientation);
        }

        return 4.0 * pi / (k * k) * acc;
    }

    ExtinctionModel::ExtinctionModel(CanopyDescriptor structure, double theta_i)
        : structure_(std::move(structure)), theta_i_(theta_i)
    {
        structure_.validate();
        if (structure_.leaf_density > 0.0)
        {
            leaf_moment_ = orientation_average_im(
                [](Orientation o) {
                    const double p = polarization_projection(o);
                    return std::complex<double>(0.0, p * p);
                },
                structure_.leaf_orientation);
        }
    }

    double ExtinctionModel::kappa(const ComplexPermittivity &eps, double f_hz) const
    {
        const double k = wavenumber(f_hz);
        double acc = 0.0;

        if (structure_.stalk_density > 0.0 && structure_.stalk_geometry)
        {
            CylinderGeometry stalk = *structure_.stalk_geometry;
            stalk.permittivity = eps;
            acc += structure_.stalk_density * cylinder_forward_amplitude(stalk, f_hz, theta_i_, Orientation{}).imag();
        }

        if (structure_.leaf_density > 0.0)
        {
            DiskGeometry leaf = structure_.leaf_geometry;
            leaf.permittivity = eps;
            // q = 0 for a horizontal leaf, q = 1 for a leaf whose normal lies along the polarization
            const Orientation face{0.0, 0.0};
            const Orientation edge{0.5 * pi, 0.5 * pi};
            const auto amp = [&](Orientation o) {
                if (structure_.crop_kind == CropKind::corn)
                    return corn_leaf_amplitude(structure_.corn_leaf_length, 2.0 * leaf.radius, leaf.thickness,
                                               eps, f_hz, theta_i_, o);
                return disk_forward_amplitude(leaf, f_hz, theta_i_, o);
            };
            const double m = leaf_moment_;
            acc += structure_.leaf_density * ((1.0 - m) * amp(face).imag() + m * amp(edge).imag());
        }

        return 4.0 * pi / (k * k) * acc;
    }

    double transmissivity_from_extinction(double kappa_e, double height, double theta_i)
    {
        if (!(theta_i >= 0.0) || theta_i >= deg2rad(80.0))
            throw InputError("incidence angle must lie in [0, 80) degrees");
        return std::exp(-kappa_e * height / std::cos(theta_i));
    }

    double transmissivity(const CanopyDescriptor &canopy, double f_hz, double theta_i)
    {
        if (!(theta_i >= 0.0) || theta_i >= deg2rad(80.0))
            throw InputError("incidence angle must lie in [0, 80) degrees");
        if (canopy.empty() || canopy.height == 0.0)
            return 1.0;
        return transmissivity_from_extinction(extinction_coefficient(canopy, f_hz, theta_i), canopy.height, theta_i);
    }
}
