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

#ifndef NADIRSM_CANOPY_RT_HPP
#define NADIRSM_CANOPY_RT_HPP

#include "nadirsm/em_core.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

// Discrete-scatterer canopy: stalks are finite dielectric cylinders, leaves are thin dielectric
// disks. Only the forward-scattering amplitude is modelled; it sets the extinction of the
// specular ground return, which is all the nadir geometry needs.
//
// Amplitude convention: S is dimensionless, S = k * f where f [m] is the usual far-field
// scattering amplitude. With this convention the extinction coefficient reads
//     kappa_e = 4 pi / k^2 * sum_j N_j <Im S_j>
// and the optical theorem forces Im S > 0 for any absorbing scatterer.
//
// A single horizontal polarization (perpendicular to the plane of incidence) is evaluated.

namespace nadirsm
{
    struct CylinderGeometry
    {
        double radius = 0.0; // [m]
        double length = 0.0; // [m]
        ComplexPermittivity permittivity;

        void validate() const;
    };

    struct DiskGeometry
    {
        double radius = 0.0;    // [m]
        double thickness = 0.0; // [m], thickness / radius <= 0.2
        ComplexPermittivity permittivity;

        void validate() const;
    };

    // Orientation of a scatterer's symmetry axis (cylinder axis, disk normal)
    struct Orientation
    {
        double psi = 0.0;   // azimuth [rad], [0, 2 pi)
        double delta = 0.0; // tilt from vertical [rad], [0, pi/2]
    };

    // Probability density p(psi, delta) with respect to d psi d delta
    class OrientationDistribution
    {
    public:
        enum class Kind
        {
            uniform,
            vertical,
            tabulated
        };

        static OrientationDistribution uniform();
        static OrientationDistribution vertical();

        // Piecewise-constant density on an n_psi x n_delta cell grid (row-major in psi).
        // Must integrate to 1 within 1e-3 under the module quadrature, else InputError.
        static OrientationDistribution tabulated(std::size_t n_psi, std::size_t n_delta, std::vector<double> density);

        Kind kind() const { return kind_; }
        double density(double psi, double delta) const;

        std::size_t table_n_psi() const { return n_psi_; }
        std::size_t table_n_delta() const { return n_delta_; }
        const std::vector<double> &table() const { return table_; }

    private:
        Kind kind_ = Kind::uniform;
        std::size_t n_psi_ = 0;
        std::size_t n_delta_ = 0;
        std::vector<double> table_;
    };

    enum class CropKind
    {
        corn,
        soybean
    };

    std::string to_string(CropKind kind);
    CropKind crop_kind_from_string(const std::string &s);

    struct CanopyDescriptor
    {
        double height = 0.0;       // [m]
        double stalk_density = 0.0; // [stalks / m^3]
        double leaf_density = 0.0;  // [leaves / m^3]
        std::optional<CylinderGeometry> stalk_geometry;
        DiskGeometry leaf_geometry;
        OrientationDistribution leaf_orientation = OrientationDistribution::uniform();
        CropKind crop_kind = CropKind::soybean;
        double corn_leaf_length = 0.0; // [m], corn only: leaf built from disks of diameter 2 * leaf radius

        void validate() const;

        // Copy with stalk and leaf permittivity replaced (both layers share one canopy permittivity)
        CanopyDescriptor with_permittivity(const ComplexPermittivity &eps) const;
        bool empty() const { return stalk_density == 0.0 && leaf_density == 0.0; }
    };

    // Quadrature resolution used for orientation averages
    inline constexpr std::size_t orientation_quadrature_n = 32;

    // Forward amplitude of a finite cylinder (axis along `axis`, vertical by default).
    // Internal field from the long-cylinder quasi-static solution: unchanged along the axis,
    // 2 / (eps + 1) across it. The length factor equals the full length in the forward direction.
    // Throws ApproximationOutOfRange for k r > 2.
    std::complex<double> cylinder_forward_amplitude(const CylinderGeometry &geom, double f_hz, double theta_i,
                                                    Orientation axis = {});

    // Generalized Rayleigh-Gans thin disk: tangential field passes unchanged, the normal
    // component is reduced by 1 / eps. Throws ApproximationOutOfRange for k t |sqrt(eps)| >= 1.
    std::complex<double> disk_forward_amplitude(const DiskGeometry &geom, double f_hz, double theta_i,
                                                Orientation normal);

    // Number of disks of diameter `leaf_width` making up a corn leaf of `leaf_length`
    std::size_t corn_leaf_segments(double leaf_length, double leaf_width);

    // Elongated leaf as ceil(length / width) coplanar disks summed with zero relative phase
    std::complex<double> corn_leaf_amplitude(double leaf_length, double leaf_width, double thickness,
                                             const ComplexPermittivity &eps, double f_hz, double theta_i,
                                             Orientation normal);

    // <Im S> = double integral of Im S(psi, delta) p(psi, delta), midpoint rule on an n x n grid
    double orientation_average_im(const std::function<std::complex<double>(Orientation)> &amplitude,
                                  const OrientationDistribution &dist, std::size_t n = orientation_quadrature_n);

    // Volume extinction coefficient [Np/m]
    double extinction_coefficient(const CanopyDescriptor &canopy, double f_hz, double theta_i = 0.0);

    // Extinction for a fixed canopy structure and many candidate permittivities. Both amplitude
    // models are affine in the squared polarization projection q = (p . axis)^2,
    //     S(q) = (1 - q) S(0) + q S(1),
    // so the orientation average reduces to <q> under the leaf pdf, computed once. kappa() equals
    // extinction_coefficient(structure.with_permittivity(eps), f, theta_i) up to rounding.
    class ExtinctionModel
    {
    public:
        explicit ExtinctionModel(CanopyDescriptor structure, double theta_i = 0.0);

        double kappa(const ComplexPermittivity &eps, double f_hz) const;
        double leaf_projection_moment() const { return leaf_moment_; }

    private:
        CanopyDescriptor structure_;
        double theta_i_;
        double leaf_moment_ = 0.0;
    };

    // One-way amplitude transmissivity exp(-kappa_e h / cos theta_i); rejects theta_i >= 80 deg
    double transmissivity(const CanopyDescriptor &canopy, double f_hz, double theta_i);
    double transmissivity_from_extinction(double kappa_e, double height, double theta_i);
}

#endif
