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

#include "nadirsm/canopy_rt.hpp"
#include "nadirsm/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace nadirsm;

TEST_SUITE("canopy-rt")
{
    TEST_CASE("cylinder forward amplitude")
    {
        CylinderGeometry air{0.015, 2.0, ComplexPermittivity(1.0)};
        CHECK(std::abs(cylinder_forward_amplitude(air, 500e6, 0.0)) == 0.0);

        CylinderGeometry stalk{0.015, 2.0, ComplexPermittivity(25.0, 8.0)};
        CHECK(cylinder_forward_amplitude(stalk, 500e6, 0.0).imag() > 0.0);

        CylinderGeometry longer = stalk;
        longer.length = 4.0;
        const double ratio =
            std::abs(cylinder_forward_amplitude(longer, 500e6, 0.0)) / std::abs(cylinder_forward_amplitude(stalk, 500e6, 0.0));
        CHECK(ratio == doctest::Approx(2.0).epsilon(0.05));

        // k r = 18.9 * 0.5 at 900 MHz
        CylinderGeometry trunk{0.5, 2.0, ComplexPermittivity(25.0, 8.0)};
        CHECK_THROWS_AS(cylinder_forward_amplitude(trunk, 900e6, 0.0), ApproximationOutOfRange);
        CHECK_THROWS_AS(cylinder_forward_amplitude(CylinderGeometry{0.0, 1.0, ComplexPermittivity(4.0)}, 5e8, 0.0),
                        InputError);
    }

    TEST_CASE("disk forward amplitude")
    {
        DiskGeometry air{0.04, 0.0003, ComplexPermittivity(1.0)};
        CHECK(std::abs(disk_forward_amplitude(air, 500e6, 0.0, {})) == 0.0);

        DiskGeometry leaf{0.04, 0.0003, ComplexPermittivity(30.0, 10.0)};
        for (double f : {200e6, 550e6, 900e6})
        {
            const double face_on = std::abs(disk_forward_amplitude(leaf, f, 0.0, {0.0, 0.0}));
            const double edge_on = std::abs(disk_forward_amplitude(leaf, f, 0.0, {0.0, pi / 2.0}));
            CHECK(face_on >= edge_on);
            CHECK(disk_forward_amplitude(leaf, f, 0.0, {0.3, 0.7}).imag() > 0.0);
        }

        // k t |sqrt(eps)| = 18.9 * 0.01 * 5.7 > 1
        DiskGeometry thick{0.05, 0.01, ComplexPermittivity(30.0, 10.0)};
        CHECK_THROWS_AS(disk_forward_amplitude(thick, 900e6, 0.0, {}), ApproximationOutOfRange);
        // thickness / radius > 0.2
        DiskGeometry stubby{0.01, 0.005, ComplexPermittivity(4.0)};
        CHECK_THROWS_AS(disk_forward_amplitude(stubby, 300e6, 0.0, {}), InputError);
    }

    TEST_CASE("corn leaf as a chain of disks")
    {
        const ComplexPermittivity eps(15.0, 4.5);
        const double w = 0.08;
        const Orientation o{0.4, 0.9};
        const auto one = disk_forward_amplitude(DiskGeometry{w / 2.0, 3e-4, eps}, 550e6, 0.0, o);
        const auto same = corn_leaf_amplitude(w, w, 3e-4, eps, 550e6, 0.0, o);
        CHECK(same.real() == doctest::Approx(one.real()).epsilon(1e-12));
        CHECK(same.imag() == doctest::Approx(one.imag()).epsilon(1e-12));

        const auto three = corn_leaf_amplitude(3.0 * w, w, 3e-4, eps, 550e6, 0.0, o);
        CHECK(three.imag() == doctest::Approx(3.0 * one.imag()).epsilon(1e-12));

        for (double length : {0.08, 0.3, 0.7, 0.95})
        {
            const auto n = double(corn_leaf_segments(length, w));
            CHECK(n * w >= length - 1e-12);
            CHECK(n * w - length < w);
        }
        CHECK_THROWS_AS(corn_leaf_segments(0.05, 0.08), InputError);
    }

    TEST_CASE("orientation averaging")
    {
        const DiskGeometry leaf{0.04, 0.0003, ComplexPermittivity(15.0, 4.5)};
        const auto amp = [&](Orientation o) { return disk_forward_amplitude(leaf, 550e6, 0.0, o); };

        const double vertical = orientation_average_im(amp, OrientationDistribution::vertical());
        CHECK(vertical == amp({0.0, 0.0}).imag());

        const auto constant = [](Orientation) { return std::complex<double>(0.0, 0.37); };
        CHECK(orientation_average_im(constant, OrientationDistribution::uniform()) == doctest::Approx(0.37).epsilon(1e-12));
        std::vector<double> table(4 * 4, 0.0);
        for (std::size_t i = 0; i < 4; ++i)
            table[i * 4 + 1] = 1.0 / (2.0 * pi * (pi / 2.0) / 4.0); // one delta band, all azimuths
        const auto banded = OrientationDistribution::tabulated(4, 4, table);
        CHECK(orientation_average_im(constant, banded) == doctest::Approx(0.37).epsilon(1e-9));

        const double coarse = orientation_average_im(amp, OrientationDistribution::uniform(), 32);
        const double fine = orientation_average_im(amp, OrientationDistribution::uniform(), 128);
        CHECK(std::abs(coarse - fine) / fine < 0.01);

        CHECK_THROWS_AS(OrientationDistribution::tabulated(2, 2, {1.0, 1.0, 1.0, 1.0}), InputError);
    }

    TEST_CASE("extinction coefficient")
    {
        CHECK(extinction_coefficient(CanopyDescriptor{}, 550e6) == 0.0);

        CanopyDescriptor soy = test::soybean_canopy();
        CanopyDescriptor doubled = soy;
        doubled.leaf_density *= 2.0;
        CHECK(extinction_coefficient(doubled, 550e6) ==
              doctest::Approx(2.0 * extinction_coefficient(soy, 550e6)).epsilon(1e-12));

        CanopyDescriptor sparse_dry = test::soybean_canopy(ComplexPermittivity(5.0, 0.5));
        sparse_dry.leaf_density = 200.0;
        const CanopyDescriptor dense_green = test::dense_wet_canopy();
        const auto band = FrequencyGrid::default_band();
        for (double f : band.frequencies())
            CHECK(extinction_coefficient(dense_green, f) > extinction_coefficient(sparse_dry, f));
    }

    TEST_CASE("extinction is additive over stalks and leaves")
    {
        const CanopyDescriptor corn = test::corn_canopy();
        CanopyDescriptor stalks = corn;
        stalks.leaf_density = 0.0;
        CanopyDescriptor leaves = corn;
        leaves.stalk_density = 0.0;
        for (double f : {250e6, 600e6, 880e6})
            CHECK(extinction_coefficient(corn, f) ==
                  doctest::Approx(extinction_coefficient(stalks, f) + extinction_coefficient(leaves, f)).epsilon(1e-12));
    }

    TEST_CASE("extinction model matches the direct evaluation")
    {
        for (const CanopyDescriptor &c : {test::corn_canopy(), test::soybean_canopy()})
        {
            const ExtinctionModel model(c, deg2rad(2.0));
            for (double er : {1.5, 8.0, 30.0})
            {
                const auto eps = ComplexPermittivity::from_loss_tangent(er, 0.3);
                for (double f : {200e6, 550e6, 900e6})
                    CHECK(model.kappa(eps, f) ==
                          doctest::Approx(extinction_coefficient(c.with_permittivity(eps), f, deg2rad(2.0)))
                              .epsilon(1e-10));
            }
        }
    }

    TEST_CASE("transmissivity")
    {
        CHECK(transmissivity(CanopyDescriptor{}, 550e6, 0.0) == 1.0);
        CHECK(transmissivity_from_extinction(std::log(2.0), 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(transmissivity_from_extinction(std::log(2.0), 1.0, pi / 3.0) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK_THROWS_AS(transmissivity_from_extinction(0.1, 1.0, deg2rad(80.0)), InputError);
    }

    TEST_CASE("descriptor validation")
    {
        CanopyDescriptor corn = test::corn_canopy();
        corn.stalk_geometry.reset();
        CHECK_THROWS_AS(corn.validate(), InputError);
        CanopyDescriptor bad = test::soybean_canopy();
        bad.leaf_density = -1.0;
        CHECK_THROWS_AS(bad.validate(), InputError);
    }
}
