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

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "generators.hpp"

#include <cstring>
#include <vector>

namespace nadirsm::test
{
    namespace
    {
        std::size_t cases = 200;
    }

    std::size_t property_cases() { return cases; }
    void set_property_cases(std::size_t n) { cases = n; }
}

// --minimal runs every property on fewer random cases; other arguments go to doctest
int main(int argc, char **argv)
{
    std::vector<char *> rest;
    for (int i = 0; i < argc; ++i)
    {
        if (std::strcmp(argv[i], "--minimal") == 0)
            nadirsm::test::set_property_cases(40);
        else
            rest.push_back(argv[i]);
    }
    doctest::Context ctx(int(rest.size()), rest.data());
    return ctx.run();
}
