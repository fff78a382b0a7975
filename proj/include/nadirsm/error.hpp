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

#ifndef NADIRSM_ERROR_HPP
#define NADIRSM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace nadirsm
{
    // Two families of failure, mirrored by the CLI exit codes:
    // - InputError: malformed files, bad arguments, violated preconditions (exit 1)
    // - ValidityError: numerical or model-validity failures on well-formed input (exit 2)
    class InputError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class ValidityError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Electrical size outside the range where a scattering approximation holds
    class ApproximationOutOfRange : public ValidityError
    {
    public:
        using ValidityError::ValidityError;
    };

    // Inverse Topp conversion has no root inside its bracket
    class NoSolution : public ValidityError
    {
    public:
        using ValidityError::ValidityError;
    };

    // Range gating found nothing above the noise floor
    class NoPeakFound : public ValidityError
    {
    public:
        using ValidityError::ValidityError;
    };

    // Row detection found no periodic structure in the canopy height model
    class NoPeriodicity : public ValidityError
    {
    public:
        using ValidityError::ValidityError;
    };

    // Parse failure in one of the text formats; carries the offending line number
    class ParseError : public InputError
    {
    public:
        ParseError(const std::string &path, std::size_t line, const std::string &what)
            : InputError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
        std::size_t line() const { return line_; }

    private:
        std::size_t line_;
    };
}

#endif
