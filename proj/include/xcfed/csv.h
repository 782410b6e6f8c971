/*
 * Copyright 2026 The xcfed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Locale-independent number formatting for every file the simulator emits.
// Doubles are written in shortest round-trip form so parse -> print is
// byte-stable.

#ifndef XCFED_CSV_H_
#define XCFED_CSV_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace xcfed::csv {

std::string format_double(double value);
std::string format_int(std::int64_t value);

// Throws std::invalid_argument on malformed or trailing input.
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

}  // namespace xcfed::csv

#endif  // XCFED_CSV_H_
