// Copyright 2026 The weakmeter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WEAKMETER_WEAKMETER_HPP
#define WEAKMETER_WEAKMETER_HPP

#include "weakmeter/config.hpp"
#include "weakmeter/dynamics.hpp"
#include "weakmeter/errors.hpp"
#include "weakmeter/formulas.hpp"
#include "weakmeter/linalg.hpp"
#include "weakmeter/meter.hpp"
#include "weakmeter/numdiff.hpp"
#include "weakmeter/scan.hpp"
#include "weakmeter/state.hpp"

#endif // WEAKMETER_WEAKMETER_HPP
