// Copyright 2026 The composite-forge Authors
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


#pragma once

#include "composite_forge/assemble.hpp"
#include "composite_forge/bigint.hpp"
#include "composite_forge/construct.hpp"
#include "composite_forge/cover.hpp"
#include "composite_forge/fp_poly.hpp"
#include "composite_forge/modroots.hpp"
#include "composite_forge/poly.hpp"
#include "composite_forge/primes.hpp"
#include "composite_forge/rng.hpp"
#include "composite_forge/sieve.hpp"
#include "composite_forge/verify.hpp"
