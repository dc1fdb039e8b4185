/*
 Copyright 2026 The ddrc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef DDRC_DDRC_HPP
#define DDRC_DDRC_HPP

// Umbrella header for the whole library.

#include "ddrc/linalg.hpp"
#include "ddrc/lti.hpp"
#include "ddrc/noise.hpp"
#include "ddrc/datamat.hpp"
#include "ddrc/sdp.hpp"
#include "ddrc/synth.hpp"
#include "ddrc/verify.hpp"
#include "ddrc/experiment.hpp"

#endif  // DDRC_DDRC_HPP
