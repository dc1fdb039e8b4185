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
#ifndef DDRC_SDP_HPP
#define DDRC_SDP_HPP

#include "ddrc/sdp/affine.hpp"
#include "ddrc/sdp/problem.hpp"
#include "ddrc/sdp/solver.hpp"

#endif  // DDRC_SDP_HPP
