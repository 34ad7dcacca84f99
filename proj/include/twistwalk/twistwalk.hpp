// Copyright 2026 The twistwalk Authors
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

#include "twistwalk/cli.hpp"
#include "twistwalk/config.hpp"
#include "twistwalk/errors.hpp"
#include "twistwalk/hologram.hpp"
#include "twistwalk/io.hpp"
#include "twistwalk/lattice.hpp"
#include "twistwalk/metrics.hpp"
#include "twistwalk/multiphoton.hpp"
#include "twistwalk/radial.hpp"
#include "twistwalk/spectral.hpp"
#include "twistwalk/version.hpp"
#include "twistwalk/wavepacket.hpp"
