// Copyright 2026 The QACE Authors
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

#include "qace/answer_sim.hpp"
#include "qace/backend.hpp"
#include "qace/cache.hpp"
#include "qace/error.hpp"
#include "qace/features.hpp"
#include "qace/gateway.hpp"
#include "qace/lexicon.hpp"
#include "qace/meta_eval.hpp"
#include "qace/report.hpp"
#include "qace/rng.hpp"
#include "qace/run_config.hpp"
#include "qace/scorer.hpp"
#include "qace/span_extract.hpp"
#include "qace/stats.hpp"
#include "qace/synthetic.hpp"
