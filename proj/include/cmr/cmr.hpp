// Copyright 2026 The CMR Authors. All Rights Reserved.
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

// Umbrella header for the library (the HTTP wiring lives in cmr/service/http.hpp).

#include "cmr/annotate/composer.hpp"
#include "cmr/context/labeler.hpp"
#include "cmr/context/regions.hpp"
#include "cmr/core/base64.hpp"
#include "cmr/core/manifest.hpp"
#include "cmr/core/rle.hpp"
#include "cmr/core/synthetic.hpp"
#include "cmr/core/types.hpp"
#include "cmr/embed/encoders.hpp"
#include "cmr/embed/fusion.hpp"
#include "cmr/embed/grad_check.hpp"
#include "cmr/embed/layers.hpp"
#include "cmr/embed/losses.hpp"
#include "cmr/embed/model.hpp"
#include "cmr/embed/train.hpp"
#include "cmr/embed/video.hpp"
#include "cmr/error.hpp"
#include "cmr/eval/metrics.hpp"
#include "cmr/index/vector_index.hpp"
#include "cmr/motion/families.hpp"
#include "cmr/motion/labeling.hpp"
#include "cmr/motion/lowess.hpp"
#include "cmr/motion/orientation.hpp"
#include "cmr/motion/segments.hpp"
#include "cmr/service/config.hpp"
#include "cmr/service/pipeline.hpp"
#include "cmr/service/service.hpp"
