// Copyright 2026 The qaprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Core library. The HTTP pieces (http_model.hpp, http_server.hpp) pull in
// cpp-httplib and are included separately.
#include "qaprobe/adversarial.hpp"
#include "qaprobe/dataset.hpp"
#include "qaprobe/embedding.hpp"
#include "qaprobe/error.hpp"
#include "qaprobe/evaluation.hpp"
#include "qaprobe/internals.hpp"
#include "qaprobe/model_adapter.hpp"
#include "qaprobe/question_bias.hpp"
#include "qaprobe/serialization.hpp"
#include "qaprobe/service.hpp"
#include "qaprobe/text.hpp"
#include "qaprobe/tokenizer.hpp"
