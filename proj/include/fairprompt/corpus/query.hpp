// Copyright 2026 The fairprompt Authors
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

#include <string>

#include "fairprompt/corpus/example.hpp"

namespace fairprompt::corpus {

/// User message sent to a model for one example: "{question} {text}", with a
/// numbered option list appended when the question does not already carry one.
inline std::string render_query(const Example& ex) {
  std::string q = ex.question;
  if (!ex.text.empty()) q += " " + ex.text;
  if (ex.task == Task::mcq && ex.options && ex.dataset_id != DatasetId::stereoset) {
    q += "\nOptions:";
    for (std::size_t i = 0; i < ex.options->size(); ++i) q += " " + std::to_string(i + 1) + "." + (*ex.options)[i];
    q += "\nPlease provide only the index number of the correct option.";
  }
  return q;
}

}  // namespace fairprompt::corpus
