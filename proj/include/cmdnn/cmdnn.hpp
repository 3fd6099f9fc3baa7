// cmdnn/cmdnn.hpp

// Copyright 2026  The cmdnn authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CMDNN_CMDNN_HPP_
#define CMDNN_CMDNN_HPP_

#include "cmdnn/tensor.hpp"
#include "cmdnn/layers.hpp"
#include "cmdnn/network.hpp"
#include "cmdnn/dataset.hpp"
#include "cmdnn/training.hpp"
#include "cmdnn/pretraining.hpp"
#include "cmdnn/features.hpp"
#include "cmdnn/structure.hpp"
#include "cmdnn/experiment.hpp"

#endif  // CMDNN_CMDNN_HPP_
