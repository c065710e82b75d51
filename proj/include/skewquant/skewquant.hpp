// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skewquant/actions_angles.hpp>
#include <skewquant/core.hpp>
#include <skewquant/dynamics.hpp>
#include <skewquant/integrability.hpp>
#include <skewquant/model.hpp>
#include <skewquant/models.hpp>
#include <skewquant/quantizer.hpp>
#include <skewquant/su2.hpp>
