#pragma once

#include "vqfuse/commands.hpp"
#include "vqfuse/config.hpp"
#include "vqfuse/counter_rng.hpp"
#include "vqfuse/fusion.hpp"
#include "vqfuse/geometry.hpp"
#include "vqfuse/io.hpp"
#include "vqfuse/localization.hpp"
#include "vqfuse/metrics.hpp"
#include "vqfuse/pipeline.hpp"
#include "vqfuse/scenario.hpp"
#include "vqfuse/tuner.hpp"
