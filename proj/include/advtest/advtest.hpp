#pragma once

#include "advtest/campaign/analysis.hpp"
#include "advtest/campaign/ledger.hpp"
#include "advtest/campaign/runner.hpp"
#include "advtest/error.hpp"
#include "advtest/harness/controller.hpp"
#include "advtest/harness/protocol.hpp"
#include "advtest/harness/track.hpp"
#include "advtest/harness/vehicle.hpp"
#include "advtest/harness/visibility.hpp"
#include "advtest/harness/world.hpp"
#include "advtest/json_io.hpp"
#include "advtest/rng.hpp"
#include "advtest/sampling/sampler.hpp"
#include "advtest/scenario/environment.hpp"
#include "advtest/scenario/interpreter.hpp"
#include "advtest/scoring/scoring.hpp"
#include "advtest/sdl/agent_spec.hpp"
#include "advtest/sdl/sampler_spec.hpp"
#include "advtest/sdl/scene_spec.hpp"
#include "advtest/sdl/validate.hpp"
#include "advtest/version.hpp"
