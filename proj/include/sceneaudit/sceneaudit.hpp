#pragma once

// Umbrella header for the whole library.

#include "sceneaudit/association.hpp"
#include "sceneaudit/baselines.hpp"
#include "sceneaudit/datagen.hpp"
#include "sceneaudit/dists.hpp"
#include "sceneaudit/engine.hpp"
#include "sceneaudit/errors.hpp"
#include "sceneaudit/features.hpp"
#include "sceneaudit/geometry.hpp"
#include "sceneaudit/metrics.hpp"
#include "sceneaudit/random.hpp"
#include "sceneaudit/scene.hpp"
#include "sceneaudit/scene_io.hpp"
