#pragma once

#include "fosr/bspline.hpp"
#include "fosr/dataset.hpp"
#include "fosr/design.hpp"
#include "fosr/distributions.hpp"
#include "fosr/errors.hpp"
#include "fosr/inference.hpp"
#include "fosr/io.hpp"
#include "fosr/metrics.hpp"
#include "fosr/rng.hpp"
#include "fosr/sampler.hpp"
#include "fosr/synth.hpp"
