#pragma once

// Umbrella header.

#include "perturbench/attack.hpp"
#include "perturbench/classify.hpp"
#include "perturbench/dataset.hpp"
#include "perturbench/entropy.hpp"
#include "perturbench/error.hpp"
#include "perturbench/fis.hpp"
#include "perturbench/perturb.hpp"
#include "perturbench/pipeline.hpp"
#include "perturbench/report.hpp"
#include "perturbench/resistance.hpp"
#include "perturbench/rng.hpp"
#include "perturbench/utility.hpp"
#include "perturbench/version.hpp"
