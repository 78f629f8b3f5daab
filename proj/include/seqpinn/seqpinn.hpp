#pragma once

// Umbrella header: the full solver library.

#include "seqpinn/adam.hpp"
#include "seqpinn/checkpoint.hpp"
#include "seqpinn/config.hpp"
#include "seqpinn/diff.hpp"
#include "seqpinn/errors.hpp"
#include "seqpinn/evaluate.hpp"
#include "seqpinn/grid.hpp"
#include "seqpinn/influence.hpp"
#include "seqpinn/lbfgs.hpp"
#include "seqpinn/loss.hpp"
#include "seqpinn/network.hpp"
#include "seqpinn/partition.hpp"
#include "seqpinn/problems.hpp"
#include "seqpinn/rng.hpp"
#include "seqpinn/sampling.hpp"
#include "seqpinn/spectral.hpp"
#include "seqpinn/tape.hpp"
#include "seqpinn/trainer.hpp"
