#pragma once

// Umbrella header.

#include "tailrv/brown_resnick.hpp"
#include "tailrv/dehaan.hpp"
#include "tailrv/empirics.hpp"
#include "tailrv/errors.hpp"
#include "tailrv/estimate.hpp"
#include "tailrv/experiment.hpp"
#include "tailrv/functional.hpp"
#include "tailrv/gaussian.hpp"
#include "tailrv/grid.hpp"
#include "tailrv/identities.hpp"
#include "tailrv/moduli.hpp"
#include "tailrv/norms.hpp"
#include "tailrv/pareto.hpp"
#include "tailrv/path.hpp"
#include "tailrv/representer.hpp"
#include "tailrv/rng.hpp"
#include "tailrv/scaling.hpp"
#include "tailrv/serialize.hpp"
#include "tailrv/skorohod.hpp"
#include "tailrv/tail_family.hpp"
#include "tailrv/version.hpp"
