#pragma once

// umbrella header

#include "pathgibbs/cluster.hpp"
#include "pathgibbs/current.hpp"
#include "pathgibbs/energy.hpp"
#include "pathgibbs/gibbs.hpp"
#include "pathgibbs/grid_path.hpp"
#include "pathgibbs/grr.hpp"
#include "pathgibbs/holder.hpp"
#include "pathgibbs/io.hpp"
#include "pathgibbs/n_functional.hpp"
#include "pathgibbs/pair_potential.hpp"
#include "pathgibbs/parallel.hpp"
#include "pathgibbs/potential_ext.hpp"
#include "pathgibbs/rng.hpp"
#include "pathgibbs/rough_integral.hpp"
#include "pathgibbs/rough_path.hpp"
#include "pathgibbs/sampler.hpp"
#include "pathgibbs/stats.hpp"
#include "pathgibbs/test_field.hpp"
