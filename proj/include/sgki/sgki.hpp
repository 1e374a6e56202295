#pragma once

#include "sgki/baselines.hpp"
#include "sgki/bench.hpp"
#include "sgki/error.hpp"
#include "sgki/imaging.hpp"
#include "sgki/interp.hpp"
#include "sgki/kernel.hpp"
#include "sgki/metrics.hpp"
#include "sgki/netpbm.hpp"
#include "sgki/pipeline.hpp"
#include "sgki/uq.hpp"
#include "sgki/cli.hpp"
