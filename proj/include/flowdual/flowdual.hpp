#pragma once

#include "flowdual/error.hpp"
#include "flowdual/rng.hpp"
#include "flowdual/levy.hpp"
#include "flowdual/noise.hpp"
#include "flowdual/volmodel.hpp"
#include "flowdual/parallel.hpp"
#include "flowdual/flow.hpp"
#include "flowdual/pricing.hpp"
#include "flowdual/two_asset.hpp"
#include "flowdual/pide.hpp"
#include "flowdual/config.hpp"
#include "flowdual/harness.hpp"
#include "flowdual/report.hpp"
#include "flowdual/cli.hpp"
