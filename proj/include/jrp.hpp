#pragma once

#include "jrp/baselines.hpp"
#include "jrp/core.hpp"
#include "jrp/eptas.hpp"
#include "jrp/io.hpp"
#include "jrp/lotsizing.hpp"
#include "jrp/oracle.hpp"
#include "jrp/preprocess.hpp"
#include "jrp/reduction.hpp"
