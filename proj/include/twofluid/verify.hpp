#pragma once

#include "twofluid/verify/conservation.hpp"
#include "twofluid/verify/fick.hpp"
#include "twofluid/verify/gibbs.hpp"
#include "twofluid/verify/manufactured.hpp"
#include "twofluid/verify/reduction.hpp"
